#ifndef CIRCLELAB_MODEL_HPP_
#define CIRCLELAB_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "circlelab/matrix.hpp"

namespace circlelab {

enum class Activation { kTanh, kIdentity };

// Small mean-pooled embedding network with a cosine classifier head:
// per-frame hidden layers, arithmetic mean over frames, linear projection to
// the embedding, length normalization. No biases anywhere. The classifier
// holds one unit-norm weight vector per class (as rows), so classifier-row
// dot embedding is a cosine.
struct ToyModel {
  int frame_dim = 0;
  std::vector<int> hidden_dims;
  int embedding_dim = 0;
  int num_classes = 0;
  Activation activation = Activation::kTanh;

  std::vector<Matrix> hidden;  // hidden[i]: hidden_dims[i] x previous width
  Matrix embed;                // embedding_dim x hidden_dims.back()
  Matrix classifier;           // num_classes x embedding_dim, unit-norm rows

  std::size_t num_parameters() const;
};

// Gradient (or momentum) buffers with the same shapes as the model weights.
struct ModelGrad {
  std::vector<Matrix> hidden;
  Matrix embed;
  Matrix classifier;

  static ModelGrad zeros_like(const ToyModel& model);
  void set_zero();
};

// Random init: Gaussian weights scaled by 1/sqrt(fan_in), classifier rows
// normalized to unit norm. Deterministic in the seed.
ToyModel init_model(int frame_dim, const std::vector<int>& hidden_dims,
                    int embedding_dim, int num_classes, Activation activation,
                    std::uint64_t seed);

// Unit-norm embedding of a chunk (num_frames x frame_dim, row-major).
// Throws DomainError for an empty chunk, NumericalError if the pre-norm
// embedding degenerates to zero or goes non-finite.
std::vector<double> forward_embed(const ToyModel& model,
                                  std::span<const double> chunk);

// Cosine of the embedding against every classifier row.
std::vector<double> class_cosines(const ToyModel& model,
                                  std::span<const double> embedding);

// Rescale every classifier row back to unit norm.
void renormalize_classifier(ToyModel& model);

}  // namespace circlelab

#endif  // CIRCLELAB_MODEL_HPP_
