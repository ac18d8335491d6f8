#ifndef CIRCLELAB_MODEL_INTERNAL_HPP_
#define CIRCLELAB_MODEL_INTERNAL_HPP_

// Library-private forward/backward plumbing shared by model.cpp and
// train.cpp. Not installed.

#include <span>
#include <vector>

#include "circlelab/model.hpp"

namespace circlelab::detail {

// Forward pass over one chunk keeping every per-frame activation, so the
// analytic backward pass can mirror it exactly.
struct ForwardTrace {
  // acts[layer][frame]: activation output of that hidden layer.
  std::vector<std::vector<std::vector<double>>> acts;
  std::vector<double> pooled;     // mean of last hidden layer over frames
  std::vector<double> raw;        // pre-normalization embedding
  std::vector<double> embedding;  // unit norm
  double raw_norm = 0.0;
  int num_frames = 0;
};

ForwardTrace forward_trace(const ToyModel& model, std::span<const double> chunk);

void backward_from_embedding(const ToyModel& model, std::span<const double> chunk,
                             const ForwardTrace& trace,
                             std::span<const double> d_embedding,
                             ModelGrad& grad);

}  // namespace circlelab::detail

#endif  // CIRCLELAB_MODEL_INTERNAL_HPP_
