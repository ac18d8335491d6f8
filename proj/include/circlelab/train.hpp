#ifndef CIRCLELAB_TRAIN_HPP_
#define CIRCLELAB_TRAIN_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "circlelab/corpus.hpp"
#include "circlelab/losses.hpp"
#include "circlelab/margin.hpp"
#include "circlelab/model.hpp"

namespace circlelab {

// How the training margin evolves. Scheduling rewrites the circle-loss
// margin and is therefore only valid with LossVariant::kCircleLoss; the
// other variants train with their configured margins unchanged (kFixed).
enum class MarginMode { kFixed, kStage, kChunk };

// Chunk-width sampling interval for one training stage.
struct ChunkInterval {
  int l1 = 0;
  int l2 = 0;
};

// Full recipe for one training run. The number of stages is the number of
// chunk intervals; epochs are split across stages as equally as integer
// division allows, and the learning rate is divided by lr_drop at each
// stage boundary.
struct TrainConfig {
  LossSpec loss;

  MarginMode margin_mode = MarginMode::kFixed;
  StageSchedule stage_margins;   // read when margin_mode == kStage
  double chunk_m0 = 0.40;        // read when margin_mode == kChunk
  double chunk_lambda = 0.25;    //   "    (see ChunkMarginSpec)

  // Per-stage chunk-width intervals; bounds never decrease across stages.
  std::vector<ChunkInterval> chunk_intervals = {{20, 40}, {30, 50}, {40, 60}};

  int epochs = 9;
  int batch_size = 64;
  double learning_rate = 0.1;
  double lr_drop = 10.0;
  double momentum = 0.9;
  double weight_decay = 1e-3;    // not applied to the classifier

  std::vector<int> hidden_dims = {64, 64};
  int embedding_dim = 32;
  Activation activation = Activation::kTanh;

  std::uint64_t seed = 1;

  int num_stages() const { return static_cast<int>(chunk_intervals.size()); }
  void validate() const;  // ConfigError
};

// End-of-epoch summary computed on a freshly drawn 10% sample of training
// utterances (full utterances, no chunking). Per sample, s_p is the cosine
// to its own class and s_n the largest cosine to any other class; the
// stored means are plain averages over the sample. margin is the margin in
// effect that epoch: the stage margin, the mean of the per-step chunk
// margins, or the configured additive margin (0 for plain softmax).
struct EpochDiagnostics {
  int epoch = 0;  // 1-based
  double s_p_mean = 0.0;
  double s_n_mean = 0.0;
  double r_mean = 0.0;
  double loss_mean = 0.0;
  double margin = 0.0;
};

struct TrainResult {
  ToyModel model;
  std::vector<EpochDiagnostics> diagnostics;  // one per epoch
};

// One training sample: a chunk (num_frames x frame_dim, row-major) plus its
// class label.
struct BatchSample {
  std::vector<double> chunk;
  int label = 0;
};

// Distance of the epoch-average similarity point (s_p_mean, s_n_mean) from
// the optimum (1, 0).
double mean_radius(double s_p_mean, double s_n_mean);

// The additive margin a fixed-margin run reports: the circle margin m, the
// angular family's m3 (falling back to m2 when m3 is 0), or 0 for plain
// softmax.
double reported_margin(const LossSpec& spec);

// Mean loss over the batch; grad is overwritten with the matching mean
// gradient. The backward pass is fully analytic (loss -> cosines ->
// classifier and embedding -> network weights).
double batch_loss_grad(const ToyModel& model, std::span<const BatchSample> batch,
                       const LossSpec& spec, ModelGrad& grad);

// Minibatch SGD with momentum and weight decay over the corpus. Each step
// samples one chunk width from the current stage's interval, crops every
// sample in the batch to that width, resolves the margin per margin_mode,
// and renormalizes the classifier rows after the update. Deterministic:
// equal (config, corpus) give bit-identical results. Throws NumericalError
// with epoch/step context if the loss goes non-finite.
TrainResult train(const TrainConfig& config, const Corpus& corpus);

// Fraction of utterances whose nearest classifier row (by cosine) is their
// training label. Full utterances, no chunking.
double training_accuracy(const ToyModel& model, const Corpus& corpus);

// Unit-norm embedding of every full utterance, in corpus order.
std::vector<std::vector<double>> embed_corpus(const ToyModel& model,
                                              const Corpus& corpus);

}  // namespace circlelab

#endif  // CIRCLELAB_TRAIN_HPP_
