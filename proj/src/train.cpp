#include "circlelab/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "circlelab/errors.hpp"
#include "circlelab/rng.hpp"
#include "model_internal.hpp"

namespace circlelab {

namespace {

constexpr std::uint64_t kTagTrain = 0x747261696eull;
constexpr std::uint64_t kTagDiag = 0x64696167ull;

// Fraction of training utterances summarized per epoch.
constexpr double kDiagFraction = 0.1;

void momentum_step(Matrix& w, Matrix& vel, const Matrix& g, double lr,
                   double mu, double wd) {
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    vel.data[i] = mu * vel.data[i] + (g.data[i] + wd * w.data[i]);
    w.data[i] -= lr * vel.data[i];
  }
}

void check_corpus(const Corpus& corpus) {
  if (corpus.num_speakers < 2) throw ConfigError("corpus needs >= 2 speakers");
  if (corpus.num_utterances() < 1) throw ConfigError("corpus has no utterances");
  if (corpus.frame_dim < 1) throw ConfigError("corpus frame_dim must be >= 1");
  for (const auto& utt : corpus.utterances) {
    if (utt.label < 0 || utt.label >= corpus.num_speakers)
      throw ConfigError("utterance label " + std::to_string(utt.label) +
                        " outside [0, " + std::to_string(corpus.num_speakers) + ")");
  }
}

EpochDiagnostics epoch_diagnostics(const ToyModel& model, const Corpus& corpus,
                                   const LossSpec& diag_spec, double margin,
                                   int epoch_1based, std::uint64_t seed) {
  const int n = corpus.num_utterances();
  const int count = std::max(1, static_cast<int>(kDiagFraction * n));

  Rng rng(mix_seed(mix_seed(seed, kTagDiag),
                   static_cast<std::uint64_t>(epoch_1based)));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  double sp_sum = 0.0, sn_sum = 0.0, loss_sum = 0.0;
  for (int i = 0; i < count; ++i) {
    const Utterance& utt = corpus.utterances[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    const auto emb = forward_embed(model, utt.frames);
    const auto cos = class_cosines(model, emb);
    sp_sum += cos[static_cast<std::size_t>(utt.label)];
    double sn = -2.0;  // below any cosine
    for (int j = 0; j < model.num_classes; ++j)
      if (j != utt.label) sn = std::max(sn, cos[static_cast<std::size_t>(j)]);
    sn_sum += sn;
    loss_sum += classification_loss_grad(cos, utt.label, diag_spec).loss;
  }

  EpochDiagnostics d;
  d.epoch = epoch_1based;
  d.s_p_mean = sp_sum / count;
  d.s_n_mean = sn_sum / count;
  d.r_mean = mean_radius(d.s_p_mean, d.s_n_mean);
  d.loss_mean = loss_sum / count;
  d.margin = margin;
  return d;
}

}  // namespace

void TrainConfig::validate() const {
  loss.validate();
  if (chunk_intervals.empty()) throw ConfigError("need at least one chunk interval");
  for (std::size_t k = 0; k < chunk_intervals.size(); ++k) {
    const auto& iv = chunk_intervals[k];
    if (iv.l1 < 1 || iv.l2 < iv.l1)
      throw ConfigError("chunk interval must satisfy 1 <= l1 <= l2");
    if (k > 0 && (iv.l1 < chunk_intervals[k - 1].l1 || iv.l2 < chunk_intervals[k - 1].l2))
      throw ConfigError("chunk interval bounds must not decrease across stages");
  }
  if (margin_mode != MarginMode::kFixed && loss.variant != LossVariant::kCircleLoss)
    throw ConfigError("margin scheduling requires the circle loss");
  if (margin_mode == MarginMode::kStage) {
    stage_margins.validate();
    if (stage_margins.num_stages() != num_stages())
      throw ConfigError("stage margin count (" +
                        std::to_string(stage_margins.num_stages()) +
                        ") must match chunk interval count (" +
                        std::to_string(num_stages()) + ")");
  }
  if (margin_mode == MarginMode::kChunk) {
    ChunkMarginSpec cs;
    cs.m0 = chunk_m0;
    cs.lambda = chunk_lambda;
    cs.l_min = chunk_intervals.front().l1;
    cs.l_max = chunk_intervals.back().l2;
    cs.validate();
  }
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(lr_drop >= 1.0)) throw ConfigError("lr_drop must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (hidden_dims.empty()) throw ConfigError("need at least one hidden layer");
  for (int h : hidden_dims)
    if (h < 1) throw ConfigError("hidden width must be >= 1");
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
}

double mean_radius(double s_p_mean, double s_n_mean) {
  const double dp = 1.0 - s_p_mean;
  return std::sqrt(dp * dp + s_n_mean * s_n_mean);
}

double reported_margin(const LossSpec& spec) {
  switch (spec.variant) {
    case LossVariant::kCircleLoss:
      return spec.m;
    case LossVariant::kAngularSoftmax:
      return spec.m3 > 0.0 ? spec.m3 : spec.m2;
    case LossVariant::kSoftmax:
      return 0.0;
  }
  return 0.0;
}

double batch_loss_grad(const ToyModel& model, std::span<const BatchSample> batch,
                       const LossSpec& spec, ModelGrad& grad) {
  if (batch.empty()) throw DomainError("empty batch");
  grad.set_zero();

  double loss_sum = 0.0;
  std::vector<double> cos(static_cast<std::size_t>(model.num_classes));
  std::vector<double> d_embedding(static_cast<std::size_t>(model.embedding_dim));
  for (const BatchSample& sample : batch) {
    const detail::ForwardTrace trace = detail::forward_trace(model, sample.chunk);
    matvec(model.classifier, trace.embedding, cos);
    const LossAndGrad lg = classification_loss_grad(cos, sample.label, spec);
    loss_sum += lg.loss;
    add_outer(grad.classifier, lg.d_cos, trace.embedding, 1.0);
    matvec_t(model.classifier, lg.d_cos, d_embedding);
    detail::backward_from_embedding(model, sample.chunk, trace, d_embedding, grad);
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& h : grad.hidden)
    for (auto& v : h.data) v *= inv;
  for (auto& v : grad.embed.data) v *= inv;
  for (auto& v : grad.classifier.data) v *= inv;
  return loss_sum * inv;
}

TrainResult train(const TrainConfig& config, const Corpus& corpus) {
  config.validate();
  check_corpus(corpus);

  TrainResult result;
  result.model = init_model(corpus.frame_dim, config.hidden_dims,
                            config.embedding_dim, corpus.num_speakers,
                            config.activation, config.seed);
  if (config.epochs == 0) return result;

  ToyModel& model = result.model;
  ModelGrad grad = ModelGrad::zeros_like(model);
  ModelGrad vel = ModelGrad::zeros_like(model);

  ChunkMarginSpec chunk_spec;
  if (config.margin_mode == MarginMode::kChunk) {
    chunk_spec.m0 = config.chunk_m0;
    chunk_spec.lambda = config.chunk_lambda;
    chunk_spec.l_min = config.chunk_intervals.front().l1;
    chunk_spec.l_max = config.chunk_intervals.back().l2;
  }

  Rng rng(mix_seed(config.seed, kTagTrain));
  const int n = corpus.num_utterances();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<BatchSample> batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const int stage = stage_for_epoch(epoch, config.epochs, config.num_stages());
    const double lr =
        config.learning_rate / std::pow(config.lr_drop, static_cast<double>(stage));
    const ChunkInterval interval =
        config.chunk_intervals[static_cast<std::size_t>(stage)];

    rng.shuffle(order);

    // Only chunk-based margins vary within an epoch; fixed and stage margins
    // are one number for all of this epoch's steps.
    double epoch_level_margin = reported_margin(config.loss);
    if (config.margin_mode == MarginMode::kStage)
      epoch_level_margin = stage_margin(config.stage_margins, stage);

    double margin_sum = 0.0;
    int steps = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int bsz = std::min(config.batch_size, n - start);
      const int width = sample_chunk_width(interval.l1, interval.l2, rng);

      LossSpec step_spec = config.loss;
      double step_margin = epoch_level_margin;
      if (config.margin_mode == MarginMode::kChunk)
        step_margin = chunk_margin(chunk_spec, width);
      if (config.margin_mode != MarginMode::kFixed) step_spec.m = step_margin;

      batch.clear();
      for (int i = 0; i < bsz; ++i) {
        const Utterance& utt =
            corpus.utterances[static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)])];
        batch.push_back(
            {sample_chunk(utt, corpus.frame_dim, width, rng), utt.label});
      }

      const double loss = batch_loss_grad(model, batch, step_spec, grad);
      if (!std::isfinite(loss))
        throw NumericalError("non-finite training loss (epoch " +
                             std::to_string(epoch + 1) + ", step " +
                             std::to_string(steps + 1) + ", margin " +
                             std::to_string(step_margin) + ", lr " +
                             std::to_string(lr) + ")");

      for (std::size_t l = 0; l < model.hidden.size(); ++l)
        momentum_step(model.hidden[l], vel.hidden[l], grad.hidden[l], lr,
                      config.momentum, config.weight_decay);
      momentum_step(model.embed, vel.embed, grad.embed, lr, config.momentum,
                    config.weight_decay);
      // Weight decay would only shrink the rows we renormalize right after.
      momentum_step(model.classifier, vel.classifier, grad.classifier, lr,
                    config.momentum, 0.0);
      renormalize_classifier(model);

      margin_sum += step_margin;
      ++steps;
    }

    // Exactly the margin in effect for fixed/stage margins; the mean of the
    // per-step values under chunk-based margins.
    const double epoch_margin = config.margin_mode == MarginMode::kChunk
                                    ? margin_sum / steps
                                    : epoch_level_margin;
    LossSpec diag_spec = config.loss;
    if (config.margin_mode != MarginMode::kFixed) diag_spec.m = epoch_margin;
    result.diagnostics.push_back(epoch_diagnostics(
        model, corpus, diag_spec, epoch_margin, epoch + 1, config.seed));
  }
  return result;
}

double training_accuracy(const ToyModel& model, const Corpus& corpus) {
  check_corpus(corpus);
  int correct = 0;
  for (const Utterance& utt : corpus.utterances) {
    const auto emb = forward_embed(model, utt.frames);
    const auto cos = class_cosines(model, emb);
    const auto best = std::max_element(cos.begin(), cos.end());
    if (static_cast<int>(best - cos.begin()) == utt.label) ++correct;
  }
  return static_cast<double>(correct) / corpus.num_utterances();
}

std::vector<std::vector<double>> embed_corpus(const ToyModel& model,
                                              const Corpus& corpus) {
  std::vector<std::vector<double>> out;
  out.reserve(corpus.utterances.size());
  for (const Utterance& utt : corpus.utterances)
    out.push_back(forward_embed(model, utt.frames));
  return out;
}

}  // namespace circlelab
