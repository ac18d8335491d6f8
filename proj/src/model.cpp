#include "circlelab/model.hpp"

#include <cmath>

#include "circlelab/errors.hpp"
#include "circlelab/rng.hpp"
#include "model_internal.hpp"

namespace circlelab {

namespace {
constexpr std::uint64_t kTagInit = 0x6d6f64656cull;

double activate(double x, Activation act) {
  return act == Activation::kTanh ? std::tanh(x) : x;
}

// Derivative expressed through the activation output.
double activate_deriv(double y, Activation act) {
  return act == Activation::kTanh ? 1.0 - y * y : 1.0;
}
}  // namespace

std::size_t ToyModel::num_parameters() const {
  std::size_t n = embed.data.size() + classifier.data.size();
  for (const auto& h : hidden) n += h.data.size();
  return n;
}

ModelGrad ModelGrad::zeros_like(const ToyModel& model) {
  ModelGrad g;
  g.hidden.reserve(model.hidden.size());
  for (const auto& h : model.hidden) g.hidden.emplace_back(h.rows, h.cols);
  g.embed = Matrix(model.embed.rows, model.embed.cols);
  g.classifier = Matrix(model.classifier.rows, model.classifier.cols);
  return g;
}

void ModelGrad::set_zero() {
  for (auto& h : hidden) h.set_zero();
  embed.set_zero();
  classifier.set_zero();
}

ToyModel init_model(int frame_dim, const std::vector<int>& hidden_dims,
                    int embedding_dim, int num_classes, Activation activation,
                    std::uint64_t seed) {
  if (frame_dim < 1 || embedding_dim < 1 || num_classes < 2 || hidden_dims.empty())
    throw ConfigError("invalid model dimensions");
  for (int h : hidden_dims)
    if (h < 1) throw ConfigError("hidden width must be >= 1");

  ToyModel model;
  model.frame_dim = frame_dim;
  model.hidden_dims = hidden_dims;
  model.embedding_dim = embedding_dim;
  model.num_classes = num_classes;
  model.activation = activation;

  Rng rng(mix_seed(seed, kTagInit));
  auto fill = [&rng](Matrix& w) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols));
    for (auto& v : w.data) v = scale * rng.normal();
  };

  int prev = frame_dim;
  for (int width : hidden_dims) {
    model.hidden.emplace_back(width, prev);
    fill(model.hidden.back());
    prev = width;
  }
  model.embed = Matrix(embedding_dim, prev);
  fill(model.embed);
  model.classifier = Matrix(num_classes, embedding_dim);
  for (auto& v : model.classifier.data) v = rng.normal();
  renormalize_classifier(model);
  return model;
}

std::vector<double> forward_embed(const ToyModel& model,
                                  std::span<const double> chunk) {
  const int num_frames = static_cast<int>(chunk.size()) / model.frame_dim;
  if (num_frames < 1 || chunk.empty()) throw DomainError("empty chunk");

  const int last_width = model.hidden_dims.back();
  std::vector<double> pooled(static_cast<std::size_t>(last_width), 0.0);
  std::vector<double> buf_a, buf_b;
  for (int t = 0; t < num_frames; ++t) {
    auto frame = chunk.subspan(static_cast<std::size_t>(t) * model.frame_dim,
                               static_cast<std::size_t>(model.frame_dim));
    buf_a.assign(frame.begin(), frame.end());
    for (const auto& w : model.hidden) {
      buf_b.resize(static_cast<std::size_t>(w.rows));
      matvec(w, buf_a, buf_b);
      for (auto& v : buf_b) v = activate(v, model.activation);
      buf_a.swap(buf_b);
    }
    for (int i = 0; i < last_width; ++i) pooled[static_cast<std::size_t>(i)] += buf_a[static_cast<std::size_t>(i)];
  }
  const double inv_frames = 1.0 / static_cast<double>(num_frames);
  for (auto& v : pooled) v *= inv_frames;

  std::vector<double> raw(static_cast<std::size_t>(model.embedding_dim));
  matvec(model.embed, pooled, raw);
  const double nrm = std::sqrt(norm2(raw));
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw NumericalError("degenerate embedding norm");
  for (auto& v : raw) v /= nrm;
  return raw;
}

std::vector<double> class_cosines(const ToyModel& model,
                                  std::span<const double> embedding) {
  std::vector<double> cos(static_cast<std::size_t>(model.num_classes));
  matvec(model.classifier, embedding, cos);
  return cos;
}

void renormalize_classifier(ToyModel& model) {
  for (int c = 0; c < model.classifier.rows; ++c) {
    auto row = model.classifier.row(c);
    const double nrm = std::sqrt(norm2(row));
    if (!(nrm > 0.0) || !std::isfinite(nrm))
      throw NumericalError("degenerate classifier row norm");
    for (auto& v : row) v /= nrm;
  }
}

namespace detail {

ForwardTrace forward_trace(const ToyModel& model, std::span<const double> chunk) {
  const int num_frames = static_cast<int>(chunk.size()) / model.frame_dim;
  if (num_frames < 1 || chunk.empty()) throw DomainError("empty chunk");

  ForwardTrace trace;
  trace.num_frames = num_frames;
  trace.acts.resize(model.hidden.size());
  for (auto& layer : trace.acts) layer.resize(static_cast<std::size_t>(num_frames));

  const int last_width = model.hidden_dims.back();
  trace.pooled.assign(static_cast<std::size_t>(last_width), 0.0);
  std::vector<double> buf;
  for (int t = 0; t < num_frames; ++t) {
    auto frame = chunk.subspan(static_cast<std::size_t>(t) * model.frame_dim,
                               static_cast<std::size_t>(model.frame_dim));
    std::vector<double> cur(frame.begin(), frame.end());
    for (std::size_t l = 0; l < model.hidden.size(); ++l) {
      const Matrix& w = model.hidden[l];
      buf.resize(static_cast<std::size_t>(w.rows));
      matvec(w, cur, buf);
      for (auto& v : buf) v = activate(v, model.activation);
      trace.acts[l][static_cast<std::size_t>(t)] = buf;
      cur = buf;
    }
    for (int i = 0; i < last_width; ++i) trace.pooled[static_cast<std::size_t>(i)] += cur[static_cast<std::size_t>(i)];
  }
  const double inv_frames = 1.0 / static_cast<double>(num_frames);
  for (auto& v : trace.pooled) v *= inv_frames;

  trace.raw.resize(static_cast<std::size_t>(model.embedding_dim));
  matvec(model.embed, trace.pooled, trace.raw);
  trace.raw_norm = std::sqrt(norm2(trace.raw));
  if (!(trace.raw_norm > 0.0) || !std::isfinite(trace.raw_norm))
    throw NumericalError("degenerate embedding norm");
  trace.embedding = trace.raw;
  for (auto& v : trace.embedding) v /= trace.raw_norm;
  return trace;
}

// Accumulates dL/dweights for one chunk into grad given dL/dembedding.
// Mirrors forward_trace exactly: normalization, linear projection, mean
// pooling, per-frame hidden layers.
void backward_from_embedding(const ToyModel& model, std::span<const double> chunk,
                             const ForwardTrace& trace,
                             std::span<const double> d_embedding,
                             ModelGrad& grad) {
  // Through length normalization: d_raw = (d_e - (d_e . e) e) / |raw|.
  const double proj = dot(d_embedding, trace.embedding);
  std::vector<double> d_raw(static_cast<std::size_t>(model.embedding_dim));
  for (int i = 0; i < model.embedding_dim; ++i) {
    d_raw[static_cast<std::size_t>(i)] =
        (d_embedding[static_cast<std::size_t>(i)] - proj * trace.embedding[static_cast<std::size_t>(i)]) /
        trace.raw_norm;
  }

  add_outer(grad.embed, d_raw, trace.pooled, 1.0);
  std::vector<double> d_pooled(trace.pooled.size());
  matvec_t(model.embed, d_raw, d_pooled);

  const double inv_frames = 1.0 / static_cast<double>(trace.num_frames);
  std::vector<double> d_act, d_prev;
  for (int t = 0; t < trace.num_frames; ++t) {
    // Mean pooling distributes the gradient evenly over frames.
    d_act.resize(d_pooled.size());
    for (std::size_t i = 0; i < d_pooled.size(); ++i) d_act[i] = d_pooled[i] * inv_frames;

    for (int l = static_cast<int>(model.hidden.size()) - 1; l >= 0; --l) {
      const Matrix& w = model.hidden[static_cast<std::size_t>(l)];
      const auto& out = trace.acts[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < d_act.size(); ++i)
        d_act[i] *= activate_deriv(out[i], model.activation);

      std::span<const double> input;
      std::vector<double> frame_copy;
      if (l == 0) {
        input = chunk.subspan(static_cast<std::size_t>(t) * model.frame_dim,
                              static_cast<std::size_t>(model.frame_dim));
      } else {
        input = trace.acts[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(t)];
      }
      add_outer(grad.hidden[static_cast<std::size_t>(l)], d_act, input, 1.0);
      d_prev.resize(static_cast<std::size_t>(w.cols));
      matvec_t(w, d_act, d_prev);
      d_act.swap(d_prev);
    }
  }
}

}  // namespace detail

}  // namespace circlelab
