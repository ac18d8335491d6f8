#include "circlelab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

constexpr double kSimTol = 1e-12;        // slack on |cos| <= 1 for states
constexpr double kCosineTol = 1e-9;      // slack for cosines from unit vectors
constexpr double kArccosClamp = 1e-7;    // derivative clamp near |cos| = 1

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite ") + name);
}

void check_similarity(double v, const char* name, double tol) {
  check_finite(v, name);
  if (v < -1.0 - tol || v > 1.0 + tol)
    throw DomainError(std::string(name) + " outside [-1, 1]: " + std::to_string(v));
}

void check_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("scale s must be > 0");
}

void check_angular_margins(const LossSpec& spec) {
  check_scale(spec.s);
  if (!(spec.m1 >= 1.0)) throw ConfigError("m1 must be >= 1");
  if (!(spec.m2 >= 0.0 && spec.m2 < 1.0)) throw ConfigError("m2 must be in [0, 1)");
  if (!(spec.m3 >= 0.0 && spec.m3 < 1.0)) throw ConfigError("m3 must be in [0, 1)");
}

void check_circle_margin(const LossSpec& spec) {
  check_scale(spec.s);
  if (!(spec.m > 0.0 && spec.m < 1.0)) throw ConfigError("circle margin m must be in (0, 1)");
}

// sigma(t; C) = (C-1) / (exp(t) + C-1), evaluated without overflow for any t.
double softmax_tail(double t, int num_classes) {
  const double cm1 = static_cast<double>(num_classes - 1);
  if (t <= 0.0) return cm1 / (std::exp(t) + cm1);
  // exp(t) may overflow; divide through by it instead.
  const double e = std::exp(-t);
  return cm1 * e / (1.0 + cm1 * e);
}

void check_toy_inputs(double s_p, double s_n, int num_classes) {
  if (num_classes < 2) throw DomainError("toy scenario needs at least 2 classes");
  check_similarity(s_p, "s_p", kSimTol);
  check_similarity(s_n, "s_n", kSimTol);
}

}  // namespace

void LossSpec::validate() const {
  switch (variant) {
    case LossVariant::kSoftmax:
      check_scale(s);
      break;
    case LossVariant::kAngularSoftmax:
      check_angular_margins(*this);
      break;
    case LossVariant::kCircleLoss:
      check_circle_margin(*this);
      break;
  }
}

void SimilarityState::validate() const {
  check_similarity(s_p, "s_p", kSimTol);
  if (s_n.empty()) throw DomainError("similarity state needs at least one negative class");
  for (double v : s_n) check_similarity(v, "s_n entry", kSimTol);
}

double log_sum_exp(std::span<const double> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

double softmax_loss(std::span<const double> logits, int label) {
  if (logits.empty()) throw DomainError("empty logit vector");
  if (label < 0 || label >= static_cast<int>(logits.size()))
    throw DomainError("label " + std::to_string(label) + " out of range");
  for (double z : logits) check_finite(z, "logit");
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

double angular_softmax_loss(double theta_p, std::span<const double> theta_n,
                            const LossSpec& spec) {
  if (spec.variant != LossVariant::kAngularSoftmax)
    throw ConfigError("angular_softmax_loss needs the angular variant");
  check_angular_margins(spec);
  const double pi = std::acos(-1.0);
  auto check_theta = [pi](double th) {
    check_finite(th, "theta");
    if (th < 0.0 || th > pi) throw DomainError("theta outside [0, pi]: " + std::to_string(th));
  };
  check_theta(theta_p);
  for (double th : theta_n) check_theta(th);

  std::vector<double> logits;
  logits.reserve(theta_n.size() + 1);
  const double psi = std::cos(spec.m1 * theta_p + spec.m2) - spec.m3;
  logits.push_back(spec.s * psi);
  for (double th : theta_n) logits.push_back(spec.s * std::cos(th));
  return softmax_loss(logits, 0);
}

double amsoftmax_toy_loss(double s_p, double s_n, const LossSpec& spec,
                          int num_classes) {
  if (spec.variant != LossVariant::kAngularSoftmax)
    throw ConfigError("amsoftmax_toy_loss needs the angular variant");
  check_angular_margins(spec);
  check_toy_inputs(s_p, s_n, num_classes);
  // -log( e^{z_p} / (e^{z_p} + (C-1) e^{z_n}) )   via a 2-term lse
  const double z_p = spec.s * (s_p - spec.m3);
  const double z_n = spec.s * s_n + std::log(static_cast<double>(num_classes - 1));
  const double logits[2] = {z_p, z_n};
  return log_sum_exp(logits) - z_p;
}

GradPair amsoftmax_toy_grad(double s_p, double s_n, const LossSpec& spec,
                            int num_classes) {
  if (spec.variant != LossVariant::kAngularSoftmax)
    throw ConfigError("amsoftmax_toy_grad needs the angular variant");
  check_angular_margins(spec);
  check_toy_inputs(s_p, s_n, num_classes);
  const double t = spec.s * (s_p - s_n - spec.m3);
  const double g = spec.s * softmax_tail(t, num_classes);
  return GradPair{g, g};
}

double circle_loss(const SimilarityState& state, const LossSpec& spec) {
  if (spec.variant != LossVariant::kCircleLoss)
    throw ConfigError("circle_loss needs the circle variant");
  check_circle_margin(spec);
  state.validate();
  const double m2 = spec.m * spec.m;
  std::vector<double> logits;
  logits.reserve(state.s_n.size() + 1);
  const double dp = 1.0 - state.s_p;
  logits.push_back(spec.s * (m2 - dp * dp));
  for (double sn : state.s_n) logits.push_back(spec.s * (sn * sn - m2));
  return softmax_loss(logits, 0);
}

CircleInternals circle_internals(const SimilarityState& state, double o_p,
                                 double o_n, double delta_p, double delta_n) {
  state.validate();
  CircleInternals out;
  out.o_p = o_p;
  out.o_n = o_n;
  out.delta_p = delta_p;
  out.delta_n = delta_n;
  out.alpha_p = o_p - state.s_p;
  out.alpha_n.reserve(state.s_n.size());
  for (double sn : state.s_n) out.alpha_n.push_back(sn - o_n);
  return out;
}

double circle_loss_general(const SimilarityState& state, double o_p, double o_n,
                           double delta_p, double delta_n, double s) {
  check_scale(s);
  const CircleInternals in = circle_internals(state, o_p, o_n, delta_p, delta_n);
  std::vector<double> logits;
  logits.reserve(state.s_n.size() + 1);
  logits.push_back(s * in.alpha_p * (state.s_p - delta_p));
  for (std::size_t j = 0; j < state.s_n.size(); ++j)
    logits.push_back(s * in.alpha_n[j] * (state.s_n[j] - delta_n));
  return softmax_loss(logits, 0);
}

GradPair circle_toy_grad(double s_p, double s_n, const LossSpec& spec,
                         int num_classes) {
  if (spec.variant != LossVariant::kCircleLoss)
    throw ConfigError("circle_toy_grad needs the circle variant");
  check_circle_margin(spec);
  check_toy_inputs(s_p, s_n, num_classes);
  const double dp = 1.0 - s_p;
  const double t = spec.s * (2.0 * spec.m * spec.m - dp * dp - s_n * s_n);
  const double sigma = softmax_tail(t, num_classes);
  return GradPair{sigma * 2.0 * spec.s * dp, sigma * 2.0 * spec.s * s_n};
}

bool toy_outside_typical_range(double s_p, double s_n) {
  return s_p < 0.0 || s_p > 1.0 || s_n < 0.0 || s_n > 1.0;
}

LossAndGrad classification_loss_grad(std::span<const double> cosines, int label,
                                     const LossSpec& spec) {
  spec.validate();
  const int num_classes = static_cast<int>(cosines.size());
  if (num_classes < 2) throw DomainError("need at least 2 classes");
  if (label < 0 || label >= num_classes)
    throw DomainError("label " + std::to_string(label) + " out of range");
  for (double u : cosines) check_similarity(u, "cosine", kCosineTol);

  // Per-class logit z_j and its derivative dz_j/dcos_j.
  std::vector<double> z(cosines.size()), dz(cosines.size());
  for (int j = 0; j < num_classes; ++j) {
    const double u = cosines[static_cast<std::size_t>(j)];
    switch (spec.variant) {
      case LossVariant::kSoftmax:
        z[static_cast<std::size_t>(j)] = spec.s * u;
        dz[static_cast<std::size_t>(j)] = spec.s;
        break;
      case LossVariant::kAngularSoftmax:
        if (j == label) {
          const double theta = std::acos(std::clamp(u, -1.0, 1.0));
          z[static_cast<std::size_t>(j)] =
              spec.s * (std::cos(spec.m1 * theta + spec.m2) - spec.m3);
          // d/du cos(m1*arccos(u) + m2) = m1 * sin(m1*theta + m2) / sin(theta);
          // the arccos input is clamped away from +-1 for this factor only.
          const double uc = std::clamp(u, -1.0 + kArccosClamp, 1.0 - kArccosClamp);
          const double theta_c = std::acos(uc);
          dz[static_cast<std::size_t>(j)] =
              spec.s * spec.m1 * std::sin(spec.m1 * theta_c + spec.m2) / std::sin(theta_c);
        } else {
          z[static_cast<std::size_t>(j)] = spec.s * u;
          dz[static_cast<std::size_t>(j)] = spec.s;
        }
        break;
      case LossVariant::kCircleLoss:
        if (j == label) {
          const double dp = 1.0 - u;
          z[static_cast<std::size_t>(j)] = spec.s * (spec.m * spec.m - dp * dp);
          dz[static_cast<std::size_t>(j)] = 2.0 * spec.s * dp;
        } else {
          z[static_cast<std::size_t>(j)] = spec.s * (u * u - spec.m * spec.m);
          dz[static_cast<std::size_t>(j)] = 2.0 * spec.s * u;
        }
        break;
    }
  }

  const double lse = log_sum_exp(z);
  LossAndGrad out;
  out.loss = lse - z[static_cast<std::size_t>(label)];
  out.d_cos.resize(cosines.size());
  for (int j = 0; j < num_classes; ++j) {
    const double p = std::exp(z[static_cast<std::size_t>(j)] - lse);
    const double indicator = (j == label) ? 1.0 : 0.0;
    out.d_cos[static_cast<std::size_t>(j)] = (p - indicator) * dz[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace circlelab
