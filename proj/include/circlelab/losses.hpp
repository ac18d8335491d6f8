#ifndef CIRCLELAB_LOSSES_HPP_
#define CIRCLELAB_LOSSES_HPP_

#include <span>
#include <vector>

namespace circlelab {

enum class LossVariant { kSoftmax, kAngularSoftmax, kCircleLoss };

// Which loss to compute plus its hyperparameters. The variant determines
// which margin fields are read; the others are ignored.
//
//   kSoftmax        reads s                  (cross-entropy on s*cos)
//   kAngularSoftmax reads s, m1, m2, m3      (target logit s*(cos(m1*theta+m2)-m3))
//   kCircleLoss     reads s, m               (self-paced similarity weighting)
struct LossSpec {
  LossVariant variant = LossVariant::kSoftmax;
  double s = 30.0;   // scale on cosine logits, > 0
  double m1 = 1.0;   // angular multiplier, >= 1
  double m2 = 0.0;   // additive angle margin, in [0, 1)
  double m3 = 0.0;   // additive cosine margin, in [0, 1)
  double m = 0.40;   // circle margin, in (0, 1)

  // Throws ConfigError if a field read by the active variant is out of range.
  void validate() const;
};

// One sample's cosine similarities: s_p to its own class, s_n to each of the
// C-1 other classes.
struct SimilarityState {
  double s_p = 0.0;
  std::vector<double> s_n;

  int num_classes() const { return static_cast<int>(s_n.size()) + 1; }
  // Range check with tolerance 1e-12; throws DomainError.
  void validate() const;
};

// Gradient pair of a toy-scenario loss in the convention the closed forms
// are stated in: g_p = -dL/ds_p (the descent magnitude toward the s_p
// optimum) and g_n = +dL/ds_n. Both are >= 0 on the usual domain
// (s_p <= 1, s_n >= 0), and equal for the additive-margin softmax.
struct GradPair {
  double g_p = 0.0;
  double g_n = 0.0;
};

// Self-paced weights and the optima/margins that generate them.
struct CircleInternals {
  double alpha_p = 0.0;
  std::vector<double> alpha_n;
  double o_p = 0.0, o_n = 0.0;
  double delta_p = 0.0, delta_n = 0.0;
};

// Cross-entropy -log softmax(logits)[label], max-subtracted. Mean over a
// batch is the caller's job.
double softmax_loss(std::span<const double> logits, int label);

// Angular-family loss on angles. The target logit is
// s * (cos(m1*theta_p + m2) - m3), negatives are s * cos(theta).
// All angles must lie in [0, pi].
double angular_softmax_loss(double theta_p, std::span<const double> theta_n,
                            const LossSpec& spec);

// Additive-margin softmax collapsed to a single positive and a single
// negative similarity with C-1 identical negative terms. Reads spec.s and
// spec.m3 as the margin. Similarities are typically in [0, 1] but any value
// in [-1, 1] is accepted; see toy_outside_typical_range().
double amsoftmax_toy_loss(double s_p, double s_n, const LossSpec& spec,
                          int num_classes);

// Closed-form gradients of amsoftmax_toy_loss. g_p and g_n are computed from
// the identical expression s*(C-1)/(exp(s*(s_p-s_n-m)) + C-1) and so are
// equal bit for bit; both depend on the similarities only through s_p - s_n.
GradPair amsoftmax_toy_grad(double s_p, double s_n, const LossSpec& spec,
                            int num_classes);

// Circle loss in reduced form: target logit s*(m^2 - (1-s_p)^2), negative
// logits s*(s_n^2 - m^2). The decision boundary is the circular arc
// (1-s_p)^2 + s_n^2 = 2 m^2.
double circle_loss(const SimilarityState& state, const LossSpec& spec);

// Circle loss with explicit optima and margins:
//   target logit   s * alpha_p * (s_p - delta_p),   alpha_p = o_p - s_p
//   negative logit s * alpha_n * (s_n - delta_n),   alpha_n = s_n - o_n
// Each weight measures how far the similarity still is from its optimum.
// With o_p = 1+m, o_n = -m, delta_p = 1-m, delta_n = m this reduces exactly
// to circle_loss. No clipping is applied to the weights.
double circle_loss_general(const SimilarityState& state, double o_p, double o_n,
                           double delta_p, double delta_n, double s);

// The self-paced weights used by circle_loss_general, for inspection.
CircleInternals circle_internals(const SimilarityState& state, double o_p,
                                 double o_n, double delta_p, double delta_n);

// Closed-form gradients of the reduced circle loss in the toy scenario.
// g_p carries the factor 2*s*(1-s_p) and g_n the factor 2*s*s_n, so each
// vanishes exactly when its similarity reaches its optimum.
GradPair circle_toy_grad(double s_p, double s_n, const LossSpec& spec,
                         int num_classes);

// True when a toy similarity pair leaves the typical [0, 1] range the toy
// analysis assumes. Advisory only; callers decide whether to warn.
bool toy_outside_typical_range(double s_p, double s_n);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> d_cos;  // dL/d cos_j, one per class
};

// Loss of the selected variant on a full cosine vector plus its analytic
// gradient with respect to every cosine. For the angular variant the
// target-cosine derivative goes through theta = arccos(cos); the arccos
// input of the derivative factor is clamped to |cos| <= 1 - 1e-7 to keep it
// finite at the endpoint singularity (the forward value is not clamped
// beyond [-1, 1]).
LossAndGrad classification_loss_grad(std::span<const double> cosines, int label,
                                     const LossSpec& spec);

// log(sum_i exp(x[i])) with max subtraction.
double log_sum_exp(std::span<const double> x);

}  // namespace circlelab

#endif  // CIRCLELAB_LOSSES_HPP_
