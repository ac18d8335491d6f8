#ifndef CIRCLELAB_EXPORT_HPP_
#define CIRCLELAB_EXPORT_HPP_

#include <span>
#include <string>

#include "circlelab/losses.hpp"
#include "circlelab/metrics.hpp"
#include "circlelab/train.hpp"

namespace circlelab {

// Grid export of the toy-scenario gradients over [0,1]^2. Supported losses:
// circle loss, and the additive-margin softmax family (requires m1 = 1,
// m2 = 0; plain softmax is the m3 = 0 case). num_classes feeds the same
// C-dependent softmax tail the toy gradients use.
struct GradFieldSpec {
  LossSpec loss;
  int resolution = 101;   // grid points per axis, >= 2
  int num_classes = 5994;

  void validate() const;  // ConfigError
};

// Writes `s_p,s_n,dL_dsp,dL_dsn` rows over the uniform grid, s_p-major.
// The two gradient columns hold the per-axis gradient magnitudes (each
// pushing its similarity toward its optimum), matching GradPair.
void write_grad_field_csv(const std::string& path, const GradFieldSpec& spec);

// Writes `epoch,s_p_mean,s_n_mean,r_mean,loss,margin` rows.
void write_diagnostics_csv(const std::string& path,
                           std::span<const EpochDiagnostics> diagnostics);

// Writes `bin_lo,bin_hi,count` rows.
void write_histogram_csv(const std::string& path, const Histogram& histogram);

// Shortest 17-significant-digit decimal form; round-trips any double.
std::string format_g17(double v);

}  // namespace circlelab

#endif  // CIRCLELAB_EXPORT_HPP_
