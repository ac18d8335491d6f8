#include "circlelab/export.hpp"

#include <cstdio>
#include <fstream>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void check_write(const std::ofstream& out, const std::string& path) {
  if (!out) throw IoError("write failed for '" + path + "'");
}

GradPair toy_grad(double s_p, double s_n, const LossSpec& spec, int num_classes) {
  if (spec.variant == LossVariant::kCircleLoss)
    return circle_toy_grad(s_p, s_n, spec, num_classes);
  // Softmax is the zero-margin member of the additive-margin family.
  LossSpec am = spec;
  if (spec.variant == LossVariant::kSoftmax) {
    am.variant = LossVariant::kAngularSoftmax;
    am.m1 = 1.0;
    am.m2 = 0.0;
    am.m3 = 0.0;
  }
  return amsoftmax_toy_grad(s_p, s_n, am, num_classes);
}

}  // namespace

void GradFieldSpec::validate() const {
  loss.validate();
  if (resolution < 2) throw ConfigError("grad-field resolution must be >= 2");
  if (num_classes < 2) throw ConfigError("grad-field num_classes must be >= 2");
  if (loss.variant == LossVariant::kAngularSoftmax &&
      (loss.m1 != 1.0 || loss.m2 != 0.0))
    throw ConfigError(
        "grad-field supports the additive-margin family (m1=1, m2=0) "
        "and the circle loss");
}

void write_grad_field_csv(const std::string& path, const GradFieldSpec& spec) {
  spec.validate();
  std::ofstream out = open_out(path);
  out << "s_p,s_n,dL_dsp,dL_dsn\n";
  const int r = spec.resolution;
  for (int i = 0; i < r; ++i) {
    const double s_p = static_cast<double>(i) / (r - 1);
    for (int j = 0; j < r; ++j) {
      const double s_n = static_cast<double>(j) / (r - 1);
      const GradPair g = toy_grad(s_p, s_n, spec.loss, spec.num_classes);
      out << format_g17(s_p) << ',' << format_g17(s_n) << ','
          << format_g17(g.g_p) << ',' << format_g17(g.g_n) << '\n';
    }
  }
  out.flush();
  check_write(out, path);
}

void write_diagnostics_csv(const std::string& path,
                           std::span<const EpochDiagnostics> diagnostics) {
  std::ofstream out = open_out(path);
  out << "epoch,s_p_mean,s_n_mean,r_mean,loss,margin\n";
  for (const EpochDiagnostics& d : diagnostics)
    out << d.epoch << ',' << format_g17(d.s_p_mean) << ','
        << format_g17(d.s_n_mean) << ',' << format_g17(d.r_mean) << ','
        << format_g17(d.loss_mean) << ',' << format_g17(d.margin) << '\n';
  out.flush();
  check_write(out, path);
}

void write_histogram_csv(const std::string& path, const Histogram& histogram) {
  std::ofstream out = open_out(path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i)
    out << format_g17(histogram.edges[i]) << ',' << format_g17(histogram.edges[i + 1])
        << ',' << histogram.counts[i] << '\n';
  out.flush();
  check_write(out, path);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace circlelab
