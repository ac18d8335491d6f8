#include "circlelab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "circlelab/errors.hpp"
#include "circlelab/matrix.hpp"

namespace circlelab {

namespace {

constexpr double kUnitNormTol = 1e-6;

// One accept-if-score>=threshold operating point.
struct RocPoint {
  double threshold = 0.0;
  double p_miss = 0.0;
  double p_fa = 0.0;
};

// Operating points in threshold order: one per distinct score plus a final
// reject-everything point. P_miss rises from 0 to 1 while P_fa falls from
// 1 to 0, so p_miss - p_fa is non-decreasing along the sweep.
std::vector<RocPoint> roc_sweep(std::span<const TrialScore> trials) {
  std::int64_t num_target = 0, num_nontarget = 0;
  for (const TrialScore& t : trials) {
    if (!std::isfinite(t.score)) throw DomainError("non-finite trial score");
    (t.is_target ? num_target : num_nontarget) += 1;
  }
  if (num_target == 0 || num_nontarget == 0)
    throw DomainError("need at least one target and one non-target trial");

  std::vector<TrialScore> sorted(trials.begin(), trials.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const TrialScore& a, const TrialScore& b) { return a.score < b.score; });

  std::vector<RocPoint> points;
  std::int64_t targets_below = 0, nontargets_below = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    // Everything with score < sorted[i].score is rejected at this point.
    points.push_back({sorted[i].score,
                      static_cast<double>(targets_below) / num_target,
                      1.0 - static_cast<double>(nontargets_below) / num_nontarget});
    const double s = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == s) {
      (sorted[i].is_target ? targets_below : nontargets_below) += 1;
      ++i;
    }
  }
  points.push_back({sorted.back().score + 1.0, 1.0, 0.0});
  return points;
}

}  // namespace

void DcfSpec::validate() const {
  if (!(p_target > 0.0 && p_target < 1.0))
    throw ConfigError("dcf p_target must lie in (0, 1)");
  if (!(c_miss > 0.0) || !(c_fa > 0.0))
    throw ConfigError("dcf costs must be > 0");
}

double cosine_score(std::span<const double> e1, std::span<const double> e2) {
  if (e1.size() != e2.size() || e1.empty())
    throw DomainError("embedding size mismatch");
  const double n1 = std::sqrt(norm2(e1));
  const double n2 = std::sqrt(norm2(e2));
  if (!(std::fabs(n1 - 1.0) <= kUnitNormTol) ||
      !(std::fabs(n2 - 1.0) <= kUnitNormTol))
    throw DomainError("cosine_score requires unit-norm embeddings");
  return dot(e1, e2);
}

EerResult compute_eer(std::span<const TrialScore> trials) {
  const std::vector<RocPoint> points = roc_sweep(trials);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = points[i].p_miss - points[i].p_fa;
    if (d == 0.0) return {points[i].p_miss, points[i].threshold};
    if (d > 0.0) {
      // First point past the crossing; interpolate back to the previous one.
      const RocPoint& lo = points[i - 1];  // d < 0 there (sweep starts at -1)
      const RocPoint& hi = points[i];
      const double d_lo = lo.p_miss - lo.p_fa;
      const double t = d_lo / (d_lo - d);
      return {lo.p_miss + t * (hi.p_miss - lo.p_miss),
              lo.threshold + t * (hi.threshold - lo.threshold)};
    }
  }
  throw DomainError("miss/false-acceptance curves never crossed");  // unreachable
}

DcfResult compute_min_dcf(std::span<const TrialScore> trials, const DcfSpec& spec) {
  spec.validate();
  const std::vector<RocPoint> points = roc_sweep(trials);
  const double normalizer =
      std::min(spec.c_miss * spec.p_target, spec.c_fa * (1.0 - spec.p_target));
  double best_raw = 0.0, best_threshold = 0.0;
  bool first = true;
  for (const RocPoint& p : points) {
    const double dcf = spec.c_miss * p.p_miss * spec.p_target +
                       spec.c_fa * p.p_fa * (1.0 - spec.p_target);
    if (first || dcf < best_raw) {
      best_raw = dcf;
      best_threshold = p.threshold;
      first = false;
    }
  }
  return {best_raw / normalizer, best_threshold};
}

std::vector<TrialScore> score_trials(
    const std::map<std::string, std::vector<double>>& embeddings,
    const std::vector<Trial>& trials) {
  std::vector<TrialScore> out;
  out.reserve(trials.size());
  for (const Trial& trial : trials) {
    const auto enroll = embeddings.find(trial.enroll_id);
    if (enroll == embeddings.end())
      throw ConfigError("no embedding for utterance id '" + trial.enroll_id + "'");
    const auto test = embeddings.find(trial.test_id);
    if (test == embeddings.end())
      throw ConfigError("no embedding for utterance id '" + trial.test_id + "'");
    out.push_back({cosine_score(enroll->second, test->second), trial.is_target});
  }
  return out;
}

Histogram similarity_histogram(std::span<const double> scores, int bin_count) {
  if (bin_count < 1) throw ConfigError("histogram needs at least one bin");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bin_count) + 1);
  for (int i = 0; i <= bin_count; ++i)
    h.edges[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / bin_count;
  h.counts.assign(static_cast<std::size_t>(bin_count), 0);
  for (double s : scores) {
    if (!std::isfinite(s)) throw DomainError("non-finite score in histogram");
    int bin = static_cast<int>(std::floor((s + 1.0) / 2.0 * bin_count));
    bin = std::clamp(bin, 0, bin_count - 1);
    h.counts[static_cast<std::size_t>(bin)] += 1;
  }
  return h;
}

}  // namespace circlelab
