#ifndef CIRCLELAB_METRICS_HPP_
#define CIRCLELAB_METRICS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace circlelab {

// One scored verification trial.
struct TrialScore {
  double score = 0.0;
  bool is_target = false;
};

// Detection-cost parameters. The cost of a miss is weighted by the target
// prior, the cost of a false acceptance by the non-target prior.
struct DcfSpec {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;

  void validate() const;  // ConfigError
};

// An (enrollment, test) utterance pair with its ground-truth label.
struct Trial {
  std::string enroll_id;
  std::string test_id;
  bool is_target = false;
};

struct EerResult {
  double eer = 0.0;  // fraction, not percent
  double threshold = 0.0;
};

struct DcfResult {
  double min_dcf = 0.0;  // normalized
  double threshold = 0.0;
};

struct Histogram {
  std::vector<double> edges;         // bin_count + 1, uniform over [-1, 1]
  std::vector<std::int64_t> counts;  // bin_count
};

// Dot product of two unit vectors. Throws DomainError when the sizes
// differ or either norm deviates from 1 by more than 1e-6.
double cosine_score(std::span<const double> e1, std::span<const double> e2);

// Equal error rate: sweep every distinct score as an accept-if->=-threshold
// operating point (score ties move together), then linearly interpolate
// between the two adjacent points where the miss and false-acceptance
// curves cross. Throws DomainError unless both classes are present.
EerResult compute_eer(std::span<const TrialScore> trials);

// Minimum over the same threshold sweep of
//   c_miss * P_miss * p_target + c_fa * P_fa * (1 - p_target),
// normalized by the better of the two trivial systems,
// min(c_miss * p_target, c_fa * (1 - p_target)). Always <= 1.
DcfResult compute_min_dcf(std::span<const TrialScore> trials, const DcfSpec& spec);

// Cosine-scores each trial against the embedding table, order-preserving.
// Throws ConfigError naming the first id without an embedding.
std::vector<TrialScore> score_trials(
    const std::map<std::string, std::vector<double>>& embeddings,
    const std::vector<Trial>& trials);

// Uniform-bin histogram over [-1, 1]. Every bin is closed on the left and
// open on the right except the last, which is closed on both ends; scores
// outside [-1, 1] land in the end bins. Counts sum to the sample count.
Histogram similarity_histogram(std::span<const double> scores, int bin_count);

}  // namespace circlelab

#endif  // CIRCLELAB_METRICS_HPP_
