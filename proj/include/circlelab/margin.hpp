#ifndef CIRCLELAB_MARGIN_HPP_
#define CIRCLELAB_MARGIN_HPP_

#include <vector>

namespace circlelab {

// Margin per training stage. Margins start large and never increase, so the
// constraint tightens as training progresses. The current stage is owned by
// the training loop; this type only stores the plan.
struct StageSchedule {
  std::vector<double> margins;  // index = stage

  int num_stages() const { return static_cast<int>(margins.size()); }
  // Throws ConfigError: non-empty, all in (0, 1), non-increasing.
  void validate() const;
};

// Margin as a function of the sampled chunk width L on [l_min, l_max]:
//   m(L) = (1 - lambda * (L - l_min) / (l_max - l_min)) * m0
// Shorter chunks are harder samples and get the full margin m0; at l_max the
// margin bottoms out at (1 - lambda) * m0.
struct ChunkMarginSpec {
  double m0 = 0.40;
  double lambda = 0.25;  // strength, in [0, 1]
  int l_min = 0;
  int l_max = 0;

  void validate() const;  // ConfigError
};

// Margin for the given stage. Throws ConfigError when the stage index is
// outside the schedule.
double stage_margin(const StageSchedule& schedule, int stage);

// Exact evaluation of the chunk-width margin. Throws DomainError when the
// width lies outside [l_min, l_max].
double chunk_margin(const ChunkMarginSpec& spec, int chunk_width);

// Fixed-boundary stage mapping: total_epochs split into num_stages equal
// parts (as equal as integer division allows), earlier stages first.
int stage_for_epoch(int epoch, int total_epochs, int num_stages);

}  // namespace circlelab

#endif  // CIRCLELAB_MARGIN_HPP_
