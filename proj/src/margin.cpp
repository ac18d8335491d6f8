#include "circlelab/margin.hpp"

#include <string>

#include "circlelab/errors.hpp"

namespace circlelab {

void StageSchedule::validate() const {
  if (margins.empty()) throw ConfigError("stage schedule is empty");
  double prev = 1.0;
  for (double m : margins) {
    if (!(m > 0.0 && m < 1.0))
      throw ConfigError("stage margin " + std::to_string(m) + " outside (0, 1)");
    if (m > prev + 1e-15) throw ConfigError("stage margins must be non-increasing");
    prev = m;
  }
}

void ChunkMarginSpec::validate() const {
  if (!(m0 > 0.0 && m0 < 1.0)) throw ConfigError("chunk margin m0 must be in (0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
  if (l_min >= l_max) throw ConfigError("chunk interval needs l_min < l_max");
  if (l_min < 1) throw ConfigError("l_min must be >= 1");
}

double stage_margin(const StageSchedule& schedule, int stage) {
  schedule.validate();
  if (stage < 0 || stage >= schedule.num_stages())
    throw ConfigError("stage " + std::to_string(stage) + " outside schedule of " +
                      std::to_string(schedule.num_stages()) + " stages");
  return schedule.margins[static_cast<std::size_t>(stage)];
}

double chunk_margin(const ChunkMarginSpec& spec, int chunk_width) {
  spec.validate();
  if (chunk_width < spec.l_min || chunk_width > spec.l_max)
    throw DomainError("chunk width " + std::to_string(chunk_width) + " outside [" +
                      std::to_string(spec.l_min) + ", " + std::to_string(spec.l_max) + "]");
  const double frac = static_cast<double>(chunk_width - spec.l_min) /
                      static_cast<double>(spec.l_max - spec.l_min);
  return (1.0 - spec.lambda * frac) * spec.m0;
}

int stage_for_epoch(int epoch, int total_epochs, int num_stages) {
  if (num_stages < 1) throw ConfigError("need at least one stage");
  if (total_epochs < 1) throw ConfigError("need at least one epoch");
  if (epoch < 0 || epoch >= total_epochs)
    throw ConfigError("epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(total_epochs) + ")");
  const long long stage =
      static_cast<long long>(epoch) * num_stages / total_epochs;
  const int last = num_stages - 1;
  return stage > last ? last : static_cast<int>(stage);
}

}  // namespace circlelab
