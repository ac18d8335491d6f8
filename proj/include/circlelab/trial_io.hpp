#ifndef CIRCLELAB_TRIAL_IO_HPP_
#define CIRCLELAB_TRIAL_IO_HPP_

#include <span>
#include <string>
#include <vector>

#include "circlelab/metrics.hpp"

namespace circlelab {

// One line of a score file.
struct ScoredTrial {
  std::string enroll_id;
  std::string test_id;
  double score = 0.0;
};

// Trial list: one `enroll_id test_id {1|0}` line per trial, 1 = target.
// Throws IoError with the file name and line number on malformed input.
std::vector<Trial> read_trial_list(const std::string& path);
void write_trial_list(const std::string& path, std::span<const Trial> trials);

// Score file: one `enroll_id test_id score` line per trial, scores written
// with 17 significant digits (lossless double round-trip).
std::vector<ScoredTrial> read_score_file(const std::string& path);
void write_score_file(const std::string& path, std::span<const ScoredTrial> scores);

}  // namespace circlelab

#endif  // CIRCLELAB_TRIAL_IO_HPP_
