#ifndef CIRCLELAB_CONFIG_HPP_
#define CIRCLELAB_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "circlelab/corpus.hpp"
#include "circlelab/metrics.hpp"
#include "circlelab/train.hpp"

namespace circlelab {

// Held-out evaluation settings. The eval corpus reuses the training
// frame_dim (the model's input width) and is generated without label noise;
// trial ground truth comes from the generating speaker.
struct EvalSpec {
  int num_speakers = 20;
  int utterances_per_speaker = 10;
  int max_frames = 40;
  double within_speaker_noise = 0.6;
  std::uint64_t seed = 1000;
  std::string trials_path;  // empty: score all utterance pairs
  std::string model_path;   // empty: <output dir>/model.bin
  int hist_bins = 50;

  void validate() const;  // ConfigError
};

// Everything a run needs, parsed from a flat key=value file with dotted
// section prefixes (see parse_config_file).
struct RunConfig {
  SyntheticCorpusSpec corpus;
  TrainConfig train;
  EvalSpec eval;
  DcfSpec dcf;
  int grad_field_resolution = 101;
  int grad_field_num_classes = 5994;
  std::string output_dir = "out";

  void validate() const;
};

// Parses `key = value` lines ('#' starts a comment, blank lines ignored).
// Unknown or duplicate keys are rejected with the offending line number;
// every omitted key keeps its documented default. margin.m0 defaults to
// loss.m when left unset. Throws IoError (unreadable file) or ConfigError.
RunConfig parse_config_file(const std::string& path);

// Same grammar from an in-memory string; origin names the source in errors.
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// The --seed flag: replaces the training and corpus seeds (so one flag
// reseeds the whole training run) but leaves the held-out eval seed alone.
void apply_seed_override(RunConfig& config, std::uint64_t seed);

}  // namespace circlelab

#endif  // CIRCLELAB_CONFIG_HPP_
