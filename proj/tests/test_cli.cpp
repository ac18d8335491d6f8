// End-to-end command-line suite: drives the installed binary through
// subprocesses and cross-checks its outputs against direct library calls.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "circlelab/config.hpp"
#include "circlelab/corpus.hpp"
#include "circlelab/export.hpp"
#include "circlelab/losses.hpp"
#include "circlelab/margin.hpp"
#include "circlelab/metrics.hpp"
#include "circlelab/model_io.hpp"
#include "circlelab/train.hpp"
#include "circlelab/trial_io.hpp"
#include "test_support.hpp"

using namespace circlelab;
using testsupport::CommandResult;
using testsupport::run_command;
using testsupport::split_csv;
using testsupport::split_lines;

namespace {

std::string q(const std::string& s) { return "'" + s + "'"; }

// Small circle-loss recipe that trains in well under a second.
std::string base_config() {
  return "corpus.num_speakers = 6\n"
         "corpus.utterances_per_speaker = 4\n"
         "corpus.frame_dim = 8\n"
         "corpus.max_frames = 12\n"
         "corpus.within_speaker_noise = 0.3\n"
         "corpus.label_noise_rate = 0.0\n"
         "corpus.seed = 5\n"
         "model.hidden_dims = 10\n"
         "model.embedding_dim = 6\n"
         "loss.variant = circle\n"
         "loss.s = 60\n"
         "loss.m = 0.4\n"
         "train.epochs = 2\n"
         "train.batch_size = 8\n"
         "train.learning_rate = 0.05\n"
         "train.chunk_intervals = 4:6, 5:8, 6:10\n"
         "train.seed = 9\n"
         "eval.num_speakers = 4\n"
         "eval.utterances_per_speaker = 3\n"
         "eval.max_frames = 10\n"
         "eval.within_speaker_noise = 0.3\n"
         "eval.seed = 77\n"
         "eval.hist_bins = 10\n";
}

// Writes the base recipe with `extra` "key = value" lines applied on top.
// The config grammar rejects duplicate keys, so overrides of base keys
// replace the original line instead of being appended.
std::string write_config(const std::string& dir, const std::string& extra) {
  auto key_of = [](const std::string& line) {
    return line.substr(0, line.find(" ="));
  };
  std::vector<std::string> lines = split_lines(base_config());
  for (const std::string& line : split_lines(extra)) {
    bool replaced = false;
    for (std::string& existing : lines) {
      if (key_of(existing) == key_of(line)) {
        existing = line;
        replaced = true;
        break;
      }
    }
    if (!replaced) lines.push_back(line);
  }
  std::string text;
  for (const std::string& line : lines) text += line + "\n";
  const std::string path = dir + "/run.conf";
  testsupport::write_file(path, text);
  return path;
}

// Value of a "key = value" line printed by the binary.
std::string stdout_value(const std::string& output, const std::string& key) {
  for (const std::string& line : split_lines(output)) {
    const std::string prefix = key + " = ";
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  FAIL(("stdout line not found: " + key));
  return "";
}

std::vector<Trial> all_pairs(const Corpus& corpus) {
  std::vector<Trial> trials;
  for (int i = 0; i < corpus.num_utterances(); ++i)
    for (int j = i + 1; j < corpus.num_utterances(); ++j)
      trials.push_back({utterance_id(corpus, i), utterance_id(corpus, j),
                        corpus.utterances[static_cast<std::size_t>(i)].speaker ==
                            corpus.utterances[static_cast<std::size_t>(j)].speaker});
  return trials;
}

}  // namespace

TEST_CASE("help lists the four subcommands and exits cleanly") {
  const CommandResult r = run_command(testsupport::cli_path() + " --help");
  CHECK(r.exit_code == 0);
  for (const char* name : {"grad-field", "train", "eval", "margin-plan"})
    CHECK(r.output.find(name) != std::string::npos);
}

TEST_CASE("command-line misuse exits with the configuration code") {
  const std::string cli = testsupport::cli_path();
  CHECK(run_command(cli).exit_code == 1);                      // no subcommand
  CHECK(run_command(cli + " train --bogus").exit_code == 1);   // unknown flag
  CHECK(run_command(cli + " train --seed nope").exit_code == 1);
  CHECK(run_command(cli + " frobnicate").exit_code == 1);      // unknown command
}

TEST_CASE("a bad config key is a configuration error, a missing file an io error") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string bad = dir + "/bad.conf";
  testsupport::write_file(bad, "loss.variant = cosface\n");
  const CommandResult r =
      run_command(testsupport::cli_path() + " margin-plan --config " + q(bad));
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("config error:") != std::string::npos);

  const CommandResult missing = run_command(testsupport::cli_path() +
                                            " margin-plan --config " +
                                            q(dir + "/none.conf"));
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("io error:") != std::string::npos);
}

TEST_CASE("an uncreatable output directory is an io error") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "");
  const CommandResult r = run_command(testsupport::cli_path() +
                                      " grad-field --config " + q(conf) +
                                      " --out /dev/null/out");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("io error:") != std::string::npos);
}

TEST_CASE("a diverging run exits with the numerical-failure code") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir,
                                        "train.learning_rate = 1e12\n"
                                        "train.weight_decay = 1.0\n"
                                        "train.epochs = 12\n");
  const CommandResult r = run_command(testsupport::cli_path() + " train --config " +
                                      q(conf) + " --out " + q(dir + "/out"));
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("numerical error:") != std::string::npos);
}

TEST_CASE("grad-field writes the toy gradients of the configured loss") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir,
                                        "grad_field.resolution = 5\n"
                                        "grad_field.num_classes = 100\n");
  const std::string out = dir + "/out";
  const CommandResult r = run_command(testsupport::cli_path() +
                                      " grad-field --config " + q(conf) + " --out " +
                                      q(out));
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("wrote " + out + "/grad_field.csv (5x5 grid)") !=
        std::string::npos);

  const auto lines = split_lines(testsupport::read_file(out + "/grad_field.csv"));
  REQUIRE(lines.size() == 26);  // header + 5x5 grid
  CHECK(lines[0] == "s_p,s_n,dL_dsp,dL_dsn");

  LossSpec spec;
  spec.variant = LossVariant::kCircleLoss;
  spec.s = 60.0;
  spec.m = 0.4;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    REQUIRE(cells.size() == 4);
    const double s_p = std::strtod(cells[0].c_str(), nullptr);
    const double s_n = std::strtod(cells[1].c_str(), nullptr);
    const GradPair g = circle_toy_grad(s_p, s_n, spec, 100);
    // %.17g output round-trips, so the file matches the library bit for bit.
    CHECK(std::strtod(cells[2].c_str(), nullptr) == g.g_p);
    CHECK(std::strtod(cells[3].c_str(), nullptr) == g.g_n);
  }
  // Grid corners cover the full unit square.
  CHECK(split_csv(lines[1])[0] == "0");
  CHECK(std::strtod(split_csv(lines[25])[0].c_str(), nullptr) == 1.0);
}

TEST_CASE("grad-field rejects angular margins it cannot reduce to two axes") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string path = dir + "/run.conf";
  testsupport::write_file(path,
                          "loss.variant = angular\n"
                          "loss.m2 = 0.1\n");
  const CommandResult r = run_command(testsupport::cli_path() +
                                      " grad-field --config " + q(path) + " --out " +
                                      q(dir + "/out"));
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("additive-margin family") != std::string::npos);
}

TEST_CASE("train writes diagnostics and a loadable model and reports metrics") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "");
  const std::string out = dir + "/out";
  const CommandResult r = run_command(testsupport::cli_path() + " train --config " +
                                      q(conf) + " --out " + q(out));
  REQUIRE(r.exit_code == 0);
  CHECK(stdout_value(r.output, "epochs") == "2");

  const auto diag = split_lines(testsupport::read_file(out + "/diagnostics.csv"));
  REQUIRE(diag.size() == 3);
  CHECK(diag[0] == "epoch,s_p_mean,s_n_mean,r_mean,loss,margin");
  CHECK(split_csv(diag[1])[0] == "1");
  CHECK(split_csv(diag[2])[0] == "2");

  const ToyModel model = load_model(out + "/model.bin");
  CHECK(model.frame_dim == 8);
  CHECK(model.hidden_dims == std::vector<int>{10});
  CHECK(model.embedding_dim == 6);
  CHECK(model.num_classes == 6);

  // The printed final_r_mean is the last diagnostics row, round-tripped.
  CHECK(std::strtod(stdout_value(r.output, "final_r_mean").c_str(), nullptr) ==
        std::strtod(split_csv(diag[2])[3].c_str(), nullptr));

  // Reproduce the training-set equal error rate the binary reported.
  const RunConfig config = parse_config_file(conf);
  const Corpus corpus = generate_corpus(config.corpus);
  std::map<std::string, std::vector<double>> table;
  auto embeddings = embed_corpus(model, corpus);
  for (int i = 0; i < corpus.num_utterances(); ++i)
    table.emplace(utterance_id(corpus, i), std::move(embeddings[static_cast<std::size_t>(i)]));
  const double eer = compute_eer(score_trials(table, all_pairs(corpus))).eer;
  const double printed =
      std::strtod(stdout_value(r.output, "train_eer_percent").c_str(), nullptr);
  CHECK(std::abs(printed - 100.0 * eer) <= 1e-4 + 1e-12);

  const double acc =
      std::strtod(stdout_value(r.output, "train_accuracy").c_str(), nullptr);
  CHECK(std::abs(acc - training_accuracy(model, corpus)) <= 1e-4 + 1e-12);
}

TEST_CASE("identical train invocations produce byte-identical artifacts") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "");
  const std::string cmd = testsupport::cli_path() + " train --config " + q(conf);
  REQUIRE(run_command(cmd + " --out " + q(dir + "/a")).exit_code == 0);
  REQUIRE(run_command(cmd + " --out " + q(dir + "/b")).exit_code == 0);
  CHECK(testsupport::read_file(dir + "/a/diagnostics.csv") ==
        testsupport::read_file(dir + "/b/diagnostics.csv"));
  CHECK(testsupport::read_file(dir + "/a/model.bin") ==
        testsupport::read_file(dir + "/b/model.bin"));
}

TEST_CASE("the seed flag reseeds the run deterministically") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "");
  const std::string cmd = testsupport::cli_path() + " train --config " + q(conf);
  REQUIRE(run_command(cmd + " --out " + q(dir + "/base")).exit_code == 0);
  REQUIRE(run_command(cmd + " --seed 123 --out " + q(dir + "/s1")).exit_code == 0);
  REQUIRE(run_command(cmd + " --seed 123 --out " + q(dir + "/s2")).exit_code == 0);

  const std::string base = testsupport::read_file(dir + "/base/model.bin");
  const std::string s1 = testsupport::read_file(dir + "/s1/model.bin");
  CHECK(s1 != base);                                          // --seed changes the run
  CHECK(s1 == testsupport::read_file(dir + "/s2/model.bin"));  // but reproducibly
}

TEST_CASE("train with zero epochs writes an untouched header-only log") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "train.epochs = 0\n");
  const std::string out = dir + "/out";
  const CommandResult r = run_command(testsupport::cli_path() + " train --config " +
                                      q(conf) + " --out " + q(out));
  REQUIRE(r.exit_code == 0);
  CHECK(stdout_value(r.output, "epochs") == "0");
  CHECK(testsupport::read_file(out + "/diagnostics.csv") ==
        "epoch,s_p_mean,s_n_mean,r_mean,loss,margin\n");
}

TEST_CASE("eval scores the held-out corpus with the trained model") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "");
  const std::string out = dir + "/out";
  const std::string base = testsupport::cli_path() + " --config " + q(conf) +
                           " --out " + q(out) + " ";
  REQUIRE(run_command(base + "train").exit_code == 0);
  const CommandResult r = run_command(base + "eval");
  REQUIRE(r.exit_code == 0);

  // 4 speakers x 3 utterances: 66 pairs, 12 of them target trials.
  CHECK(stdout_value(r.output, "trials") == "66 (12 target / 54 non-target)");

  const auto trials = read_trial_list(out + "/trials.txt");
  REQUIRE(trials.size() == 66);
  const auto scored = read_score_file(out + "/scores.txt");
  REQUIRE(scored.size() == 66);

  // Rebuild the held-out corpus the way the binary does and compare scores.
  const RunConfig config = parse_config_file(conf);
  SyntheticCorpusSpec eval_spec;
  eval_spec.num_speakers = config.eval.num_speakers;
  eval_spec.utterances_per_speaker = config.eval.utterances_per_speaker;
  eval_spec.frame_dim = config.corpus.frame_dim;
  eval_spec.max_frames = config.eval.max_frames;
  eval_spec.within_speaker_noise = config.eval.within_speaker_noise;
  eval_spec.label_noise_rate = 0.0;
  eval_spec.seed = config.eval.seed;
  const Corpus corpus = generate_corpus(eval_spec);
  const ToyModel model = load_model(out + "/model.bin");
  std::map<std::string, std::vector<double>> table;
  auto embeddings = embed_corpus(model, corpus);
  for (int i = 0; i < corpus.num_utterances(); ++i)
    table.emplace(utterance_id(corpus, i), std::move(embeddings[static_cast<std::size_t>(i)]));

  std::vector<TrialScore> scores;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const double expect = cosine_score(table.at(trials[i].enroll_id),
                                       table.at(trials[i].test_id));
    CHECK(scored[i].score == expect);  // %.17g round-trips
    scores.push_back({expect, trials[i].is_target});
  }

  const double printed_eer =
      std::strtod(stdout_value(r.output, "eer_percent").c_str(), nullptr);
  CHECK(std::abs(printed_eer - 100.0 * compute_eer(scores).eer) <= 1e-4 + 1e-12);
  const double printed_dcf =
      std::strtod(stdout_value(r.output, "min_dcf").c_str(), nullptr);
  CHECK(std::abs(printed_dcf - compute_min_dcf(scores, config.dcf).min_dcf) <=
        1e-4 + 1e-12);

  // Histograms: header plus one row per bin, counts conserved per class.
  for (const auto& [file, total] :
       std::vector<std::pair<std::string, long>>{{"hist_target.csv", 12},
                                                 {"hist_nontarget.csv", 54}}) {
    const auto lines = split_lines(testsupport::read_file(out + "/" + file));
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "bin_lo,bin_hi,count");
    long sum = 0;
    for (std::size_t i = 1; i < lines.size(); ++i)
      sum += std::strtol(split_csv(lines[i])[2].c_str(), nullptr, 10);
    CHECK(sum == total);
  }
}

TEST_CASE("eval without a model is an io error") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "");
  const CommandResult r = run_command(testsupport::cli_path() + " eval --config " +
                                      q(conf) + " --out " + q(dir + "/fresh"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("io error:") != std::string::npos);
}

TEST_CASE("margin-plan prints the per-epoch stage schedule") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir,
                                        "margin.mode = stage\n"
                                        "margin.stages = 0.40, 0.35, 0.32\n"
                                        "train.epochs = 6\n");
  const CommandResult r =
      run_command(testsupport::cli_path() + " margin-plan --config " + q(conf));
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "mode = stage");
  CHECK(lines[1] == "epoch 1 stage 1 margin 0.4");
  CHECK(lines[2] == "epoch 2 stage 1 margin 0.4");
  CHECK(lines[3] == "epoch 3 stage 2 margin 0.35");
  CHECK(lines[4] == "epoch 4 stage 2 margin 0.35");
  CHECK(lines[5] == "epoch 5 stage 3 margin 0.32");
  CHECK(lines[6] == "epoch 6 stage 3 margin 0.32");
}

TEST_CASE("margin-plan prints fixed margins and handles empty runs") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string fixed = write_config(dir, "train.epochs = 2\n");
  const CommandResult r =
      run_command(testsupport::cli_path() + " margin-plan --config " + q(fixed));
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "mode = fixed");
  CHECK(lines[1] == "epoch 1 stage 1 margin 0.4");  // the circle margin

  testsupport::write_file(dir + "/empty.conf", "train.epochs = 0\n");
  const CommandResult empty = run_command(testsupport::cli_path() +
                                          " margin-plan --config " +
                                          q(dir + "/empty.conf"));
  REQUIRE(empty.exit_code == 0);
  CHECK(split_lines(empty.output).back() == "no epochs configured");
}

TEST_CASE("margin-plan tabulates the chunk-width margin map") {
  const std::string dir = testsupport::make_temp_dir("clab_cli");
  const std::string conf = write_config(dir, "margin.mode = chunk\n");
  const CommandResult r =
      run_command(testsupport::cli_path() + " margin-plan --config " + q(conf));
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() == 8);  // header + widths 4..10
  CHECK(lines[0] == "mode = chunk (m0 = 0.4, lambda = 0.25, L in [4, 10])");

  ChunkMarginSpec spec;
  spec.m0 = 0.4;
  spec.lambda = 0.25;
  spec.l_min = 4;
  spec.l_max = 10;
  for (int width = 4; width <= 10; ++width) {
    const std::string& line = lines[static_cast<std::size_t>(width - 3)];
    const std::string prefix = "L " + std::to_string(width) + " margin ";
    REQUIRE(line.rfind(prefix, 0) == 0);
    CHECK(std::strtod(line.substr(prefix.size()).c_str(), nullptr) ==
          chunk_margin(spec, width));
  }
}
