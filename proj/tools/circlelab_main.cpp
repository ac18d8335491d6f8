// Command-line front end: gradient-field export, toy training runs,
// verification-metric evaluation, and margin-schedule inspection.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 numerical
// failure.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "circlelab/config.hpp"
#include "circlelab/corpus.hpp"
#include "circlelab/errors.hpp"
#include "circlelab/export.hpp"
#include "circlelab/losses.hpp"
#include "circlelab/margin.hpp"
#include "circlelab/metrics.hpp"
#include "circlelab/model_io.hpp"
#include "circlelab/train.hpp"
#include "circlelab/trial_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace circlelab;

// Shortest decimal form that round-trips the double.
std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

void cmd_grad_field(const RunConfig& config) {
  ensure_dir(config.output_dir);
  GradFieldSpec spec;
  spec.loss = config.train.loss;
  spec.resolution = config.grad_field_resolution;
  spec.num_classes = config.grad_field_num_classes;
  const std::string path = config.output_dir + "/grad_field.csv";
  write_grad_field_csv(path, spec);
  std::cout << "wrote " << path << " (" << spec.resolution << "x" << spec.resolution
            << " grid)\n";
}

// All-pairs trials over a corpus, labeled by the generating speaker.
std::vector<Trial> all_pairs_trials(const Corpus& corpus) {
  std::vector<Trial> trials;
  const int n = corpus.num_utterances();
  trials.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      trials.push_back({utterance_id(corpus, i), utterance_id(corpus, j),
                        corpus.utterances[static_cast<std::size_t>(i)].speaker ==
                            corpus.utterances[static_cast<std::size_t>(j)].speaker});
    }
  }
  return trials;
}

std::map<std::string, std::vector<double>> embedding_table(const ToyModel& model,
                                                           const Corpus& corpus) {
  std::map<std::string, std::vector<double>> table;
  std::vector<std::vector<double>> embeddings = embed_corpus(model, corpus);
  for (int i = 0; i < corpus.num_utterances(); ++i)
    table.emplace(utterance_id(corpus, i), std::move(embeddings[static_cast<std::size_t>(i)]));
  return table;
}

void cmd_train(const RunConfig& config) {
  ensure_dir(config.output_dir);
  const Corpus corpus = generate_corpus(config.corpus);
  const TrainResult result = train(config.train, corpus);

  const std::string diag_path = config.output_dir + "/diagnostics.csv";
  const std::string model_path = config.output_dir + "/model.bin";
  write_diagnostics_csv(diag_path, result.diagnostics);
  save_model(model_path, result.model);

  const auto scores =
      score_trials(embedding_table(result.model, corpus), all_pairs_trials(corpus));
  const EerResult train_eer = compute_eer(scores);

  std::cout << "epochs = " << result.diagnostics.size() << "\n";
  if (!result.diagnostics.empty()) {
    const EpochDiagnostics& last = result.diagnostics.back();
    std::cout << "final_loss = " << format_shortest(last.loss_mean) << "\n"
              << "final_r_mean = " << format_shortest(last.r_mean) << "\n";
  }
  std::cout << "train_accuracy = "
            << format_fixed4(training_accuracy(result.model, corpus)) << "\n"
            << "train_eer_percent = " << format_fixed4(100.0 * train_eer.eer) << "\n"
            << "wrote " << diag_path << "\n"
            << "wrote " << model_path << "\n";
}

void cmd_eval(const RunConfig& config) {
  ensure_dir(config.output_dir);
  const std::string model_path = config.eval.model_path.empty()
                                     ? config.output_dir + "/model.bin"
                                     : config.eval.model_path;
  const ToyModel model = load_model(model_path);

  SyntheticCorpusSpec eval_spec;
  eval_spec.num_speakers = config.eval.num_speakers;
  eval_spec.utterances_per_speaker = config.eval.utterances_per_speaker;
  eval_spec.frame_dim = config.corpus.frame_dim;
  eval_spec.max_frames = config.eval.max_frames;
  eval_spec.within_speaker_noise = config.eval.within_speaker_noise;
  eval_spec.label_noise_rate = 0.0;
  eval_spec.seed = config.eval.seed;
  if (model.frame_dim != eval_spec.frame_dim)
    throw ConfigError("model frame_dim " + std::to_string(model.frame_dim) +
                      " does not match corpus.frame_dim " +
                      std::to_string(eval_spec.frame_dim));

  const Corpus corpus = generate_corpus(eval_spec);
  const std::vector<Trial> trials = config.eval.trials_path.empty()
                                        ? all_pairs_trials(corpus)
                                        : read_trial_list(config.eval.trials_path);
  const auto table = embedding_table(model, corpus);
  const std::vector<TrialScore> scores = score_trials(table, trials);
  const EerResult eer = compute_eer(scores);
  const DcfResult dcf = compute_min_dcf(scores, config.dcf);

  const std::string trials_path = config.output_dir + "/trials.txt";
  const std::string scores_path = config.output_dir + "/scores.txt";
  write_trial_list(trials_path, trials);
  std::vector<ScoredTrial> scored;
  scored.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i)
    scored.push_back({trials[i].enroll_id, trials[i].test_id, scores[i].score});
  write_score_file(scores_path, scored);

  std::vector<double> target_scores, nontarget_scores;
  for (const TrialScore& t : scores)
    (t.is_target ? target_scores : nontarget_scores).push_back(t.score);
  const std::string hist_target_path = config.output_dir + "/hist_target.csv";
  const std::string hist_nontarget_path = config.output_dir + "/hist_nontarget.csv";
  write_histogram_csv(hist_target_path,
                      similarity_histogram(target_scores, config.eval.hist_bins));
  write_histogram_csv(hist_nontarget_path,
                      similarity_histogram(nontarget_scores, config.eval.hist_bins));

  std::cout << "model = " << model_path << "\n"
            << "trials = " << trials.size() << " (" << target_scores.size()
            << " target / " << nontarget_scores.size() << " non-target)\n"
            << "eer_percent = " << format_fixed4(100.0 * eer.eer) << "\n"
            << "eer_threshold = " << format_shortest(eer.threshold) << "\n"
            << "min_dcf = " << format_fixed4(dcf.min_dcf) << "\n"
            << "min_dcf_threshold = " << format_shortest(dcf.threshold) << "\n"
            << "wrote " << trials_path << "\n"
            << "wrote " << scores_path << "\n"
            << "wrote " << hist_target_path << "\n"
            << "wrote " << hist_nontarget_path << "\n";
}

void cmd_margin_plan(const RunConfig& config) {
  const TrainConfig& tc = config.train;
  if (tc.margin_mode == MarginMode::kChunk) {
    ChunkMarginSpec spec;
    spec.m0 = tc.chunk_m0;
    spec.lambda = tc.chunk_lambda;
    spec.l_min = tc.chunk_intervals.front().l1;
    spec.l_max = tc.chunk_intervals.back().l2;
    std::cout << "mode = chunk (m0 = " << format_shortest(spec.m0)
              << ", lambda = " << format_shortest(spec.lambda) << ", L in ["
              << spec.l_min << ", " << spec.l_max << "])\n";
    for (int width = spec.l_min; width <= spec.l_max; ++width)
      std::cout << "L " << width << " margin "
                << format_shortest(chunk_margin(spec, width)) << "\n";
    return;
  }

  std::cout << "mode = " << (tc.margin_mode == MarginMode::kStage ? "stage" : "fixed")
            << "\n";
  if (tc.epochs == 0) {
    std::cout << "no epochs configured\n";
    return;
  }
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const int stage = stage_for_epoch(epoch, tc.epochs, tc.num_stages());
    const double margin = tc.margin_mode == MarginMode::kStage
                              ? stage_margin(tc.stage_margins, stage)
                              : reported_margin(tc.loss);
    std::cout << "epoch " << (epoch + 1) << " stage " << (stage + 1) << " margin "
              << format_shortest(margin) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Angular-margin loss laboratory: gradient fields, toy training, "
               "verification metrics, margin schedules"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "Configuration file (key = value lines)")
      ->expected(1);
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Override the training and corpus seeds");
  CLI::Option* out_opt =
      app.add_option("--out", out_dir, "Output directory (default from config)");
  app.fallthrough();

  CLI::App* grad = app.add_subcommand(
      "grad-field", "Export toy-scenario loss gradients over the [0,1]^2 grid");
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the toy model on a synthetic corpus");
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score held-out trials with a trained model and report EER/minDCF");
  CLI::App* plan = app.add_subcommand(
      "margin-plan", "Print the margin schedule implied by the configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      config = parse_config_file(config_path);
    } else {
      config.validate();
    }
    if (seed_opt->count() > 0) apply_seed_override(config, seed);
    if (out_opt->count() > 0) config.output_dir = out_dir;

    if (grad->parsed())
      cmd_grad_field(config);
    else if (train_cmd->parsed())
      cmd_train(config);
    else if (eval_cmd->parsed())
      cmd_eval(config);
    else if (plan->parsed())
      cmd_margin_plan(config);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}
