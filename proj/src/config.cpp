#include "circlelab/config.hpp"

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(trim(part));
  return parts;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value +
                    "' as " + expected);
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    bad_value(key, value, "a number");
  return v;
}

long long parse_ll(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    bad_value(key, value, "an integer");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_ll(key, value);
  if (v < INT_MIN || v > INT_MAX) bad_value(key, value, "an integer");
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos)
    bad_value(key, value, "an unsigned integer");
  return v;
}

// Wires each recognized key to the field it sets.
struct Parser {
  RunConfig config;
  bool m0_set = false;

  using Handler = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Handler> handlers;

  Parser() {
    auto dbl = [](double& field) {
      return [&field](const std::string& k, const std::string& v) {
        field = parse_double(k, v);
      };
    };
    auto intf = [](int& field) {
      return [&field](const std::string& k, const std::string& v) {
        field = parse_int(k, v);
      };
    };
    auto u64f = [](std::uint64_t& field) {
      return [&field](const std::string& k, const std::string& v) {
        field = parse_u64(k, v);
      };
    };
    auto strf = [](std::string& field) {
      return [&field](const std::string&, const std::string& v) { field = v; };
    };

    RunConfig& c = config;
    handlers["corpus.num_speakers"] = intf(c.corpus.num_speakers);
    handlers["corpus.utterances_per_speaker"] = intf(c.corpus.utterances_per_speaker);
    handlers["corpus.frame_dim"] = intf(c.corpus.frame_dim);
    handlers["corpus.max_frames"] = intf(c.corpus.max_frames);
    handlers["corpus.within_speaker_noise"] = dbl(c.corpus.within_speaker_noise);
    handlers["corpus.label_noise_rate"] = dbl(c.corpus.label_noise_rate);
    handlers["corpus.seed"] = u64f(c.corpus.seed);

    handlers["model.hidden_dims"] = [&c](const std::string& k, const std::string& v) {
      std::vector<int> dims;
      for (const auto& part : split(v, ',')) dims.push_back(parse_int(k, part));
      c.train.hidden_dims = std::move(dims);
    };
    handlers["model.embedding_dim"] = intf(c.train.embedding_dim);
    handlers["model.activation"] = [&c](const std::string& k, const std::string& v) {
      if (v == "tanh")
        c.train.activation = Activation::kTanh;
      else if (v == "identity")
        c.train.activation = Activation::kIdentity;
      else
        bad_value(k, v, "'tanh' or 'identity'");
    };

    handlers["loss.variant"] = [&c](const std::string& k, const std::string& v) {
      if (v == "softmax")
        c.train.loss.variant = LossVariant::kSoftmax;
      else if (v == "angular")
        c.train.loss.variant = LossVariant::kAngularSoftmax;
      else if (v == "circle")
        c.train.loss.variant = LossVariant::kCircleLoss;
      else
        bad_value(k, v, "'softmax', 'angular' or 'circle'");
    };
    handlers["loss.s"] = dbl(c.train.loss.s);
    handlers["loss.m1"] = dbl(c.train.loss.m1);
    handlers["loss.m2"] = dbl(c.train.loss.m2);
    handlers["loss.m3"] = dbl(c.train.loss.m3);
    handlers["loss.m"] = dbl(c.train.loss.m);

    handlers["margin.mode"] = [&c](const std::string& k, const std::string& v) {
      if (v == "fixed")
        c.train.margin_mode = MarginMode::kFixed;
      else if (v == "stage")
        c.train.margin_mode = MarginMode::kStage;
      else if (v == "chunk")
        c.train.margin_mode = MarginMode::kChunk;
      else
        bad_value(k, v, "'fixed', 'stage' or 'chunk'");
    };
    handlers["margin.stages"] = [&c](const std::string& k, const std::string& v) {
      std::vector<double> margins;
      for (const auto& part : split(v, ',')) margins.push_back(parse_double(k, part));
      c.train.stage_margins.margins = std::move(margins);
    };
    handlers["margin.m0"] = [this](const std::string& k, const std::string& v) {
      config.train.chunk_m0 = parse_double(k, v);
      m0_set = true;
    };
    handlers["margin.lambda"] = dbl(c.train.chunk_lambda);

    handlers["train.epochs"] = intf(c.train.epochs);
    handlers["train.batch_size"] = intf(c.train.batch_size);
    handlers["train.learning_rate"] = dbl(c.train.learning_rate);
    handlers["train.lr_drop"] = dbl(c.train.lr_drop);
    handlers["train.momentum"] = dbl(c.train.momentum);
    handlers["train.weight_decay"] = dbl(c.train.weight_decay);
    handlers["train.chunk_intervals"] = [&c](const std::string& k, const std::string& v) {
      std::vector<ChunkInterval> intervals;
      for (const auto& part : split(v, ',')) {
        const auto bounds = split(part, ':');
        if (bounds.size() != 2) bad_value(k, part, "an 'l1:l2' interval");
        intervals.push_back({parse_int(k, bounds[0]), parse_int(k, bounds[1])});
      }
      c.train.chunk_intervals = std::move(intervals);
    };
    handlers["train.seed"] = u64f(c.train.seed);

    handlers["eval.num_speakers"] = intf(c.eval.num_speakers);
    handlers["eval.utterances_per_speaker"] = intf(c.eval.utterances_per_speaker);
    handlers["eval.max_frames"] = intf(c.eval.max_frames);
    handlers["eval.within_speaker_noise"] = dbl(c.eval.within_speaker_noise);
    handlers["eval.seed"] = u64f(c.eval.seed);
    handlers["eval.trials"] = strf(c.eval.trials_path);
    handlers["eval.model"] = strf(c.eval.model_path);
    handlers["eval.hist_bins"] = intf(c.eval.hist_bins);

    handlers["dcf.p_target"] = dbl(c.dcf.p_target);
    handlers["dcf.c_miss"] = dbl(c.dcf.c_miss);
    handlers["dcf.c_fa"] = dbl(c.dcf.c_fa);

    handlers["grad_field.resolution"] = intf(c.grad_field_resolution);
    handlers["grad_field.num_classes"] = intf(c.grad_field_num_classes);

    handlers["output.dir"] = strf(c.output_dir);
  }
};

}  // namespace

void EvalSpec::validate() const {
  if (num_speakers < 2) throw ConfigError("eval.num_speakers must be >= 2");
  if (utterances_per_speaker < 1)
    throw ConfigError("eval.utterances_per_speaker must be >= 1");
  if (max_frames < 1) throw ConfigError("eval.max_frames must be >= 1");
  if (!(within_speaker_noise >= 0.0))
    throw ConfigError("eval.within_speaker_noise must be >= 0");
  if (hist_bins < 1) throw ConfigError("eval.hist_bins must be >= 1");
}

void RunConfig::validate() const {
  corpus.validate();
  train.validate();
  eval.validate();
  dcf.validate();
  if (grad_field_resolution < 2)
    throw ConfigError("grad_field.resolution must be >= 2");
  if (grad_field_num_classes < 2)
    throw ConfigError("grad_field.num_classes must be >= 2");
  if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  Parser parser;
  std::map<std::string, int> seen;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (value.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty value for key '" + key + "'");

    const auto handler = parser.handlers.find(key);
    if (handler == parser.handlers.end())
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": unknown config key '" + key + "'");
    const auto [prev, inserted] = seen.emplace(key, line_no);
    if (!inserted)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(prev->second) + ")");
    handler->second(key, value);
  }

  RunConfig config = std::move(parser.config);
  if (!parser.m0_set) config.train.chunk_m0 = config.train.loss.m;
  if (config.train.margin_mode == MarginMode::kStage &&
      config.train.stage_margins.margins.empty())
    throw ConfigError("margin.mode = stage requires margin.stages");
  config.validate();
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for config file '" + path + "'");
  return parse_config_text(buf.str(), path);
}

void apply_seed_override(RunConfig& config, std::uint64_t seed) {
  config.train.seed = seed;
  config.corpus.seed = seed;
}

}  // namespace circlelab
