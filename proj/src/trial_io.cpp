#include "circlelab/trial_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

[[noreturn]] void bad_line(const std::string& path, int line_no, const char* what) {
  throw IoError(path + ":" + std::to_string(line_no) + ": " + what);
}

void check_write(const std::ofstream& out, const std::string& path) {
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<Trial> read_trial_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Trial> trials;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Trial t;
    std::string label, extra;
    if (!(ss >> t.enroll_id >> t.test_id >> label))
      bad_line(path, line_no, "expected 'enroll_id test_id {1|0}'");
    if (ss >> extra) bad_line(path, line_no, "trailing tokens");
    if (label == "1")
      t.is_target = true;
    else if (label == "0")
      t.is_target = false;
    else
      bad_line(path, line_no, "label must be 1 or 0");
    trials.push_back(std::move(t));
  }
  return trials;
}

void write_trial_list(const std::string& path, std::span<const Trial> trials) {
  std::ofstream out = open_out(path);
  for (const Trial& t : trials)
    out << t.enroll_id << ' ' << t.test_id << ' ' << (t.is_target ? '1' : '0')
        << '\n';
  out.flush();
  check_write(out, path);
}

std::vector<ScoredTrial> read_score_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<ScoredTrial> scores;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ScoredTrial t;
    std::string score_token, extra;
    if (!(ss >> t.enroll_id >> t.test_id >> score_token))
      bad_line(path, line_no, "expected 'enroll_id test_id score'");
    if (ss >> extra) bad_line(path, line_no, "trailing tokens");
    errno = 0;
    char* end = nullptr;
    t.score = std::strtod(score_token.c_str(), &end);
    if (end == score_token.c_str() || *end != '\0' || errno == ERANGE)
      bad_line(path, line_no, "malformed score");
    scores.push_back(std::move(t));
  }
  return scores;
}

void write_score_file(const std::string& path, std::span<const ScoredTrial> scores) {
  std::ofstream out = open_out(path);
  for (const ScoredTrial& t : scores)
    out << t.enroll_id << ' ' << t.test_id << ' ' << format_score(t.score) << '\n';
  out.flush();
  check_write(out, path);
}

}  // namespace circlelab
