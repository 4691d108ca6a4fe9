#pragma once

// Batch harness: INI-style problem configurations, command dispatch and
// deterministic CSV/JSON artifacts.

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sellab/error.hpp"

namespace sellab::cli {

/// Invalid configuration; `line()` is 0 when no single line is at fault.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct Value {
  std::string text;
  int line = 0;
};

/// Parsed configuration, keyed by section then key.
struct ProblemSpec {
  std::string command;
  std::map<std::string, std::map<std::string, Value>> sections;

  bool has(const std::string& section, const std::string& key) const;
  const Value& get(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  int integer(const std::string& section, const std::string& key) const;
  int integer_or(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> list(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
};

/// Numeric value in the expression grammar; `pi` is accepted.
double parse_number(const std::string& text);

ProblemSpec parse_config_text(const std::string& text);
ProblemSpec parse_config(const std::string& path);

/// Applies `key=value` or `section.key=value` from the command line.
void apply_override(ProblemSpec& spec, const std::string& assignment);

/// Checks the command name and its required keys.
void validate(const ProblemSpec& spec);

const std::vector<std::string>& commands();

struct RunOptions {
  std::string out_dir = ".";
  int jobs = 0;
  bool verbose = false;
  std::optional<long> seed;
};

/// Runs the command. Returns 0 on success, 2 for configuration or
/// precondition errors (nothing written), 3 for numerical failures (an
/// error JSON is written). The summary line goes to `out`.
int run(const ProblemSpec& spec, const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace sellab::cli
