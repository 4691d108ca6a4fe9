#pragma once

// Deterministic text output: 17 significant digits, '.' decimal point,
// '\n' line ends, atomic file replacement.

#include <string>
#include <vector>

namespace sellab::io {

/// %.17g formatting, independent of the global locale.
std::string fmt(double v);

/// Column-oriented CSV with optional leading '#' comment lines.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void comment(const std::string& line) { comments_.push_back(line); }
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

/// Write to a temporary file in the same directory and rename over `path`.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace sellab::io
