#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sellab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation outside the domain of some sub-expression (ln of a
/// non-positive number, division by zero, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& node, double t)
      : Error("domain violation in " + node + " at t=" + std::to_string(t)),
        node_(node),
        t_(t) {}
  const std::string& node() const noexcept { return node_; }
  double at() const noexcept { return t_; }

 private:
  std::string node_;
  double t_;
};

/// A numerical procedure could not deliver its contract (bracket not found,
/// step-size underflow, iteration not converged, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace sellab
