#pragma once

#include <stdexcept>
#include <string>

namespace gpsfilt {

// Precondition violation: bad sizes, non-finite inputs, out-of-range settings.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file content. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// Structurally valid file whose content violates a format contract
// (e.g. non-uniform sample spacing).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Normal-equation solve failed even through the dense fallback path.
class DesignError : public std::runtime_error {
 public:
  explicit DesignError(const std::string& what, double residual = 0.0, double condition = 0.0)
      : std::runtime_error(what), residual_(residual), condition_(condition) {}
  // Relative residual of the rejected solution, for diagnostics.
  double residual() const noexcept { return residual_; }
  // Condition estimate of the rejected system (ratio of extreme pivot
  // magnitudes from the factorization); 0 when unavailable.
  double condition() const noexcept { return condition_; }

 private:
  double residual_;
  double condition_;
};

// Degenerate filter state (e.g. non-positive innovation covariance).
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss or parameter.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what, int epoch = -1)
      : std::runtime_error(epoch >= 0 ? what + " (epoch " + std::to_string(epoch) + ")" : what),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace gpsfilt
