#pragma once

#include <stdexcept>
#include <string>

namespace addfit {

// Local design has fewer than two distinct points carrying kernel weight,
// or the local normal equations are numerically rank deficient.
class SingularLocalDesign : public std::runtime_error {
public:
  explicit SingularLocalDesign(const std::string& what, double x = 0.0,
                               long index = -1)
      : std::runtime_error(what), x_(x), index_(index) {}
  double eval_point() const { return x_; }
  long offending_index() const { return index_; }

private:
  double x_;
  long index_;
};

class BadReplicateIndex : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class GridMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class LengthMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Derivative curve does not cover enough of the observed covariate mass.
class InsufficientCoverage : public std::runtime_error {
public:
  explicit InsufficientCoverage(const std::string& what, double coverage = 0.0)
      : std::runtime_error(what), coverage_(coverage) {}
  double coverage() const { return coverage_; }

private:
  double coverage_;
};

// All in-window deltas vanish: the pooled L1 slope is not identifiable.
class NonIdentifiable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class CsvError : public std::runtime_error {
public:
  CsvError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

}  // namespace addfit
