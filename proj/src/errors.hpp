#pragma once

#include <stdexcept>
#include <string>

namespace coatline {

// Error categories aligned with the CLI exit codes:
// validation = 2, numeric failure = 3, I/O = 4.

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string &msg, double condition_estimate = 0.0)
      : std::runtime_error(msg), condition_estimate_(condition_estimate) {}

  double condition_estimate() const { return condition_estimate_; }

private:
  double condition_estimate_;
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace coatline
