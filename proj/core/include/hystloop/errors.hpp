#pragma once

#include <stdexcept>
#include <string>

namespace hystloop {

/// Invalid parameter or config value; the message names the offending field.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Config file problems: missing file, bad syntax, unknown keys.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation called in a state that cannot serve it.
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Non-finite value fed into a numeric kernel.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// File read/write failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hystloop
