#pragma once

#include <stdexcept>
#include <string>

namespace polariton {

/// Invalid user input: a config key, CLI flag, or precondition on a public call.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::invalid_argument(what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A solver produced a non-finite value or a quantity left its valid range.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double time = 0.0, long long step = -1)
      : std::runtime_error(what), time_(time), step_(step) {}

  double time() const noexcept { return time_; }
  long long step() const noexcept { return step_; }

 private:
  double time_;
  long long step_;
};

}  // namespace polariton
