#pragma once

#include <stdexcept>
#include <string>

namespace deeprm {

// Input outside an operation's documented domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation not allowed in the object's current state (e.g. re-corruption).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training diverged; carries the epoch at which the loss became non-finite.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}

  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace deeprm
