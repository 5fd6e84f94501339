#pragma once

#include <stdexcept>
#include <string>

namespace dar {

/// Bad configuration or mismatched policy geometry. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or missing input data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A rollout set with too few valid predictions for leave-one-out scoring.
class DegenerateSetError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Non-finite values produced during optimization. Carries a JSON state dump.
class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string& what, std::string state_dump)
        : std::runtime_error(what), dump_(std::move(state_dump)) {}

    const std::string& state_dump() const noexcept { return dump_; }

  private:
    std::string dump_;
};

} // namespace dar
