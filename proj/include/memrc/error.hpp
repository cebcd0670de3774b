#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memrc {

/// Bad argument or violated precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear system could not be solved (singular after conductance flooring,
/// rank-deficient regression, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Random topology generation gave up.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Metric is undefined for the given data (zero variance, zero power).
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A generated sequence left its admissible range.
class DivergentSequence : public std::runtime_error {
public:
    DivergentSequence(const std::string& what, std::size_t index)
        : std::runtime_error(what), index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Configuration file problem. `key()` names the offending entry when there is one.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, std::string key = {})
        : std::runtime_error(what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace memrc
