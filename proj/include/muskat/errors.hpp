#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace muskat {

/// Precondition violation on a numerical operation (bad index, bad size, bad sign).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Coefficient or intermediate value left the range of double.
class OverflowError : public std::overflow_error {
  public:
    using std::overflow_error::overflow_error;
};

/// Invalid or incomplete run configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// Bad input data (initial-condition files, diagnostics CSVs).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File system failure; the message carries the path.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Zero pivot during a direct solve.
class SolverError : public std::runtime_error {
  public:
    SolverError(std::size_t node, const std::string& what)
        : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

    std::size_t node() const noexcept { return node_; }

  private:
    std::size_t node_;
};

/// Picard iteration failed to converge within its budget.
class StepError : public std::runtime_error {
  public:
    StepError(double residual, int iterations, const std::string& what)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

  private:
    double residual_;
    int iterations_;
};

/// A converged state carried an entry below the clipping threshold.
class PositivityError : public std::runtime_error {
  public:
    PositivityError(std::size_t node, double value, const std::string& what)
        : std::runtime_error(what), node_(node), value_(value) {}

    std::size_t node() const noexcept { return node_; }
    double value() const noexcept { return value_; }

  private:
    std::size_t node_;
    double value_;
};

}  // namespace muskat
