#pragma once

#include <stdexcept>
#include <string>

namespace specshare {

/// Argument outside the mathematical domain of an operation (negative SINR,
/// frequency outside [0, W), discount >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a structural contract (wrong vector length, invalid params).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// No parameter choice satisfies the requested equilibrium condition.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A theorem hypothesis required by a verification routine does not hold.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// max_entrants scan reached its cap while u_f was still >= c.
class CapExceededError : public std::runtime_error {
 public:
  CapExceededError(const std::string& what, int lower_bound)
      : std::runtime_error(what), lower_bound_(lower_bound) {}
  int lower_bound() const noexcept { return lower_bound_; }

 private:
  int lower_bound_;
};

/// Invalid simulation or scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file parse failure; carries the 1-based line number (0 when the
/// problem is not tied to a line, e.g. a missing key).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace specshare
