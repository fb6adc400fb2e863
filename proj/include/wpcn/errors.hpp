#pragma once

#include <stdexcept>
#include <string>

namespace wpcn {

// Out-of-domain argument to a numeric routine (negative distance, zero unit energy, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent configuration. `where` names the offending field or line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// An iterative solver stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A linear system that should be regular turned out numerically singular.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The exact joint chain would exceed the state-space guard.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace wpcn
