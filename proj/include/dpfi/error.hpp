#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dpfi {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed market data or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The shared feasible set is empty.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, int seller, int node)
      : Error(what), seller_(seller), node_(node) {}
  int seller() const noexcept { return seller_; }
  int node() const noexcept { return node_; }

 private:
  int seller_;
  int node_;
};

/// An iterative method ran out of budget or diverged.  Carries the trace
/// of the monitored quantity so callers can diagnose.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Iterates blew up; usually the step is too large.
class DivergenceError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace dpfi
