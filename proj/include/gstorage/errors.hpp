#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gstorage {

/// Bad user input: malformed configuration, violated preconditions, unknown keys.
/// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a result (optimizer, quadrature,
/// factorization, convergence diagnostics). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (t, value) pairs that explain why a limit or plateau diagnostic failed.
using Trace = std::vector<std::pair<double, double>>;

class InconclusiveClassification : public NumericalError {
 public:
  InconclusiveClassification(const std::string& what, Trace trace)
      : NumericalError("inconclusive classification: " + what), trace_(std::move(trace)) {}
  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

class RateNotConverged : public NumericalError {
 public:
  RateNotConverged(const std::string& what, Trace trace)
      : NumericalError("rate not converged: " + what), trace_(std::move(trace)) {}
  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : NumericalError("quadrature did not converge: " + what + " (achieved error " +
                       std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace gstorage
