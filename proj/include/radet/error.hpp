#pragma once

#include <stdexcept>
#include <string>

namespace radet {

enum class ErrorKind {
  invalid_parameter,
  dimension_mismatch,
  not_positive_definite,
  convergence_failure,
  degenerate_data,
  infeasible,
  invalid_data,
  undefined_statistic,
  training_failure,
  io,
  validation,
};

const char* to_string(ErrorKind kind);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Iterative solver stopped at its cap; carries the last residual seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorKind::convergence_failure, what),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Deep SVDD training produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(ErrorKind::training_failure, what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace radet
