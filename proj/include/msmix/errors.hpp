#pragma once

#include <stdexcept>
#include <string>

namespace msmix {

enum class ErrorKind {
  NoBracket,
  NoConvergence,
  Singular,
  NotSymmetric,
  ZeroTotalDensity,
  NonpositiveDensity,
  SingularBeyondKernel,
  InvalidProfile,
  CflViolation,
  StateCorrupted,
  AuditFailure,
  InvalidArgument,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by solvers that give up; carries the best point seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best, double residual)
      : Error(ErrorKind::NoConvergence, what), best_(best), residual_(residual) {}

  double best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  double best_;
  double residual_;
};

}  // namespace msmix
