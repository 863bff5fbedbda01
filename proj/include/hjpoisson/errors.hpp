#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjpoisson {

/// Raised when a rotation vector leaves the exponential chart |x| < pi - 1e-6.
class ChartViolation : public std::domain_error {
 public:
  ChartViolation(const std::string& where, double norm)
      : std::domain_error(where + ": rotation vector norm " + std::to_string(norm) +
                          " outside exponential chart"),
        norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

/// Newton iteration of a bisection step failed to reach its tolerance.
class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(int iterations, double residual)
      : std::runtime_error("Newton solve did not converge after " + std::to_string(iterations) +
                           " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Malformed weight/config document. `field` names the offending entry when known.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what, std::string field = {})
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Stored matrix shapes disagree with the declared layer sizes.
class DimensionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace hjpoisson
