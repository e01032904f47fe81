#pragma once

#include <stdexcept>
#include <string>

namespace romflow {

/// Raised when operand dimensions are not conformable.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an index lies outside its valid range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Raised by Newton loops (FOM, ROM, HROM) that exhaust their iteration budget.
class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, long step, int iterations, double residual_norm)
      : std::runtime_error(what), step_(step), iterations_(iterations), residual_norm_(residual_norm) {}

  long step() const noexcept { return step_; }
  int iterations() const noexcept { return iterations_; }
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  long step_;
  int iterations_;
  double residual_norm_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace romflow
