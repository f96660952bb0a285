#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace fracrd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric parameter (non-positive step, beta outside (0,1], ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: dimension mismatch, non-finite samples.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A quadrature or iterative routine failed to reach its target accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Trajectory;

/// The reaction flow left the finite range (|z| > 1e12 or NaN).
///
/// Carries the last time at which the state was finite, the offending grid
/// point (if the flow was applied to a field) and the splitting step index
/// (if raised from inside a simulation). `partial()` holds the snapshots
/// computed before the failure when the error escapes `simulate`.
class BlowUpError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  BlowUpError(const std::string& what, double last_finite_time)
      : Error(what), last_finite_time_(last_finite_time) {}

  double last_finite_time() const noexcept { return last_finite_time_; }
  std::size_t grid_index() const noexcept { return grid_index_; }
  std::size_t step_index() const noexcept { return step_index_; }
  const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }

  BlowUpError with_grid_index(std::size_t i) const;
  BlowUpError with_step_index(std::size_t k) const;
  BlowUpError with_partial(std::shared_ptr<const Trajectory> traj) const;

 private:
  double last_finite_time_;
  std::size_t grid_index_ = npos;
  std::size_t step_index_ = npos;
  std::shared_ptr<const Trajectory> partial_;
};

}  // namespace fracrd
