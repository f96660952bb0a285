#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fracrd {

/// Origin-centred periodic box: `extent[a]` is the side length L along axis a
/// and `points[a]` the (even) number of samples along it.
///
/// Point coordinates are x_j = -L/2 + j L/N. Discrete Fourier index j maps to
/// the signed wavenumber 2*pi*k/L with k = j for j < N/2 and k = j - N
/// otherwise, so k ranges over {-N/2, ..., N/2-1}.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::vector<double> extent, std::vector<std::size_t> points);

  /// Cubic grid: the same side and point count along each of `dim` axes.
  static GridSpec cube(std::size_t dim, double extent, std::size_t points);

  std::size_t dim() const noexcept { return points_.size(); }
  std::size_t size() const noexcept { return size_; }
  const std::vector<double>& extent() const noexcept { return extent_; }
  const std::vector<std::size_t>& points() const noexcept { return points_; }
  double spacing(std::size_t axis) const { return extent_[axis] / static_cast<double>(points_[axis]); }
  double cell_volume() const;

  /// Coordinate of sample j along `axis`.
  double coordinate(std::size_t axis, std::size_t j) const;
  /// Signed angular wavenumber of Fourier index j along `axis`.
  double wavenumber(std::size_t axis, std::size_t j) const;
  /// Row-major multi-index of a flat point index (last axis fastest).
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  bool operator==(const GridSpec& other) const = default;

 private:
  std::vector<double> extent_;
  std::vector<std::size_t> points_;
  std::size_t size_ = 0;
};

/// Samples of a state-valued function on a periodic grid.
///
/// Each grid point holds `components()` state components; complex fields
/// store every component as an adjacent (re, im) pair. Storage is row-major
/// over the grid, then over the real slots of the state:
///
///     values[point * width() + slot]
///
/// which is the layout written to snapshot files.
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, std::size_t components, bool is_complex);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t components() const noexcept { return components_; }
  bool is_complex() const noexcept { return complex_; }
  /// Real slots per grid point.
  std::size_t width() const noexcept { return components_ * (complex_ ? 2 : 1); }
  std::size_t points() const noexcept { return grid_.size(); }

  std::span<double> at(std::size_t point) { return {values_.data() + point * width(), width()}; }
  std::span<const double> at(std::size_t point) const {
    return {values_.data() + point * width(), width()};
  }
  std::complex<double> complex_at(std::size_t point, std::size_t component) const;

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Fill every point with the same state vector.
  void fill(std::span<const double> state);

  /// max over points of the Euclidean norm of the state (the modulus for a
  /// single complex component).
  double sup_norm() const;
  bool all_finite() const;

 private:
  GridSpec grid_;
  std::size_t components_ = 0;
  bool complex_ = false;
  std::vector<double> values_;
};

/// Euclidean norm of a state vector stored in real slots.
double state_norm(std::span<const double> z);

/// sup over points of the state-norm difference. Fields must share layout.
double sup_distance(const Field& a, const Field& b);

}  // namespace fracrd
