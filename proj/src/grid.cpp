#include "fracrd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracrd/error.hpp"

namespace fracrd {

GridSpec::GridSpec(std::vector<double> extent, std::vector<std::size_t> points)
    : extent_(std::move(extent)), points_(std::move(points)) {
  if (points_.empty() || points_.size() != extent_.size()) {
    throw ParameterError("grid: extent and points must be non-empty and of equal length");
  }
  size_ = 1;
  for (std::size_t a = 0; a < points_.size(); ++a) {
    if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a])) {
      throw ParameterError("grid: extent must be positive and finite");
    }
    if (points_[a] == 0 || points_[a] % 2 != 0) {
      throw ParameterError("grid: point count must be positive and even");
    }
    size_ *= points_[a];
  }
}

GridSpec GridSpec::cube(std::size_t dim, double extent, std::size_t points) {
  return GridSpec(std::vector<double>(dim, extent), std::vector<std::size_t>(dim, points));
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

double GridSpec::coordinate(std::size_t axis, std::size_t j) const {
  return -0.5 * extent_[axis] + static_cast<double>(j) * spacing(axis);
}

double GridSpec::wavenumber(std::size_t axis, std::size_t j) const {
  const auto n = static_cast<long long>(points_[axis]);
  auto k = static_cast<long long>(j);
  if (k >= n / 2) k -= n;
  return 2.0 * std::numbers::pi * static_cast<double>(k) / extent_[axis];
}

std::vector<std::size_t> GridSpec::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t a = dim(); a-- > 0;) {
    idx[a] = flat % points_[a];
    flat /= points_[a];
  }
  return idx;
}

Field::Field(GridSpec grid, std::size_t components, bool is_complex)
    : grid_(std::move(grid)), components_(components), complex_(is_complex) {
  if (components_ == 0) throw ParameterError("field: state dimension must be positive");
  values_.assign(grid_.size() * width(), 0.0);
}

std::complex<double> Field::complex_at(std::size_t point, std::size_t component) const {
  const auto s = at(point);
  if (complex_) return {s[2 * component], s[2 * component + 1]};
  return {s[component], 0.0};
}

void Field::fill(std::span<const double> state) {
  if (state.size() != width()) {
    std::ostringstream msg;
    msg << "field: fill state has " << state.size() << " slots, expected " << width();
    throw DataError(msg.str());
  }
  for (std::size_t p = 0; p < points(); ++p) std::copy(state.begin(), state.end(), at(p).begin());
}

double Field::sup_norm() const {
  double m = 0.0;
  for (std::size_t p = 0; p < points(); ++p) m = std::max(m, state_norm(at(p)));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double state_norm(std::span<const double> z) {
  if (z.size() == 1) return std::abs(z[0]);
  double s = 0.0;
  for (double v : z) s += v * v;
  return std::sqrt(s);
}

double sup_distance(const Field& a, const Field& b) {
  if (a.values().size() != b.values().size() || a.width() != b.width()) {
    throw DataError("sup_distance: fields have different layouts");
  }
  const std::size_t w = a.width();
  std::vector<double> diff(w);
  double m = 0.0;
  for (std::size_t p = 0; p < a.points(); ++p) {
    const auto x = a.at(p);
    const auto y = b.at(p);
    for (std::size_t s = 0; s < w; ++s) diff[s] = x[s] - y[s];
    m = std::max(m, state_norm(diff));
  }
  return m;
}

BlowUpError BlowUpError::with_grid_index(std::size_t i) const {
  std::ostringstream msg;
  msg << what() << " (grid point " << i << ")";
  BlowUpError e(*this);
  static_cast<Error&>(e) = Error(msg.str());
  e.grid_index_ = i;
  return e;
}

BlowUpError BlowUpError::with_step_index(std::size_t k) const {
  std::ostringstream msg;
  msg << what() << " (splitting step " << k << ")";
  BlowUpError e(*this);
  static_cast<Error&>(e) = Error(msg.str());
  e.step_index_ = k;
  return e;
}

BlowUpError BlowUpError::with_partial(std::shared_ptr<const Trajectory> traj) const {
  BlowUpError e(*this);
  e.partial_ = std::move(traj);
  return e;
}

}  // namespace fracrd
