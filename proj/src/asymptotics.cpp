#include "fracrd/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracrd/error.hpp"

namespace fracrd {
namespace {

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 0.25)) {
    throw ParameterError("asymptote: band fraction must lie in (0, 0.25)");
  }
}

double deviation(std::span<const double> u, std::span<const double> z, std::vector<double>& scratch) {
  for (std::size_t s = 0; s < u.size(); ++s) scratch[s] = u[s] - z[s];
  return state_norm(scratch);
}

}  // namespace

std::size_t band_width(std::size_t points, double fraction) {
  check_fraction(fraction);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(points))));
}

BoundaryLimits boundary_limits(const Field& field, double fraction) {
  if (field.grid().dim() != 1) throw ParameterError("boundary_limits: only 1-D fields are supported");
  const std::size_t n = field.points();
  const std::size_t nb = band_width(n, fraction);
  const std::size_t w = field.width();
  BoundaryLimits out{std::vector<double>(w, 0.0), std::vector<double>(w, 0.0)};
  for (std::size_t p = 0; p < nb; ++p) {
    const auto l = field.at(p);
    const auto r = field.at(n - nb + p);
    for (std::size_t s = 0; s < w; ++s) {
      out.left[s] += l[s];
      out.right[s] += r[s];
    }
  }
  for (std::size_t s = 0; s < w; ++s) {
    out.left[s] /= static_cast<double>(nb);
    out.right[s] /= static_cast<double>(nb);
  }
  return out;
}

std::vector<AsymptoteSample> track_asymptote(const Trajectory& traj, const ReactionModel& model,
                                             std::span<const KernelSpec> specs,
                                             const AsymptoteProbe& probe, const FlowConfig& cfg) {
  if (!model.autonomous()) throw ParameterError("track_asymptote: the reaction must be autonomous");
  if (traj.snapshots.empty()) return {};
  const Field& u0 = traj.snapshots.front();
  if (u0.grid().dim() != 1) throw ParameterError("track_asymptote: only 1-D trajectories are supported");
  if (probe.background.size() != model.width()) {
    throw DataError("track_asymptote: background state has wrong dimension");
  }
  if (specs.size() != model.components()) throw DataError("track_asymptote: need one kernel per component");

  const GridSpec& grid = u0.grid();
  const std::size_t n = grid.size();
  const std::size_t nb = band_width(n, probe.band_fraction);
  const double L = grid.extent()[0];
  std::vector<double> scratch(model.width());

  // Distance between the initial perturbation and the nearest band point,
  // measured on the periodic box.
  double amplitude = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    const double dev = deviation(u0.at(p), probe.background, scratch);
    amplitude = std::max(amplitude, dev);
    if (dev <= 1e-12) continue;
    for (std::size_t q : {std::size_t{0}, nb - 1, n - nb, n - 1}) {
      double d = std::abs(grid.coordinate(0, p) - grid.coordinate(0, q));
      d = std::min(d, L - d);
      gap = std::min(gap, d);
    }
  }
  // Band points between the probes above are closer only if the perturbation
  // reaches into the band itself.
  for (std::size_t p = 0; p < n; ++p) {
    const bool in_band = p < nb || p >= n - nb;
    if (in_band && deviation(u0.at(p), probe.background, scratch) > 1e-12) gap = 0.0;
  }

  std::vector<AsymptoteSample> out;
  out.reserve(traj.snapshots.size());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    AsymptoteSample s;
    s.time = traj.times[k];
    s.ode_value = nonlinear_flow(model, 0.0, s.time, probe.background, 1, cfg);
    const Field& u = traj.snapshots[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t p : {i, n - nb + i}) {
        const double dev = deviation(u.at(p), s.ode_value, scratch);
        sum += dev;
        s.band_max_dev = std::max(s.band_max_dev, dev);
      }
    }
    s.band_mean_dev = sum / static_cast<double>(2 * nb);

    if (amplitude > 1e-12) {
      double tail = gap == 0.0 ? 1.0 : 0.0;
      if (gap > 0.0 && std::isfinite(gap) && s.time > 0.0) {
        for (const auto& spec : specs) {
          if (spec.sigma == 0.0) continue;
          const double scaled = gap * std::pow(spec.sigma * s.time, -0.5 / spec.beta);
          tail = std::max(tail, stable_tail_mass(spec.beta, 1, scaled));
        }
      }
      s.tail_mass_bound = 2.0 * amplitude * tail;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fracrd
