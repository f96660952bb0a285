#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracrd/grid.hpp"
#include "fracrd/reaction.hpp"
#include "fracrd/splitting.hpp"
#include "fracrd/stable_kernel.hpp"

namespace fracrd {

// Tracking of spatial boundary limits on 1-D grids. On a periodic box the
// two ends see the same background, so a probe follows one reaction ODE
// trajectory started from the background state z0.

/// Number of grid points in each edge band: max(1, floor(fraction * N)).
std::size_t band_width(std::size_t points, double fraction);

struct BoundaryLimits {
  std::vector<double> left;
  std::vector<double> right;
};

/// Mean state over the leftmost and rightmost `fraction` of grid points.
/// Requires a 1-D field and fraction in (0, 0.25).
BoundaryLimits boundary_limits(const Field& field, double fraction = 0.05);

struct AsymptoteSample {
  double time = 0.0;
  std::vector<double> ode_value;
  double band_mean_dev = 0.0;
  double band_max_dev = 0.0;
  /// 2 ||u0 - z0||_inf times the heat-kernel mass beyond the distance that
  /// separates the initial perturbation from the edge bands.
  double tail_mass_bound = 0.0;
};

struct AsymptoteProbe {
  double band_fraction = 0.05;
  std::vector<double> background;
};

/// Compares the edge bands of every snapshot with z(t_k), the reaction flow of
/// the background state. Requires an autonomous model and a 1-D trajectory.
/// `specs` supplies the kernel used for the tail-mass bound (the largest bound
/// over components is reported).
std::vector<AsymptoteSample> track_asymptote(const Trajectory& traj, const ReactionModel& model,
                                             std::span<const KernelSpec> specs,
                                             const AsymptoteProbe& probe, const FlowConfig& cfg);

}  // namespace fracrd
