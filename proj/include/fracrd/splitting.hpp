#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fracrd/grid.hpp"
#include "fracrd/reaction.hpp"
#include "fracrd/stable_kernel.hpp"

namespace fracrd {

/// Splitting period h and number of periods n; the final time is always n*h.
class SplitSchedule {
 public:
  SplitSchedule(double h, std::size_t n);

  /// Schedule covering [0, T] with period h. Throws ParameterError unless T/h
  /// is an integer to within 1e-9 relative.
  static SplitSchedule covering(double T, double h);

  double h() const noexcept { return h_; }
  std::size_t n() const noexcept { return n_; }
  double final_time() const noexcept { return h_ * static_cast<double>(n_); }
  double time(std::size_t k) const noexcept { return h_ * static_cast<double>(k); }

 private:
  double h_;
  std::size_t n_;
};

/// On/off switch of the linear term: 2 on the first half of each period
/// [kh, kh + h/2), 0 on the second half.
double alpha_h(double h, double t);

/// tau_h(t, t') = \int_{t'}^{t} alpha_h, evaluated in closed form from the
/// primitive A(s) = h (floor(s/h) + 2 min(frac(s/h), 1/2)). Requires t' <= t.
double tau_h(double h, double t, double t_prime);

/// Monitor callback invoked after each period with (k, kh, U_k), including k = 0.
using Monitor = std::function<void(std::size_t k, double t, const Field& u)>;

struct Trajectory {
  SplitSchedule schedule{1.0, 1};
  std::vector<double> times;
  std::vector<Field> snapshots;
  /// V_{k} = S(h) U_{k-1}, k >= 1, when requested.
  std::vector<Field> half_steps;
  std::vector<double> sup_norms;
};

struct SimulationOptions {
  FlowConfig flow;
  bool keep_half_steps = false;
  std::vector<Monitor> monitors;
};

struct SplitStep {
  Field half;  // V_{k+1}
  Field next;  // U_{k+1}
};

/// One Lie-Trotter period: V = S(h) U_k componentwise with each component's
/// kernel, then U_{k+1} = flow of 2F over [kh + h/2, kh + h] applied to V.
SplitStep lie_trotter_step(const Field& u, std::size_t k, const SplitSchedule& sched,
                           std::span<const KernelSpec> specs, const ReactionModel& model,
                           const FlowConfig& cfg);

/// Runs n periods from u0. A blow-up error is rethrown with the step index
/// and the partial trajectory attached.
Trajectory simulate(const Field& u0, const ReactionModel& model, std::span<const KernelSpec> specs,
                    const SplitSchedule& sched, const SimulationOptions& opts = {});

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  /// log(e_{i-1}/e_i) / log(h_{i-1}/h_i); empty on the first row.
  std::optional<double> order;
};

struct ConvergenceTable {
  double reference_h = 0.0;
  std::vector<ConvergenceRow> rows;
  /// Least-squares slope of log(error) against log(h) over all rows.
  double fitted_order = 0.0;
};

/// Self-convergence study at final time T: every h in `h_list` (strictly
/// decreasing, at least three, each dividing T) is compared in sup norm
/// against a run with h_ref = min(h_list)/4.
ConvergenceTable self_convergence(const Field& u0, const ReactionModel& model,
                                  std::span<const KernelSpec> specs, double T,
                                  std::span<const double> h_list, const FlowConfig& cfg = {});

}  // namespace fracrd
