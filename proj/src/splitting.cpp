#include "fracrd/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "fracrd/error.hpp"
#include "fracrd/parallel.hpp"

namespace fracrd {
namespace {

void check_h(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("splitting: h must be positive and finite");
}

// Primitive of alpha_h, continuous in s.
double alpha_primitive(double h, double s) {
  const double x = s / h;
  const double q = std::floor(x);
  const double r = x - q;
  return h * (q + 2.0 * std::min(r, 0.5));
}

}  // namespace

SplitSchedule::SplitSchedule(double h, std::size_t n) : h_(h), n_(n) {
  check_h(h);
  if (n == 0) throw ParameterError("splitting: need at least one period");
}

SplitSchedule SplitSchedule::covering(double T, double h) {
  check_h(h);
  if (!(T > 0.0)) throw ParameterError("splitting: final time must be positive");
  const double ratio = T / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << "splitting: h = " << h << " does not divide T = " << T;
    throw ParameterError(msg.str());
  }
  return SplitSchedule(h, static_cast<std::size_t>(n));
}

double alpha_h(double h, double t) {
  check_h(h);
  const double x = t / h;
  return x - std::floor(x) < 0.5 ? 2.0 : 0.0;
}

double tau_h(double h, double t, double t_prime) {
  check_h(h);
  if (t_prime > t) throw ParameterError("tau_h: need t' <= t");
  if (t == t_prime) return 0.0;
  return std::max(0.0, alpha_primitive(h, t) - alpha_primitive(h, t_prime));
}

SplitStep lie_trotter_step(const Field& u, std::size_t k, const SplitSchedule& sched,
                           std::span<const KernelSpec> specs, const ReactionModel& model,
                           const FlowConfig& cfg) {
  const double h = sched.h();
  const double tk = sched.time(k);
  Field half = apply_semigroup(u, specs, h);
  try {
    Field next = pointwise_flow(half, model, tk + 0.5 * h, tk + h, 2, cfg);
    return {std::move(half), std::move(next)};
  } catch (const BlowUpError& e) {
    throw e.with_step_index(k);
  }
}

Trajectory simulate(const Field& u0, const ReactionModel& model, std::span<const KernelSpec> specs,
                    const SplitSchedule& sched, const SimulationOptions& opts) {
  if (!u0.all_finite()) throw DataError("simulate: initial field has non-finite values");
  if (u0.width() != model.width() || u0.is_complex() != model.is_complex()) {
    throw DataError("simulate: initial field layout does not match the model state");
  }
  if (specs.size() != model.components()) {
    throw DataError("simulate: need one kernel spec per state component");
  }
  for (const auto& s : specs) {
    s.validate();
    if (s.dim != u0.grid().dim()) throw ParameterError("simulate: kernel/grid dimension mismatch");
  }

  Trajectory traj;
  traj.schedule = sched;
  traj.times.reserve(sched.n() + 1);
  traj.snapshots.reserve(sched.n() + 1);

  auto record = [&](std::size_t k, Field u) {
    const double t = sched.time(k);
    for (const auto& m : opts.monitors) m(k, t, u);
    traj.times.push_back(t);
    traj.sup_norms.push_back(u.sup_norm());
    traj.snapshots.push_back(std::move(u));
  };

  record(0, u0);
  for (std::size_t k = 0; k < sched.n(); ++k) {
    SplitStep step;
    try {
      step = lie_trotter_step(traj.snapshots.back(), k, sched, specs, model, opts.flow);
    } catch (const BlowUpError& e) {
      throw e.with_partial(std::make_shared<const Trajectory>(std::move(traj)));
    }
    if (opts.keep_half_steps) traj.half_steps.push_back(std::move(step.half));
    record(k + 1, std::move(step.next));
  }
  return traj;
}

ConvergenceTable self_convergence(const Field& u0, const ReactionModel& model,
                                  std::span<const KernelSpec> specs, double T,
                                  std::span<const double> h_list, const FlowConfig& cfg) {
  if (h_list.size() < 3) throw ParameterError("self_convergence: need at least three step sizes");
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (!(h_list[i] < h_list[i - 1])) {
      throw ParameterError("self_convergence: step sizes must be strictly decreasing");
    }
  }
  std::vector<SplitSchedule> schedules;
  for (double h : h_list) schedules.push_back(SplitSchedule::covering(T, h));
  const double h_ref = h_list.back() / 4.0;
  schedules.push_back(SplitSchedule::covering(T, h_ref));

  SimulationOptions opts;
  opts.flow = cfg;
  // Runs are independent; each writes only its own slot.
  std::vector<Field> finals(schedules.size());
  parallel_for(schedules.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      finals[i] = simulate(u0, model, specs, schedules[i], opts).snapshots.back();
    }
  });

  ConvergenceTable table;
  table.reference_h = h_ref;
  const Field& ref = finals.back();
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    ConvergenceRow row{h_list[i], sup_distance(finals[i], ref), std::nullopt};
    if (i > 0) {
      const auto& prev = table.rows.back();
      row.order = std::log(prev.error / row.error) / std::log(prev.h / row.h);
    }
    table.rows.push_back(row);
  }

  double mx = 0.0, my = 0.0;
  for (const auto& r : table.rows) {
    mx += std::log(r.h);
    my += std::log(r.error);
  }
  const double n = static_cast<double>(table.rows.size());
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : table.rows) {
    sxy += (std::log(r.h) - mx) * (std::log(r.error) - my);
    sxx += (std::log(r.h) - mx) * (std::log(r.h) - mx);
  }
  table.fitted_order = sxy / sxx;
  return table;
}

}  // namespace fracrd
