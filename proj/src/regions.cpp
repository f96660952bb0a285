#include "fracrd/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracrd/error.hpp"
#include "fracrd/parallel.hpp"

namespace fracrd {
namespace {

double logistic(double z0, double chi, double t) {
  if (z0 == 0.0) return 0.0;
  // z0 e^{chi t} / (1 + z0 (e^{chi t} - 1)), rearranged to stay finite for large t.
  return z0 / (z0 + (1.0 - z0) * std::exp(-chi * t));
}

double simpson(const TimeFunction& f, double t, std::size_t intervals, const char* name) {
  if (t == 0.0) return 0.0;
  const double dt = t / static_cast<double>(intervals);
  double sum = 0.0;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double v = f(dt * static_cast<double>(i));
    if (!(v >= 0.0)) {
      std::ostringstream msg;
      msg << "ball_family_lambda: " << name << "(t) must be non-negative, got " << v;
      throw ParameterError(msg.str());
    }
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * v;
  }
  return sum * dt / 3.0;
}

}  // namespace

RegionFamily::RegionFamily(Variant v, double tolerance) : v_(std::move(v)), tolerance_(tolerance) {
  if (!(tolerance >= 0.0)) throw ParameterError("region: tolerance must be non-negative");
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BallRegion>) {
          if (!r.radius) throw ParameterError("ball region: missing radius function");
        } else if constexpr (std::is_same_v<T, IntervalRegion>) {
          if (!r.lower || !r.upper) throw ParameterError("interval region: missing endpoint function");
        } else if constexpr (std::is_same_v<T, RectangleRegion>) {
          if (r.half_widths.empty()) throw ParameterError("rectangle region: no bounds");
          for (double R : r.half_widths) {
            if (!(R > 0.0)) throw ParameterError("rectangle region: bounds must be positive");
          }
        } else {
          if (!r.radius) throw ParameterError("positive-mass ball: missing radius function");
          if (r.weights.empty()) throw ParameterError("positive-mass ball: no weights");
        }
      },
      v_);
}

RegionFamily RegionFamily::ball(std::vector<double> center, TimeFunction radius, bool increasing) {
  return RegionFamily(BallRegion{std::move(center), std::move(radius), increasing});
}

RegionFamily RegionFamily::ball(std::vector<double> center, double radius) {
  return ball(std::move(center), [radius](double) { return radius; }, true);
}

RegionFamily RegionFamily::interval(TimeFunction lower, TimeFunction upper) {
  return RegionFamily(IntervalRegion{std::move(lower), std::move(upper)});
}

RegionFamily RegionFamily::rectangle(std::vector<double> half_widths) {
  return RegionFamily(RectangleRegion{std::move(half_widths)});
}

RegionFamily RegionFamily::positive_mass_ball(std::vector<double> weights, TimeFunction radius) {
  return RegionFamily(PositiveMassBallRegion{std::move(weights), std::move(radius), true});
}

std::string RegionFamily::name() const {
  static constexpr const char* names[] = {"ball", "interval", "rectangle", "positive-mass-ball"};
  return names[v_.index()];
}

bool RegionFamily::increasing() const noexcept {
  return std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BallRegion> || std::is_same_v<T, PositiveMassBallRegion>) {
          return r.increasing;
        } else if constexpr (std::is_same_v<T, RectangleRegion>) {
          return true;
        } else {
          return false;
        }
      },
      v_);
}

Membership contains(const RegionFamily& region, double t, std::span<const double> z) {
  const double tol = region.tolerance();
  return std::visit(
      [&](const auto& r) -> Membership {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BallRegion>) {
          if (z.size() != r.center.size()) throw DataError("ball region: state dimension mismatch");
          double d2 = 0.0;
          for (std::size_t i = 0; i < z.size(); ++i) d2 += (z[i] - r.center[i]) * (z[i] - r.center[i]);
          const double margin = r.radius(t) - std::sqrt(d2);
          return {margin >= -tol, margin};
        } else if constexpr (std::is_same_v<T, IntervalRegion>) {
          if (z.size() != 1) throw DataError("interval region: state must be scalar");
          const double margin = std::min(z[0] - r.lower(t), r.upper(t) - z[0]);
          return {margin >= -tol, margin};
        } else if constexpr (std::is_same_v<T, RectangleRegion>) {
          if (z.size() != r.half_widths.size()) throw DataError("rectangle region: state dimension mismatch");
          double margin = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < z.size(); ++i) margin = std::min(margin, r.half_widths[i] - std::abs(z[i]));
          return {margin >= -tol, margin};
        } else {
          if (z.size() != r.weights.size()) throw DataError("positive-mass ball: state dimension mismatch");
          double mass = 0.0;
          double lowest = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < z.size(); ++i) {
            mass += r.weights[i] * std::abs(z[i]);
            lowest = std::min(lowest, z[i]);
          }
          const double mass_margin = r.radius(t) - mass;
          const bool inside = lowest >= -region.nonnegativity_tolerance() && mass_margin >= -tol;
          return {inside, std::min(lowest, mass_margin)};
        }
      },
      region.variant());
}

double ball_family_lambda(double lambda0, const TimeFunction& a, const TimeFunction& b, double t,
                          std::size_t intervals) {
  if (!(lambda0 >= 0.0)) throw ParameterError("ball_family_lambda: lambda0 must be non-negative");
  if (!(t >= 0.0)) throw ParameterError("ball_family_lambda: t must be non-negative");
  if (intervals < 2 || intervals % 2 != 0) {
    throw ParameterError("ball_family_lambda: Simpson needs an even interval count");
  }
  return (lambda0 + simpson(a, t, intervals, "a")) * std::exp(simpson(b, t, intervals, "b"));
}

FisherEnvelopes fisher_envelopes(double a0, double b0, double chi, double t) {
  if (!(chi > 0.0)) throw ParameterError("fisher_envelopes: chi must be positive");
  if (!(a0 >= 0.0 && a0 <= 1.0)) throw ParameterError("fisher_envelopes: a0 must lie in [0,1]");
  if (!(b0 >= 1.0) || !std::isfinite(b0)) throw ParameterError("fisher_envelopes: b0 must be >= 1");
  if (!(t >= 0.0)) throw ParameterError("fisher_envelopes: t must be non-negative");
  return {logistic(a0, chi, t), logistic(b0, chi, t)};
}

RegionFamily fisher_region(double a0, double b0, double chi) {
  fisher_envelopes(a0, b0, chi, 0.0);
  return RegionFamily::interval([=](double t) { return fisher_envelopes(a0, b0, chi, t).lower; },
                                [=](double t) { return fisher_envelopes(a0, b0, chi, t).upper; });
}

double FaceMargins::worst() const { return std::max({u_plus, u_minus, v_plus, v_minus}); }

FaceMargins fhn_certificate(double a, double e, double b, double r1, double r2, std::size_t samples) {
  const ReactionModel model = ReactionModel::fhn(a, e, b);
  if (samples < 2) samples = 2;
  FaceMargins m{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double f[2];
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double v = s * r2;
    const double u = s * r1;
    double z[2] = {r1, v};
    model.evaluate(0.0, z, f);
    m.u_plus = std::max(m.u_plus, f[0]);
    z[0] = -r1;
    model.evaluate(0.0, z, f);
    m.u_minus = std::max(m.u_minus, -f[0]);
    z[0] = u;
    z[1] = r2;
    model.evaluate(0.0, z, f);
    m.v_plus = std::max(m.v_plus, f[1]);
    z[1] = -r2;
    model.evaluate(0.0, z, f);
    m.v_minus = std::max(m.v_minus, -f[1]);
  }
  return m;
}

FhnRectangle fhn_rectangle(double a, double e, double b) {
  ReactionModel::fhn(a, e, b);  // parameter validation
  FhnRectangle r;
  r.r1 = std::max(4.0, std::sqrt(2.0 * b)) + 1.0;
  r.r2_low = b * r.r1;
  r.r2_high = 0.5 * r.r1 * r.r1 * r.r1;
  if (!(r.r2_low < r.r2_high)) throw Error("fhn_rectangle: empty admissible interval for R2");
  r.r2 = 0.5 * (r.r2_low + r.r2_high);
  r.certificate = fhn_certificate(a, e, b, r.r1, r.r2);
  return r;
}

double population_lambda(const ReactionModel& model, double u0_mass, double t) {
  const auto* p = std::get_if<PopulationModel>(&model.variant());
  if (p == nullptr) throw ParameterError("population_lambda: model is not a population model");
  if (!(u0_mass >= 0.0)) throw ParameterError("population_lambda: initial mass must be non-negative");
  const double c = p->c_minus(t);
  if (!(c > 0.0)) throw ParameterError("population_lambda: competition kernel must be positive");
  return std::max(u0_mass, p->k_plus(t) / c);
}

RegionFamily population_region(const ReactionModel& model, double u0_mass) {
  population_lambda(model, u0_mass, 0.0);
  const auto& p = std::get<PopulationModel>(model.variant());
  return RegionFamily::positive_mass_ball(
      p.weights, [model, u0_mass](double t) { return population_lambda(model, u0_mass, t); });
}

AuditReport audit_snapshots(std::span<const double> times, std::span<const Field> snapshots,
                            const RegionFamily& region) {
  if (times.size() != snapshots.size()) throw DataError("audit: times/snapshots size mismatch");
  AuditReport report;
  report.region = region.name();
  report.tolerance = region.tolerance();
  report.entries.resize(snapshots.size());
  parallel_for(snapshots.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Field& u = snapshots[k];
      AuditEntry entry;
      entry.time = times[k];
      entry.worst_margin = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < u.points(); ++p) {
        const Membership m = contains(region, times[k], u.at(p));
        if (m.margin < entry.worst_margin) {
          entry.worst_margin = m.margin;
          entry.worst_point_index = p;
        }
        entry.pass = entry.pass && m.inside;
      }
      report.entries[k] = entry;
    }
  });
  for (const auto& e : report.entries) report.pass = report.pass && e.pass;
  return report;
}

AuditReport audit_trajectory(const Trajectory& traj, const RegionFamily& region) {
  return audit_snapshots(traj.times, traj.snapshots, region);
}

}  // namespace fracrd
