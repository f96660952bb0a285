#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fracrd/reaction.hpp"
#include "fracrd/splitting.hpp"

namespace fracrd {

using TimeFunction = std::function<double(double)>;

/// { z : |z - center| <= radius(t) } (Euclidean norm over real slots, so the
/// complex modulus for a single complex component).
struct BallRegion {
  std::vector<double> center;
  TimeFunction radius;
  bool increasing = false;
};

/// { z : lower(t) <= z <= upper(t) } for scalar real states.
struct IntervalRegion {
  TimeFunction lower;
  TimeFunction upper;
};

/// Constant box prod_j [-half_widths[j], half_widths[j]].
struct RectangleRegion {
  std::vector<double> half_widths;
};

/// { z : z >= 0, sum_j w_j |z_j| <= radius(t) } on a discretised trait space.
struct PositiveMassBallRegion {
  std::vector<double> weights;
  TimeFunction radius;
  bool increasing = true;
};

/// A time-indexed closed convex family K(t) with its membership tolerance.
class RegionFamily {
 public:
  using Variant = std::variant<BallRegion, IntervalRegion, RectangleRegion, PositiveMassBallRegion>;

  explicit RegionFamily(Variant v, double tolerance = 1e-6);

  static RegionFamily ball(std::vector<double> center, TimeFunction radius, bool increasing = false);
  static RegionFamily ball(std::vector<double> center, double radius);
  static RegionFamily interval(TimeFunction lower, TimeFunction upper);
  static RegionFamily rectangle(std::vector<double> half_widths);
  static RegionFamily positive_mass_ball(std::vector<double> weights, TimeFunction radius);

  const Variant& variant() const noexcept { return v_; }
  std::string name() const;
  double tolerance() const noexcept { return tolerance_; }
  void set_tolerance(double tol) { tolerance_ = tol; }
  /// Slack allowed below zero in the non-negativity part of a positive-mass ball.
  double nonnegativity_tolerance() const noexcept { return 1e-9; }
  bool increasing() const noexcept;

 private:
  Variant v_;
  double tolerance_;
};

struct Membership {
  bool inside = false;
  /// Signed distance surrogate: positive inside, negative outside.
  double margin = 0.0;
};

Membership contains(const RegionFamily& region, double t, std::span<const double> z);

/// (lambda0 + \int_0^t a) exp(\int_0^t b) with both integrals by composite
/// Simpson on `intervals` (even) panels. a and b must be non-negative on the
/// sampled nodes.
double ball_family_lambda(double lambda0, const TimeFunction& a, const TimeFunction& b, double t,
                          std::size_t intervals = 256);

struct FisherEnvelopes {
  double lower = 0.0;
  double upper = 1.0;
};

/// Logistic envelopes a(t), b(t) trapping  u' = chi u (1-u)  started in [a0, b0].
FisherEnvelopes fisher_envelopes(double a0, double b0, double chi, double t);

/// The interval family [a(t), b(t)] built from fisher_envelopes.
RegionFamily fisher_region(double a0, double b0, double chi);

/// Largest outward normal component of the FHN field on each face of the
/// rectangle [-R1, R1] x [-R2, R2]. Every entry must be negative for the
/// rectangle to be invariant.
struct FaceMargins {
  double u_plus = 0.0;   // max_v F1(R1, v)
  double u_minus = 0.0;  // max_v -F1(-R1, v)
  double v_plus = 0.0;   // max_u F2(u, R2)
  double v_minus = 0.0;  // max_u -F2(u, -R2)
  double worst() const;
};

struct FhnRectangle {
  double r1 = 0.0;
  double r2 = 0.0;
  /// Open admissible interval for R2 given R1: (b R1, R1^3 / 2).
  double r2_low = 0.0;
  double r2_high = 0.0;
  FaceMargins certificate;
};

FaceMargins fhn_certificate(double a, double e, double b, double r1, double r2,
                            std::size_t samples = 257);

/// R1 = max(4, sqrt(2b)) + 1, R2 = midpoint of (b R1, R1^3/2), with certificate.
FhnRectangle fhn_rectangle(double a, double e, double b);

/// max{u0_mass, k_+(t) / c_-(t)} for a population model.
double population_lambda(const ReactionModel& model, double u0_mass, double t);

/// Positive-mass ball with radius population_lambda(model, u0_mass, .).
RegionFamily population_region(const ReactionModel& model, double u0_mass);

struct AuditEntry {
  double time = 0.0;
  double worst_margin = 0.0;
  std::size_t worst_point_index = 0;
  bool pass = true;
};

struct AuditReport {
  std::string region;
  double tolerance = 0.0;
  std::vector<AuditEntry> entries;
  bool pass = true;
};

/// Worst margin over grid points for each snapshot; an entry passes iff every
/// point is inside K(t_k) within tolerance.
AuditReport audit_trajectory(const Trajectory& traj, const RegionFamily& region);
AuditReport audit_snapshots(std::span<const double> times, std::span<const Field> snapshots,
                            const RegionFamily& region);

}  // namespace fracrd
