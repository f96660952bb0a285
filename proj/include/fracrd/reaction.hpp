#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fracrd/grid.hpp"

namespace fracrd {

/// Logistic growth  F(u) = chi u (1 - u).
struct FisherModel {
  double chi = 1.0;
};

/// Complex Ginzburg-Landau type reaction  F(u) = f_R(|u|^2) u + i f_I(|u|^2) u.
/// When the callables are empty the cubic law applies:
/// f_R(eta) = 1 - eta, f_I(eta) = a - b eta, i.e. F(u) = (1+ia)u - (1+ib)|u|^2 u.
struct CglModel {
  double a = 0.0;
  double b = 0.0;
  std::function<double(double)> f_real;
  std::function<double(double)> f_imag;
};

/// FitzHugh-Nagumo kinetics  F(u,v) = ((a-u)(u-1)u - v, e(bu - v)).
struct FhnModel {
  double a = 0.5;
  double e = 1.0;
  double b = 1.0;
  double sigma_u = 1.0;
  double sigma_v = 1.0;
};

/// Trait-structured population on a discretised trait space.
///
/// State component i is the density at trait node `nodes[i]`; `weights` is the
/// quadrature measure (positive, summing to 1). Kernel tables are sampled at
/// `times` and interpolated linearly in between (held constant outside):
///   k[s][i] = k(times[s], theta_i)
///   M[s][i*n + j] = M(times[s], theta_i, theta_j)   (>= 0)
///   C[s][i*n + j] = C(times[s], theta_i, theta_j)   (> 0)
///
/// F_i = k_i z_i + sum_j M_ij w_j z_j - (sum_j C_ij w_j z_j) z_i.
struct PopulationModel {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> times;
  std::vector<std::vector<double>> k;
  std::vector<std::vector<double>> M;
  std::vector<std::vector<double>> C;

  std::size_t traits() const noexcept { return nodes.size(); }

  /// Default discretisation: `n` uniform nodes (cell midpoints) on [0,1].
  static PopulationModel uniform_traits(std::size_t n);

  /// max over samples s with times[s] <= t (plus the interpolated state at t)
  /// and trait j of k_j + sum_i w_i M_ij.
  double k_plus(double t) const;
  /// min over the same samples of every C_ij.
  double c_minus(double t) const;
};

/// User-supplied vector field.
struct CustomModel {
  std::size_t components = 1;
  bool is_complex = false;
  bool autonomous = true;
  std::function<void(double t, std::span<const double> z, std::span<double> out)> rhs;
};

/// A reaction term F(t, z) together with its state layout.
class ReactionModel {
 public:
  using Variant = std::variant<FisherModel, CglModel, FhnModel, PopulationModel, CustomModel>;

  explicit ReactionModel(Variant v);

  static ReactionModel fisher(double chi);
  static ReactionModel cgl(double a, double b);
  static ReactionModel fhn(double a, double e, double b);
  static ReactionModel population(PopulationModel p);
  /// F == 0 on `components` (real or complex) components.
  static ReactionModel zero(std::size_t components = 1, bool is_complex = false);

  const Variant& variant() const noexcept { return v_; }
  std::string name() const;
  std::size_t components() const noexcept { return components_; }
  bool is_complex() const noexcept { return complex_; }
  std::size_t width() const noexcept { return components_ * (complex_ ? 2 : 1); }
  bool autonomous() const noexcept { return autonomous_; }

  /// out = F(t, z). Sizes must equal width().
  void evaluate(double t, std::span<const double> z, std::span<double> out) const;

 private:
  Variant v_;
  std::size_t components_ = 1;
  bool complex_ = false;
  bool autonomous_ = true;
};

struct FlowConfig {
  /// RK4 steps per unit of elapsed time; a flow over [t0, t1] uses
  /// max(1, ceil((t1 - t0) * substeps_per_unit_time)) uniform steps.
  std::size_t substeps_per_unit_time = 64;
  /// Absolute tolerance used when comparing against closed forms.
  double tolerance = 1e-8;

  void validate() const;
};

/// States with a component beyond this magnitude are treated as blown up.
inline constexpr double kBlowUpThreshold = 1e12;

std::vector<double> evaluate_F(const ReactionModel& model, double t, std::span<const double> z);

/// Classical RK4 approximation of  dz/dt = factor * F(t, z),  z(t0) = z0,
/// evaluated at t1. factor is 1 or 2 (the doubled flow of the split scheme).
/// Throws BlowUpError carrying the last time the state was finite.
std::vector<double> nonlinear_flow(const ReactionModel& model, double t0, double t1,
                                   std::span<const double> z0, int factor, const FlowConfig& cfg);

/// nonlinear_flow at every grid point independently. Blow-up errors carry the
/// smallest offending grid index.
Field pointwise_flow(const Field& field, const ReactionModel& model, double t0, double t1,
                     int factor, const FlowConfig& cfg);

}  // namespace fracrd
