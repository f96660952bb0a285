#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fracrd/grid.hpp"

namespace fracrd {

/// Diffusion parameters of  du/dt + sigma (-Laplacian)^beta u = ...
///
/// sigma = 0 is accepted and turns the semigroup into the identity; the heat
/// kernel itself needs sigma * t > 0.
struct KernelSpec {
  double sigma = 1.0;
  double beta = 1.0;
  std::size_t dim = 1;

  void validate() const;
  bool operator==(const KernelSpec&) const = default;
};

// Fourier convention throughout: f^(xi) = \int f(x) e^{-i x.xi} dx, so the
// rotation-invariant stable density g_beta has transform exp(-|xi|^{2 beta}).

/// g_beta(x) for x in R^dim (x.size() == dim).
///
/// beta = 1 (Gaussian) and beta = 1/2 (Poisson kernel) use closed forms; any
/// other beta goes through `stable_density_quadrature`.
double stable_density(double beta, std::size_t dim, std::span<const double> x);

/// g_beta as a function of the radius |x|.
double stable_density_radial(double beta, std::size_t dim, double radius);

/// Radial inverse Fourier transform of exp(-r^{2 beta}) by adaptive
/// Gauss-Kronrod panels of width at most pi/|x|, truncated where
/// exp(-r^{2 beta}) < 1e-16. Valid for every beta in (0,1]; exposed so the
/// closed forms can be checked against it.
///
/// Throws AccuracyError when the panel budget is exhausted (large |x| with
/// small beta) or the accumulated error estimate exceeds 1e-10.
double stable_density_quadrature(double beta, std::size_t dim, double radius);

/// Leading coefficient C of the power-law tail g_beta(x) ~ C |x|^{-dim-2 beta}.
/// Zero for beta = 1.
double stable_tail_coefficient(double beta, std::size_t dim);

/// \int_{|x| < radius} g_beta dx by radial quadrature of the pointwise
/// density, plus the analytic contribution of the tail beyond
/// `radius` (stable_tail_mass_asymptotic). Used as an independent check that
/// the density integrates to 1.
double stable_mass(double beta, std::size_t dim, double radius);

/// \int_{|x| > radius} g_beta dx from the large-|x| expansion of g_beta
/// summed up to its smallest term. Accurate for large radii only; zero for
/// beta = 1.
double stable_tail_mass_asymptotic(double beta, std::size_t dim, double radius);

/// \int_{|x| > radius} g_beta dx. For dim = 1 this is evaluated through the
/// sine-transform identity  \int_{-R}^{R} g = (2/pi) \int_0^inf sin(rR)/r e^{-r^{2beta}} dr
/// (closed forms for beta in {1, 1/2}), switching to stable_tail_mass_asymptotic
/// once its truncation error is below 1e-14 or the panel budget runs out.
double stable_tail_mass(double beta, std::size_t dim, double radius);

/// G_{sigma,beta}(t, x) = (sigma t)^{-dim/(2 beta)} g_beta((sigma t)^{-1/(2 beta)} x).
double heat_kernel(const KernelSpec& spec, double t, std::span<const double> x);

/// Per-mode factors exp(-sigma t |xi|^{2 beta}) on the FFT index layout of a
/// grid. Instances are immutable and shared through the multiplier cache.
class SpectralMultiplier {
 public:
  SpectralMultiplier(std::vector<double> factors) : factors_(std::move(factors)) {}

  std::size_t size() const noexcept { return factors_.size(); }
  double operator[](std::size_t mode) const { return factors_[mode]; }
  std::span<const double> factors() const noexcept { return factors_; }

 private:
  std::vector<double> factors_;
};

/// Multiplier of S(t) for `spec` on `grid`; t = 0 (or sigma = 0) gives all ones.
///
/// Results are memoised by (sigma, beta, grid, t). The cache is safe for
/// concurrent use: lookups share a reader lock, insertion is exclusive.
std::shared_ptr<const SpectralMultiplier> semigroup_multiplier(const KernelSpec& spec,
                                                               const GridSpec& grid, double t);

/// Number of cached multipliers (for tests).
std::size_t multiplier_cache_size();
void clear_multiplier_cache();

/// S(t) applied to every state component with the same kernel.
Field apply_semigroup(const Field& field, const KernelSpec& spec, double t);

/// Product-space semigroup: component j evolves with specs[j]. A complex
/// component is transformed as one complex array. Imaginary round-off from
/// real components is discarded.
Field apply_semigroup(const Field& field, std::span<const KernelSpec> specs, double t);

}  // namespace fracrd
