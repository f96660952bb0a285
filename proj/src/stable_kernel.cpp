#include "fracrd/stable_kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include "fft.hpp"
#include "fracrd/error.hpp"

namespace fracrd {
namespace {

using std::numbers::pi;
using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr double kTailCutoff = 1e-16;
constexpr std::size_t kPanelBudget = 200000;
constexpr double kErrorBudget = 1e-10;

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    std::ostringstream msg;
    msg << "stable kernel: beta must lie in (0,1], got " << beta;
    throw ParameterError(msg.str());
  }
}

void check_dim(std::size_t dim) {
  if (dim == 0) throw ParameterError("stable kernel: dimension must be positive");
}

// Surface area of the unit sphere in R^d.
double sphere_area(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// exp(-r^{2beta}) drops below 1e-16 beyond this radius.
double spectral_cutoff(double beta) { return std::pow(-std::log(kTailCutoff), 0.5 / beta); }

bool is_closed_form(double beta) { return beta == 1.0 || beta == 0.5; }

double closed_form_density(double beta, std::size_t dim, double r) {
  const double d = static_cast<double>(dim);
  if (beta == 1.0) return std::pow(4.0 * pi, -0.5 * d) * std::exp(-0.25 * r * r);
  return std::tgamma(0.5 * (d + 1.0)) * std::pow(pi, -0.5 * (d + 1.0)) *
         std::pow(1.0 + r * r, -0.5 * (d + 1.0));
}

// Bisects [a, b] until the Gauss-Kronrod error estimate drops below `tol`
// (absolute). boost's own refinement is relative, which never terminates
// early on the near-zero panels of an oscillatory integrand.
template <class F>
double refine(F& f, double a, double b, double tol, int depth, double& err_total) {
  double err = 0.0;
  const double v = Kronrod::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol || depth == 0) {
    err_total += err;
    return v;
  }
  const double m = 0.5 * (a + b);
  return refine(f, a, m, 0.5 * tol, depth - 1, err_total) + refine(f, m, b, 0.5 * tol, depth - 1, err_total);
}

// \int_0^cutoff f(r) dr on panels of width <= panel, each refined adaptively.
template <class F>
double panel_integral(F f, double cutoff, double panel, const char* what) {
  const auto count = static_cast<std::size_t>(std::ceil(cutoff / panel));
  if (count > kPanelBudget) {
    std::ostringstream msg;
    msg << what << ": oscillatory quadrature needs " << count << " panels (budget "
        << kPanelBudget << ")";
    throw AccuracyError(msg.str(), std::numeric_limits<double>::infinity());
  }
  const std::size_t n = std::max<std::size_t>(count, 8);
  const double w = cutoff / static_cast<double>(n);
  const double tol = std::max(0.01 * kErrorBudget / static_cast<double>(n), 1e-18);
  double sum = 0.0;
  double err_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += refine(f, w * static_cast<double>(i), w * static_cast<double>(i + 1), tol, 12, err_total);
  }
  if (!(err_total <= kErrorBudget)) {
    std::ostringstream msg;
    msg << what << ": quadrature error estimate " << err_total << " exceeds " << kErrorBudget;
    throw AccuracyError(msg.str(), err_total);
  }
  return sum;
}

}  // namespace

void KernelSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("kernel: sigma must be finite and non-negative");
  }
  check_beta(beta);
  check_dim(dim);
}

double stable_density_quadrature(double beta, std::size_t dim, double radius) {
  check_beta(beta);
  check_dim(dim);
  const double d = static_cast<double>(dim);
  const double r0 = std::abs(radius);
  const double cutoff = spectral_cutoff(beta);

  if (r0 == 0.0) {
    // (2 pi)^{-d} |S^{d-1}| \int_0^inf r^{d-1} e^{-r^{2beta}} dr, in closed form.
    return std::pow(2.0 * pi, -d) * sphere_area(dim) * std::tgamma(d / (2.0 * beta)) /
           (2.0 * beta);
  }

  const double panel = std::min(pi / r0, cutoff / 8.0);
  if (dim == 1) {
    auto f = [&](double r) { return std::cos(r * r0) * std::exp(-std::pow(r, 2.0 * beta)); };
    return panel_integral(f, cutoff, panel, "stable_density") / pi;
  }
  // Hankel form: (2 pi)^{-d/2} |x|^{1-d/2} \int e^{-r^{2beta}} J_{d/2-1}(r|x|) r^{d/2} dr.
  const double nu = 0.5 * d - 1.0;
  auto f = [&](double r) {
    return std::exp(-std::pow(r, 2.0 * beta)) * std::cyl_bessel_j(nu, r * r0) *
           std::pow(r, 0.5 * d);
  };
  return std::pow(2.0 * pi, -0.5 * d) * std::pow(r0, 1.0 - 0.5 * d) *
         panel_integral(f, cutoff, panel, "stable_density");
}

double stable_density_radial(double beta, std::size_t dim, double radius) {
  check_beta(beta);
  check_dim(dim);
  if (!std::isfinite(radius)) throw ParameterError("stable_density: |x| must be finite");
  if (is_closed_form(beta)) return closed_form_density(beta, dim, std::abs(radius));
  // Ringing of the oscillatory quadrature is bounded well below 1e-10.
  return std::max(0.0, stable_density_quadrature(beta, dim, radius));
}

double stable_density(double beta, std::size_t dim, std::span<const double> x) {
  if (x.size() != dim) throw DataError("stable_density: point dimension mismatch");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return stable_density_radial(beta, dim, std::sqrt(r2));
}

double stable_tail_coefficient(double beta, std::size_t dim) {
  check_beta(beta);
  check_dim(dim);
  if (beta == 1.0) return 0.0;
  const double a = 2.0 * beta;
  const double d = static_cast<double>(dim);
  return a * std::pow(2.0, a - 1.0) * std::pow(pi, -0.5 * d - 1.0) * std::sin(0.5 * pi * a) *
         std::tgamma(0.5 * (d + a)) * std::tgamma(0.5 * a);
}

double stable_mass(double beta, std::size_t dim, double radius) {
  check_beta(beta);
  check_dim(dim);
  if (!(radius > 0.0)) throw ParameterError("stable_mass: radius must be positive");
  const double d = static_cast<double>(dim);
  const double area = sphere_area(dim);
  auto f = [&](double r) { return area * std::pow(r, d - 1.0) * stable_density_radial(beta, dim, r); };

  // Unit panels near the origin, then geometric growth to follow the tail.
  double sum = 0.0;
  double a = 0.0;
  double w = 0.5;
  while (a < radius) {
    const double b = std::min(radius, a + w);
    double err = 0.0;
    sum += refine(f, a, b, 1e-10, 10, err);
    a = b;
    if (a >= 4.0) w = std::min(2.0 * w, 0.25 * a);
  }
  return sum + stable_tail_mass_asymptotic(beta, dim, radius);
}

namespace {

// Tail series summed to its smallest term; `omitted` receives the magnitude
// of the last term added, a bound on the truncation error of the sum.
double tail_series(double beta, std::size_t dim, double radius, double& omitted) {
  const double a = 2.0 * beta;
  const double d = static_cast<double>(dim);
  const double log_r = std::log(radius);
  double sum = 0.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 40; ++k) {
    const double ak = a * k;
    const double s = std::sin(0.5 * pi * ak);
    if (std::abs(s) < 1e-15) continue;
    const double log_mag = std::lgamma(0.5 * (ak + d)) + std::lgamma(0.5 * ak + 1.0) - std::lgamma(k + 1.0) +
                           ak * (std::log(2.0) - log_r) - std::log(ak);
    const double term = (k % 2 == 1 ? 1.0 : -1.0) * s * std::exp(log_mag);
    // The series is only asymptotic for beta > 1/2: stop at the smallest term.
    if (std::abs(term) >= last) break;
    sum += term;
    last = std::abs(term);
    if (last < 1e-18 * std::abs(sum)) break;
  }
  const double scale = sphere_area(dim) * std::pow(pi, -0.5 * d - 1.0);
  omitted = scale * last;
  return scale * sum;
}

}  // namespace

double stable_tail_mass_asymptotic(double beta, std::size_t dim, double radius) {
  check_beta(beta);
  check_dim(dim);
  if (!(radius > 0.0)) throw ParameterError("stable_tail_mass_asymptotic: radius must be positive");
  if (beta == 1.0) return 0.0;
  double omitted = 0.0;
  return tail_series(beta, dim, radius, omitted);
}

double stable_tail_mass(double beta, std::size_t dim, double radius) {
  check_beta(beta);
  check_dim(dim);
  if (!(radius >= 0.0)) throw ParameterError("stable_tail_mass: radius must be non-negative");
  if (radius == 0.0) return 1.0;
  if (std::isinf(radius)) return 0.0;

  if (dim == 1) {
    if (beta == 1.0) return std::erfc(0.5 * radius);
    if (beta == 0.5) return (2.0 / pi) * std::atan(1.0 / radius);
    double omitted = 0.0;
    const double series = tail_series(beta, 1, radius, omitted);
    if (omitted < 1e-14) return series;
    const double cutoff = spectral_cutoff(beta);
    const double panel = std::min(pi / radius, cutoff / 8.0);
    if (cutoff / panel > static_cast<double>(kPanelBudget)) {
      return stable_tail_mass_asymptotic(beta, 1, radius);
    }
    auto f = [&](double r) {
      const double s = r == 0.0 ? radius : std::sin(r * radius) / r;
      return s * std::exp(-std::pow(r, 2.0 * beta));
    };
    const double inside = (2.0 / pi) * panel_integral(f, cutoff, panel, "stable_tail_mass");
    return std::clamp(1.0 - inside, 0.0, 1.0);
  }
  const double tail = stable_tail_mass_asymptotic(beta, dim, radius);
  return std::clamp(1.0 - (stable_mass(beta, dim, radius) - tail), 0.0, 1.0);
}

double heat_kernel(const KernelSpec& spec, double t, std::span<const double> x) {
  spec.validate();
  if (!(t > 0.0)) throw ParameterError("heat_kernel: t must be positive");
  if (!(spec.sigma > 0.0)) throw ParameterError("heat_kernel: sigma must be positive");
  if (x.size() != spec.dim) throw DataError("heat_kernel: point dimension mismatch");
  const double st = spec.sigma * t;
  const double scale = std::pow(st, -0.5 / spec.beta);
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::pow(scale, static_cast<double>(spec.dim)) *
         stable_density_radial(spec.beta, spec.dim, scale * std::sqrt(r2));
}

// ---------------------------------------------------------------------------
// Spectral multipliers

namespace {

using CacheKey = std::tuple<double, double, std::vector<double>, std::vector<std::size_t>, double>;

struct MultiplierCache {
  std::shared_mutex mutex;
  std::map<CacheKey, std::shared_ptr<const SpectralMultiplier>> entries;
};

MultiplierCache& multiplier_cache() {
  static MultiplierCache cache;
  return cache;
}

constexpr std::size_t kCacheLimit = 512;

std::shared_ptr<const SpectralMultiplier> build_multiplier(const KernelSpec& spec,
                                                           const GridSpec& grid, double t) {
  std::vector<double> factors(grid.size(), 1.0);
  if (t == 0.0 || spec.sigma == 0.0) return std::make_shared<SpectralMultiplier>(std::move(factors));

  // Precompute squared wavenumbers per axis, then combine over the
  // row-major index.
  std::vector<std::vector<double>> k2(grid.dim());
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    k2[a].resize(grid.points()[a]);
    for (std::size_t j = 0; j < grid.points()[a]; ++j) {
      const double k = grid.wavenumber(a, j);
      k2[a][j] = k * k;
    }
  }
  std::vector<std::size_t> idx(grid.dim(), 0);
  const double st = spec.sigma * t;
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    double xi2 = 0.0;
    for (std::size_t a = 0; a < grid.dim(); ++a) xi2 += k2[a][idx[a]];
    factors[flat] = std::exp(-st * std::pow(xi2, spec.beta));
    for (std::size_t a = grid.dim(); a-- > 0;) {
      if (++idx[a] < grid.points()[a]) break;
      idx[a] = 0;
    }
  }
  return std::make_shared<SpectralMultiplier>(std::move(factors));
}

}  // namespace

std::shared_ptr<const SpectralMultiplier> semigroup_multiplier(const KernelSpec& spec,
                                                               const GridSpec& grid, double t) {
  spec.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ParameterError("semigroup_multiplier: t must be finite and non-negative");
  }
  if (grid.dim() != spec.dim) throw ParameterError("semigroup_multiplier: grid/kernel dimension mismatch");

  auto& cache = multiplier_cache();
  CacheKey key{spec.sigma, spec.beta, grid.extent(), grid.points(), t};
  {
    std::shared_lock lock(cache.mutex);
    if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
  }
  auto m = build_multiplier(spec, grid, t);
  std::unique_lock lock(cache.mutex);
  if (cache.entries.size() >= kCacheLimit) cache.entries.clear();
  auto [it, inserted] = cache.entries.emplace(std::move(key), std::move(m));
  return it->second;
}

std::size_t multiplier_cache_size() {
  auto& cache = multiplier_cache();
  std::shared_lock lock(cache.mutex);
  return cache.entries.size();
}

void clear_multiplier_cache() {
  auto& cache = multiplier_cache();
  std::unique_lock lock(cache.mutex);
  cache.entries.clear();
}

Field apply_semigroup(const Field& field, const KernelSpec& spec, double t) {
  std::vector<KernelSpec> specs(field.components(), spec);
  return apply_semigroup(field, specs, t);
}

Field apply_semigroup(const Field& field, std::span<const KernelSpec> specs, double t) {
  if (specs.size() != field.components()) {
    throw DataError("apply_semigroup: need one kernel spec per state component");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("apply_semigroup: t must be non-negative");
  if (!field.all_finite()) throw DataError("apply_semigroup: field has non-finite values");

  Field out = field;
  if (t == 0.0) return out;

  const GridSpec& grid = field.grid();
  const std::size_t n = grid.size();
  const std::size_t w = field.width();
  std::vector<std::complex<double>> buf(n);
  for (std::size_t c = 0; c < field.components(); ++c) {
    const auto m = semigroup_multiplier(specs[c], grid, t);
    const std::size_t re = field.is_complex() ? 2 * c : c;
    const auto& in = field.values();
    for (std::size_t p = 0; p < n; ++p) {
      buf[p] = {in[p * w + re], field.is_complex() ? in[p * w + re + 1] : 0.0};
    }
    detail::fft_forward(buf, grid.points());
    for (std::size_t p = 0; p < n; ++p) buf[p] *= (*m)[p];
    detail::fft_inverse(buf, grid.points());
    auto& dst = out.values();
    for (std::size_t p = 0; p < n; ++p) {
      dst[p * w + re] = buf[p].real();
      if (field.is_complex()) dst[p * w + re + 1] = buf[p].imag();
    }
  }
  return out;
}

}  // namespace fracrd
