#include "fracrd/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "fracrd/error.hpp"
#include "fracrd/parallel.hpp"

namespace fracrd {
namespace {

// Interpolation bracket for a time-sampled table: value = (1-lam) s0 + lam s1.
struct Bracket {
  std::size_t s0 = 0;
  std::size_t s1 = 0;
  double lam = 0.0;
};

Bracket bracket(const std::vector<double>& times, double t) {
  if (times.size() == 1 || t <= times.front()) return {0, 0, 0.0};
  if (t >= times.back()) return {times.size() - 1, times.size() - 1, 0.0};
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto s1 = static_cast<std::size_t>(it - times.begin());
  const std::size_t s0 = s1 - 1;
  return {s0, s1, (t - times[s0]) / (times[s1] - times[s0])};
}

void validate_population(const PopulationModel& p) {
  const std::size_t n = p.traits();
  if (n == 0) throw ParameterError("population: need at least one trait node");
  if (p.weights.size() != n) throw ParameterError("population: weights/nodes size mismatch");
  double wsum = 0.0;
  for (double w : p.weights) {
    if (!(w > 0.0)) throw ParameterError("population: quadrature weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "population: weights must sum to 1 (got " << wsum << ")";
    throw ParameterError(msg.str());
  }
  const std::size_t s = p.times.size();
  if (s == 0) throw ParameterError("population: need at least one time sample");
  for (std::size_t i = 1; i < s; ++i) {
    if (!(p.times[i] > p.times[i - 1])) throw ParameterError("population: times must increase");
  }
  if (p.k.size() != s || p.M.size() != s || p.C.size() != s) {
    throw ParameterError("population: k, M, C need one table per time sample");
  }
  for (std::size_t t = 0; t < s; ++t) {
    if (p.k[t].size() != n) throw ParameterError("population: k table has wrong length");
    if (p.M[t].size() != n * n || p.C[t].size() != n * n) {
      throw ParameterError("population: M and C tables must be n x n");
    }
    for (double v : p.k[t]) {
      if (!std::isfinite(v)) throw ParameterError("population: k must be finite");
    }
    for (double v : p.M[t]) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("population: M must be >= 0");
    }
    for (double v : p.C[t]) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("population: C must be > 0");
    }
  }
}

// Contribution of one table sample to F, scaled and accumulated into out.
void population_accumulate(const PopulationModel& p, std::size_t s, double scale,
                           std::span<const double> z, std::span<double> out) {
  const std::size_t n = p.traits();
  const auto& k = p.k[s];
  const auto& M = p.M[s];
  const auto& C = p.C[s];
  for (std::size_t i = 0; i < n; ++i) {
    double mutation = 0.0;
    double competition = 0.0;
    const double* Mi = M.data() + i * n;
    const double* Ci = C.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double wz = p.weights[j] * z[j];
      mutation += Mi[j] * wz;
      competition += Ci[j] * wz;
    }
    out[i] += scale * (k[i] * z[i] + mutation - competition * z[i]);
  }
}

// Candidate times where a piecewise-linear table attains its extrema on [0,t].
std::vector<Bracket> extremal_brackets(const std::vector<double>& times, double t) {
  std::vector<Bracket> out;
  for (std::size_t s = 0; s < times.size() && times[s] <= t; ++s) out.push_back({s, s, 0.0});
  out.push_back(bracket(times, t));
  return out;
}

}  // namespace

PopulationModel PopulationModel::uniform_traits(std::size_t n) {
  PopulationModel p;
  p.nodes.resize(n);
  p.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) p.nodes[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return p;
}

double PopulationModel::k_plus(double t) const {
  const std::size_t n = traits();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : extremal_brackets(times, t)) {
    for (std::size_t j = 0; j < n; ++j) {
      auto at = [&](std::size_t s) {
        double v = k[s][j];
        for (std::size_t i = 0; i < n; ++i) v += weights[i] * M[s][i * n + j];
        return v;
      };
      best = std::max(best, (1.0 - b.lam) * at(b.s0) + b.lam * at(b.s1));
    }
  }
  return best;
}

double PopulationModel::c_minus(double t) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : extremal_brackets(times, t)) {
    for (std::size_t e = 0; e < C[b.s0].size(); ++e) {
      best = std::min(best, (1.0 - b.lam) * C[b.s0][e] + b.lam * C[b.s1][e]);
    }
  }
  return best;
}

ReactionModel::ReactionModel(Variant v) : v_(std::move(v)) {
  std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FisherModel>) {
          if (!(m.chi > 0.0)) throw ParameterError("fisher: chi must be positive");
        } else if constexpr (std::is_same_v<T, CglModel>) {
          if (!std::isfinite(m.a) || !std::isfinite(m.b)) throw ParameterError("cgl: a, b must be finite");
          complex_ = true;
        } else if constexpr (std::is_same_v<T, FhnModel>) {
          if (!(m.a > 0.0 && m.a < 1.0)) throw ParameterError("fhn: a must lie in (0,1)");
          if (!(m.e > 0.0)) throw ParameterError("fhn: e must be positive");
          if (!(m.b >= 0.0)) throw ParameterError("fhn: b must be non-negative");
          components_ = 2;
        } else if constexpr (std::is_same_v<T, PopulationModel>) {
          validate_population(m);
          components_ = m.traits();
          autonomous_ = m.times.size() == 1;
        } else {
          if (m.components == 0) throw ParameterError("custom: need at least one component");
          if (!m.rhs) throw ParameterError("custom: missing right-hand side");
          components_ = m.components;
          complex_ = m.is_complex;
          autonomous_ = m.autonomous;
        }
      },
      v_);
}

ReactionModel ReactionModel::fisher(double chi) { return ReactionModel(FisherModel{chi}); }

ReactionModel ReactionModel::cgl(double a, double b) { return ReactionModel(CglModel{a, b, {}, {}}); }

ReactionModel ReactionModel::fhn(double a, double e, double b) {
  return ReactionModel(FhnModel{a, e, b, 1.0, 1.0});
}

ReactionModel ReactionModel::population(PopulationModel p) { return ReactionModel(std::move(p)); }

ReactionModel ReactionModel::zero(std::size_t components, bool is_complex) {
  CustomModel m;
  m.components = components;
  m.is_complex = is_complex;
  m.autonomous = true;
  m.rhs = [](double, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  return ReactionModel(std::move(m));
}

std::string ReactionModel::name() const {
  static constexpr const char* names[] = {"fisher", "cgl", "fhn", "population", "custom"};
  return names[v_.index()];
}

void ReactionModel::evaluate(double t, std::span<const double> z, std::span<double> out) const {
  if (z.size() != width() || out.size() != width()) {
    std::ostringstream msg;
    msg << name() << ": state has " << z.size() << " slots, expected " << width();
    throw DataError(msg.str());
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FisherModel>) {
          out[0] = m.chi * z[0] * (1.0 - z[0]);
        } else if constexpr (std::is_same_v<T, CglModel>) {
          const double re = z[0];
          const double im = z[1];
          const double eta = re * re + im * im;
          const double fr = m.f_real ? m.f_real(eta) : 1.0 - eta;
          const double fi = m.f_imag ? m.f_imag(eta) : m.a - m.b * eta;
          // (fr + i fi)(re + i im)
          out[0] = fr * re - fi * im;
          out[1] = fr * im + fi * re;
        } else if constexpr (std::is_same_v<T, FhnModel>) {
          const double u = z[0];
          const double v = z[1];
          out[0] = (m.a - u) * (u - 1.0) * u - v;
          out[1] = m.e * (m.b * u - v);
        } else if constexpr (std::is_same_v<T, PopulationModel>) {
          std::fill(out.begin(), out.end(), 0.0);
          const Bracket b = bracket(m.times, t);
          if (b.s0 == b.s1 || b.lam == 0.0) {
            population_accumulate(m, b.s0, 1.0, z, out);
          } else {
            population_accumulate(m, b.s0, 1.0 - b.lam, z, out);
            population_accumulate(m, b.s1, b.lam, z, out);
          }
        } else {
          m.rhs(t, z, out);
        }
      },
      v_);
}

void FlowConfig::validate() const {
  if (substeps_per_unit_time == 0) throw ParameterError("flow: substeps_per_unit_time must be >= 1");
}

std::vector<double> evaluate_F(const ReactionModel& model, double t, std::span<const double> z) {
  std::vector<double> out(model.width());
  model.evaluate(t, z, out);
  return out;
}

std::vector<double> nonlinear_flow(const ReactionModel& model, double t0, double t1,
                                   std::span<const double> z0, int factor, const FlowConfig& cfg) {
  cfg.validate();
  if (factor != 1 && factor != 2) throw ParameterError("nonlinear_flow: factor must be 1 or 2");
  if (!(t1 >= t0)) throw ParameterError("nonlinear_flow: need t1 >= t0");
  if (z0.size() != model.width()) throw DataError("nonlinear_flow: initial state has wrong dimension");
  for (double v : z0) {
    if (!std::isfinite(v)) throw DataError("nonlinear_flow: initial state is not finite");
  }

  std::vector<double> z(z0.begin(), z0.end());
  if (t1 == t0) return z;

  const double span = t1 - t0;
  const auto steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(span * static_cast<double>(cfg.substeps_per_unit_time))));
  const double dt = span / static_cast<double>(steps);
  const double f = static_cast<double>(factor);
  const std::size_t w = z.size();
  std::vector<double> k1(w), k2(w), k3(w), k4(w), tmp(w);

  double t = t0;
  for (std::size_t s = 0; s < steps; ++s) {
    t = t0 + static_cast<double>(s) * dt;
    model.evaluate(t, z, k1);
    for (std::size_t i = 0; i < w; ++i) tmp[i] = z[i] + 0.5 * dt * f * k1[i];
    model.evaluate(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < w; ++i) tmp[i] = z[i] + 0.5 * dt * f * k2[i];
    model.evaluate(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < w; ++i) tmp[i] = z[i] + dt * f * k3[i];
    model.evaluate(t + dt, tmp, k4);
    for (std::size_t i = 0; i < w; ++i) {
      const double next = z[i] + dt * f * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
      if (!std::isfinite(next) || std::abs(next) > kBlowUpThreshold) {
        std::ostringstream msg;
        msg << model.name() << ": reaction flow blew up after t = " << t;
        throw BlowUpError(msg.str(), t);
      }
      tmp[i] = next;
    }
    z.swap(tmp);
  }
  return z;
}

Field pointwise_flow(const Field& field, const ReactionModel& model, double t0, double t1,
                     int factor, const FlowConfig& cfg) {
  if (field.width() != model.width() || field.is_complex() != model.is_complex()) {
    throw DataError("pointwise_flow: field layout does not match the model state");
  }
  Field out = field;
  const std::size_t n = field.points();
  // Each chunk stops at its first failure; the lowest grid index wins.
  std::mutex error_mutex;
  std::size_t first_bad = BlowUpError::npos;
  std::optional<BlowUpError> first_error;
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      try {
        const auto z = nonlinear_flow(model, t0, t1, field.at(p), factor, cfg);
        std::copy(z.begin(), z.end(), out.at(p).begin());
      } catch (const BlowUpError& e) {
        std::lock_guard lock(error_mutex);
        if (p < first_bad) {
          first_bad = p;
          first_error = e.with_grid_index(p);
        }
        return;
      }
    }
  });
  if (first_error) throw *first_error;
  return out;
}

}  // namespace fracrd
