#include <doctest.h>

#include <cmath>
#include <vector>

#include "fracrd/error.hpp"
#include "fracrd/reaction.hpp"

using namespace fracrd;

namespace {

double logistic(double z0, double chi, double t) { return z0 / (z0 + (1 - z0) * std::exp(-chi * t)); }

ReactionModel square_model() {
  CustomModel m;
  m.rhs = [](double, std::span<const double> z, std::span<double> out) { out[0] = z[0] * z[0]; };
  return ReactionModel(m);
}

PopulationModel constant_population(std::size_t n, double k, double M, double C) {
  PopulationModel p = PopulationModel::uniform_traits(n);
  p.times = {0.0};
  p.k = {std::vector<double>(n, k)};
  p.M = {std::vector<double>(n * n, M)};
  p.C = {std::vector<double>(n * n, C)};
  return p;
}

}  // namespace

TEST_CASE("fisher flow matches the logistic closed form") {
  const auto m = ReactionModel::fisher(1.7);
  FlowConfig cfg;
  cfg.substeps_per_unit_time = 1024;
  for (double z0 : {0.0, 0.05, 0.5, 1.0, 1.8}) {
    for (double t : {0.1, 1.0, 3.0}) {
      const double z[1] = {z0};
      CAPTURE(z0);
      CAPTURE(t);
      CHECK(std::abs(nonlinear_flow(m, 0.0, t, z, 1, cfg)[0] - logistic(z0, 1.7, t)) < 1e-9);
      CHECK(std::abs(nonlinear_flow(m, 0.0, t / 2, z, 2, cfg)[0] - logistic(z0, 1.7, t)) < 1e-9);
    }
  }
}

TEST_CASE("RK4 is fourth order") {
  const auto m = ReactionModel::fisher(3.0);
  const double z[1] = {0.1};
  const double exact = logistic(0.1, 3.0, 1.0);
  FlowConfig coarse;
  coarse.substeps_per_unit_time = 8;
  FlowConfig fine;
  fine.substeps_per_unit_time = 16;
  const double e1 = std::abs(nonlinear_flow(m, 0.0, 1.0, z, 1, coarse)[0] - exact);
  const double e2 = std::abs(nonlinear_flow(m, 0.0, 1.0, z, 1, fine)[0] - exact);
  CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("CGL modulus and phase") {
  const double a = 0.7;
  const double b = 1.3;
  const auto m = ReactionModel::cgl(a, b);
  CHECK(m.is_complex());
  CHECK(m.width() == 2);
  const double r0 = 0.3;
  const double th0 = 0.4;
  const double z[2] = {r0 * std::cos(th0), r0 * std::sin(th0)};
  const double t = 2.0;
  FlowConfig cfg;
  cfg.substeps_per_unit_time = 256;
  const auto out = nonlinear_flow(m, 0.0, t, z, 1, cfg);
  // rho = |u|^2 solves rho' = 2 rho (1 - rho); the phase turns at a - b rho.
  const double rho0 = r0 * r0;
  const double rho = rho0 / (rho0 + (1 - rho0) * std::exp(-2 * t));
  const double theta = th0 + a * t - 0.5 * b * std::log(rho0 * std::exp(2 * t) + 1 - rho0);
  CHECK(out[0] * out[0] + out[1] * out[1] == doctest::Approx(rho).epsilon(1e-10));
  CHECK(std::atan2(out[1], out[0]) == doctest::Approx(std::remainder(theta, 2 * M_PI)).epsilon(1e-9));
}

TEST_CASE("FHN and population right-hand sides") {
  const auto f = ReactionModel::fhn(0.3, 0.2, 1.5);
  const double z[2] = {0.8, -0.4};
  const auto F = evaluate_F(f, 0.0, z);
  CHECK(F[0] == doctest::Approx((0.3 - 0.8) * (0.8 - 1) * 0.8 + 0.4));
  CHECK(F[1] == doctest::Approx(0.2 * (1.5 * 0.8 + 0.4)));

  PopulationModel p;
  p.nodes = {0.0, 0.5, 1.0};
  p.weights = {0.25, 0.5, 0.25};
  p.times = {0.0};
  p.k = {{1.0, -0.5, 2.0}};
  p.M = {{0.0, 1.0, 0.0, 0.5, 0.0, 0.5, 0.0, 1.0, 0.0}};
  p.C = {{1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 3.0, 1.0, 2.0}};
  const auto pm = ReactionModel::population(p);
  const double u[3] = {0.2, 1.0, 0.4};
  const auto G = evaluate_F(pm, 0.0, u);
  for (int i = 0; i < 3; ++i) {
    double mut = 0.0;
    double comp = 0.0;
    for (int j = 0; j < 3; ++j) {
      mut += p.M[0][3 * i + j] * p.weights[j] * u[j];
      comp += p.C[0][3 * i + j] * p.weights[j] * u[j];
    }
    CHECK(G[i] == doctest::Approx(p.k[0][i] * u[i] + mut - comp * u[i]));
  }
}

TEST_CASE("population extrema") {
  const auto base = constant_population(8, 1.0, 0.0, 1.0);
  CHECK(base.k_plus(1.0) == doctest::Approx(1.0));
  CHECK(base.c_minus(1.0) == doctest::Approx(1.0));
  const auto mutated = constant_population(8, 1.0, 0.5, 1.0);
  CHECK(mutated.k_plus(0.0) == doctest::Approx(1.5));

  // Two samples: k rises from 1 to 3 over [0, 2]; at t = 1 the interpolant is 2.
  PopulationModel p = constant_population(2, 1.0, 0.0, 2.0);
  p.times = {0.0, 2.0};
  p.k.push_back({3.0, 3.0});
  p.M.push_back(p.M[0]);
  p.C.push_back({1.0, 1.0, 1.0, 1.0});
  CHECK(p.k_plus(1.0) == doctest::Approx(2.0));
  CHECK(p.c_minus(1.0) == doctest::Approx(1.5));
  CHECK(p.k_plus(5.0) == doctest::Approx(3.0));
  CHECK_FALSE(ReactionModel::population(p).autonomous());

  auto bad = constant_population(4, 1.0, 0.0, 1.0);
  bad.C[0][5] = 0.0;
  CHECK_THROWS_AS(ReactionModel::population(bad), ParameterError);
}

TEST_CASE("blow-up is reported with the last finite time") {
  const auto m = square_model();
  const double z[1] = {1.0};
  try {
    nonlinear_flow(m, 0.0, 2.0, z, 1, FlowConfig{});
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    // The exact solution 1/(1-t) is singular at t = 1; RK4 steps straddle it.
    CHECK(e.last_finite_time() <= 1.0 + 1.0 / 64);
    CHECK(e.last_finite_time() > 0.9);
  }

  Field f(GridSpec::cube(1, 1.0, 4), 1, false);
  f.values() = {0.1, 0.1, 3.0, 2.0};
  try {
    pointwise_flow(f, m, 0.0, 1.0, 1, FlowConfig{});
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.grid_index() == 2);
  }
}

TEST_CASE("flow edge cases") {
  const auto m = ReactionModel::fisher(1.0);
  const double z[1] = {0.3};
  CHECK(nonlinear_flow(m, 2.0, 2.0, z, 1, FlowConfig{})[0] == 0.3);
  CHECK_THROWS_AS(nonlinear_flow(m, 1.0, 0.5, z, 1, FlowConfig{}), ParameterError);
  CHECK_THROWS_AS(nonlinear_flow(m, 0.0, 1.0, z, 3, FlowConfig{}), ParameterError);
  const double two[2] = {0.1, 0.2};
  CHECK_THROWS_AS(nonlinear_flow(m, 0.0, 1.0, two, 1, FlowConfig{}), DataError);
  CHECK_THROWS_AS(ReactionModel::fisher(0.0), ParameterError);
  CHECK_THROWS_AS(ReactionModel::fhn(1.2, 1.0, 1.0), ParameterError);

  const auto zero = ReactionModel::zero(2, true);
  const double c[4] = {1.0, -2.0, 3.0, 0.5};
  const auto out = nonlinear_flow(zero, 0.0, 5.0, c, 2, FlowConfig{});
  CHECK(std::vector<double>(c, c + 4) == out);
}
