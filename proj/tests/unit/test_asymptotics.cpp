#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracrd/asymptotics.hpp"
#include "fracrd/error.hpp"

using namespace fracrd;

namespace {

Field bump_field(const GridSpec& g, double background, double amp, double radius) {
  Field f(g, 1, false);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.coordinate(0, j);
    const double s = std::abs(x) < radius ? std::pow(std::cos(0.5 * std::numbers::pi * x / radius), 2) : 0.0;
    f.values()[j] = background + amp * s;
  }
  return f;
}

}  // namespace

TEST_CASE("band width and boundary limits") {
  CHECK(band_width(256, 0.05) == 12);
  CHECK(band_width(10, 0.05) == 1);
  CHECK_THROWS_AS(band_width(10, 0.3), ParameterError);

  const GridSpec g = GridSpec::cube(1, 40.0, 200);
  const auto lim = boundary_limits(bump_field(g, 0.2, 0.6, 10.0));
  CHECK(lim.left[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(lim.right[0] == doctest::Approx(0.2).epsilon(1e-15));

  Field ramp(g, 1, false);
  for (std::size_t j = 0; j < g.size(); ++j) ramp.values()[j] = static_cast<double>(j);
  const auto r = boundary_limits(ramp, 0.05);
  CHECK(r.left[0] == doctest::Approx(4.5));
  CHECK(r.right[0] == doctest::Approx(194.5));

  CHECK_THROWS_AS(boundary_limits(Field(GridSpec::cube(2, 1.0, 8), 1, false)), ParameterError);
}

TEST_CASE("constant background follows the ODE") {
  const GridSpec g = GridSpec::cube(1, 20.0, 64);
  const KernelSpec spec[1] = {{1.0, 0.75, 1}};
  const auto model = ReactionModel::fisher(1.0);
  const Field u0 = bump_field(g, 0.2, 0.0, 1.0);
  const auto traj = simulate(u0, model, spec, SplitSchedule(0.125, 8));
  const auto series = track_asymptote(traj, model, spec, AsymptoteProbe{0.05, {0.2}}, FlowConfig{});
  REQUIRE(series.size() == 9);
  for (const auto& s : series) {
    CHECK(s.band_max_dev < 1e-8);
    CHECK(s.tail_mass_bound == 0.0);
  }
  const double z = 0.2 / (0.2 + 0.8 * std::exp(-1.0));
  CHECK(series.back().ode_value[0] == doctest::Approx(z).epsilon(1e-9));
}

TEST_CASE("pure diffusion deviation shrinks with the domain") {
  const KernelSpec spec[1] = {{1.0, 0.75, 1}};
  const auto zero = ReactionModel::zero();
  double dev[2];
  int i = 0;
  for (double L : {20.0, 40.0}) {
    const GridSpec g = GridSpec::cube(1, L, static_cast<std::size_t>(L * 4));
    const auto traj = simulate(bump_field(g, 0.2, 0.6, 2.0), zero, spec, SplitSchedule(0.25, 4));
    const auto series = track_asymptote(traj, zero, spec, AsymptoteProbe{0.05, {0.2}}, FlowConfig{});
    CHECK(series.front().band_max_dev == 0.0);
    CHECK(series.back().band_max_dev <= series.back().tail_mass_bound + 1e-12);
    dev[i++] = series.back().band_max_dev;
  }
  CHECK(dev[1] < dev[0]);
}

TEST_CASE("non-autonomous models are rejected") {
  PopulationModel p = PopulationModel::uniform_traits(2);
  p.times = {0.0, 1.0};
  p.k = {{1.0, 1.0}, {2.0, 2.0}};
  p.M = {std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
  p.C = {std::vector<double>(4, 1.0), std::vector<double>(4, 1.0)};
  const auto model = ReactionModel::population(p);
  const GridSpec g = GridSpec::cube(1, 10.0, 16);
  Trajectory t;
  t.times = {0.0};
  t.snapshots = {Field(g, 2, false)};
  const KernelSpec spec[2] = {{1.0, 1.0, 1}, {1.0, 1.0, 1}};
  CHECK_THROWS_AS(track_asymptote(t, model, spec, AsymptoteProbe{0.05, {0.0, 0.0}}, FlowConfig{}), ParameterError);
}
