#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "fracrd/error.hpp"
#include "fracrd/grid.hpp"
#include "fracrd/trajectory_io.hpp"

using namespace fracrd;
namespace fs = std::filesystem;

TEST_CASE("grid coordinates and wavenumbers") {
  const GridSpec g = GridSpec::cube(1, 10.0, 8);
  CHECK(g.size() == 8);
  CHECK(g.coordinate(0, 0) == -5.0);
  CHECK(g.coordinate(0, 4) == 0.0);
  CHECK(g.spacing(0) == doctest::Approx(1.25));
  const double k0 = 2.0 * std::numbers::pi / 10.0;
  CHECK(g.wavenumber(0, 1) == doctest::Approx(k0));
  CHECK(g.wavenumber(0, 4) == doctest::Approx(-4 * k0));
  CHECK(g.wavenumber(0, 7) == doctest::Approx(-k0));

  const GridSpec g2({2.0, 4.0}, {4, 6});
  CHECK(g2.size() == 24);
  CHECK(g2.cell_volume() == doctest::Approx(0.5 * (4.0 / 6.0)));
  const auto idx = g2.unflatten(13);
  CHECK(idx[0] == 2);
  CHECK(idx[1] == 1);
}

TEST_CASE("grid rejects odd or empty point counts") {
  CHECK_THROWS_AS(GridSpec::cube(1, 1.0, 7), ParameterError);
  CHECK_THROWS_AS(GridSpec::cube(1, 1.0, 0), ParameterError);
  CHECK_THROWS_AS(GridSpec({-1.0}, {8}), ParameterError);
  CHECK_THROWS_AS(GridSpec({1.0, 1.0}, {8}), ParameterError);
}

TEST_CASE("field layout interleaves complex components") {
  Field f(GridSpec::cube(1, 1.0, 4), 2, true);
  CHECK(f.width() == 4);
  f.at(2)[2] = 3.0;
  f.at(2)[3] = -4.0;
  CHECK(f.values()[2 * 4 + 2] == 3.0);
  CHECK(f.complex_at(2, 1) == std::complex<double>(3.0, -4.0));
  CHECK(f.sup_norm() == doctest::Approx(5.0));
  CHECK(f.all_finite());
  f.values()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(f.all_finite());
}

TEST_CASE("snapshot round trip is bit exact") {
  const GridSpec g = GridSpec::cube(2, 3.0, 6);
  Field f(g, 3, false);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> d(-1e300, 1e300);
  for (double& v : f.values()) v = d(gen);
  f.values()[1] = -0.0;
  f.values()[2] = std::numeric_limits<double>::denorm_min();
  const fs::path dir = fs::temp_directory_path() / "fracrd_unit_roundtrip";
  fs::create_directories(dir);
  write_field(dir / "f.bin", f);
  CHECK(fs::file_size(dir / "f.bin") == f.values().size() * 8);
  const Field back = read_field(dir / "f.bin", g, 3, false);
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(back.values()[i]) == std::bit_cast<std::uint64_t>(f.values()[i]));
  }
  CHECK_THROWS_AS(read_field(dir / "f.bin", g, 2, false), DataError);
  fs::remove_all(dir);
}

TEST_CASE("trajectory directory round trip") {
  const GridSpec g = GridSpec::cube(1, 2.0, 4);
  Trajectory t;
  t.schedule = SplitSchedule(0.5, 2);
  for (int k = 0; k < 3; ++k) {
    Field f(g, 1, true);
    for (std::size_t i = 0; i < f.values().size(); ++i) f.values()[i] = k + 0.1 * static_cast<double>(i);
    t.times.push_back(0.5 * k);
    t.sup_norms.push_back(f.sup_norm());
    t.snapshots.push_back(std::move(f));
  }
  const fs::path dir = fs::temp_directory_path() / "fracrd_unit_traj";
  fs::remove_all(dir);
  const auto meta = write_trajectory(dir, t, {{"model", "test"}});
  CHECK(meta["snapshots"].size() == 3);
  CHECK(meta["model"] == "test");
  const auto loaded = read_trajectory(dir);
  CHECK(loaded.trajectory.times == t.times);
  REQUIRE(loaded.trajectory.snapshots.size() == 3);
  CHECK(loaded.trajectory.snapshots[2].values() == t.snapshots[2].values());
  CHECK(loaded.trajectory.snapshots[0].is_complex());
  fs::remove_all(dir);
}
