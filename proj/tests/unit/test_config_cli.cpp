#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fracrd/config.hpp"
#include "fracrd/error.hpp"
#include "fracrd/harness.hpp"
#include "fracrd/trajectory_io.hpp"

using namespace fracrd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fracrd_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fracrd");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json fisher_demo() {
  return {{"grid", {{"L", 40.0}, {"N", 128}}},
          {"kernel", {{"sigma", 1.0}, {"beta", 0.75}}},
          {"model", {{"type", "fisher"}, {"chi", 1.0}}},
          {"schedule", {{"h", 0.125}, {"T", 2.0}}},
          {"initial", {{"type", "cosine"}, {"mode", {2}}, {"amplitude", 0.35}, {"offset", 0.55}}},
          {"monitors", {{"region", {{"type", "fisher_interval"}}}}}};
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() || cell == "mass" ? NAN : std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig cfg = parse_config(fisher_demo());
  CHECK(cfg.n == 16);
  CHECK(cfg.kernels.size() == 1);
  CHECK(cfg.kernels[0].beta == 0.75);
  CHECK(cfg.model.name() == "fisher");

  json bad = fisher_demo();
  bad["schedule"] = {{"h", 0.3}, {"T", 1.0}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = fisher_demo();
  bad["colour"] = "blue";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = fisher_demo();
  bad["kernel"] = json::array({{{"sigma", 1.0}}, {{"sigma", 2.0}}});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = fisher_demo();
  bad["model"]["chi"] = -1.0;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = fisher_demo();
  bad["initial"] = {{"type", "file"}, {"path", "/nonexistent/u0.bin"}};
  CHECK_THROWS_AS(initial_field(parse_config(bad), 0), ConfigError);

  json fhn = {{"model", {{"type", "fhn"}, {"a", 0.3}, {"e", 0.1}, {"b", 1.0}, {"sigma_u", 1.0}, {"sigma_v", 0.0}}}};
  const RunConfig f = parse_config(fhn);
  REQUIRE(f.kernels.size() == 2);
  CHECK(f.kernels[1].sigma == 0.0);
}

TEST_CASE("random initial data are seeded") {
  json doc = fisher_demo();
  doc["initial"] = {{"type", "random"}, {"low", 0.2}, {"high", 0.9}};
  const RunConfig cfg = parse_config(doc);
  const Field a = initial_field(cfg, 42);
  const Field b = initial_field(cfg, 42);
  const Field c = initial_field(cfg, 43);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  for (double v : a.values()) {
    CHECK(v >= 0.2);
    CHECK(v < 0.9);
  }
}

TEST_CASE("simulate writes artifacts and is deterministic") {
  const fs::path dir = scratch("simulate");
  const fs::path cfg = write_config(dir, fisher_demo());
  CHECK(cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}) == kExitOk);
  CHECK(cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string(), "--threads", "3"}) == kExitOk);
  for (const char* f : {"metadata.json", "snapshot_00000.bin", "snapshot_00016.bin", "monitors.csv", "audit.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const json audit = json::parse(slurp(dir / "a" / "audit.json"));
  CHECK(audit["pass"] == true);
  CHECK(audit["snapshots"].size() == 17);
  const json meta = json::parse(slurp(dir / "a" / "metadata.json"));
  CHECK(meta["schedule"]["n"] == 16);
  CHECK(meta["model"]["type"] == "fisher");
  CHECK(meta["snapshots"].size() == 17);

  CHECK(cli({"invariant-audit", "--config", cfg.string(), "--out", (dir / "c").string(), "--trajectory",
             (dir / "a").string()}) == kExitOk);
  CHECK(slurp(dir / "c" / "audit.json") == slurp(dir / "a" / "audit.json"));
}

TEST_CASE("zero diffusion reproduces the ODE") {
  const fs::path dir = scratch("sigma0");
  json doc = fisher_demo();
  doc["kernel"] = {{"sigma", 0.0}, {"beta", 0.75}};
  const RunConfig rc = parse_config(doc);
  const Field u0 = initial_field(rc, 0);
  CHECK(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", (dir / "o").string()}) == kExitOk);
  const auto loaded = read_trajectory(dir / "o");
  const Field& uT = loaded.trajectory.snapshots.back();
  for (std::size_t j = 0; j < u0.values().size(); ++j) {
    const double z = u0.values()[j];
    CHECK(std::abs(uT.values()[j] - z / (z + (1 - z) * std::exp(-2.0))) < 1e-8);
  }
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  json doc = fisher_demo();
  doc["schedule"] = {{"h", 0.3}, {"T", 1.0}};
  CHECK(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", (dir / "o").string()}) == kExitConfig);
  CHECK(cli({"simulate", "--config", (dir / "missing.json").string()}) == kExitConfig);
  CHECK(cli({"frobnicate"}) == kExitConfig);

  // u' = u(1-u) from -1 is singular at t = ln 2.
  doc = fisher_demo();
  doc["initial"] = {{"type", "constant"}, {"value", -1.0}};
  doc.erase("monitors");
  CHECK(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", (dir / "blow").string()}) ==
        kExitBlowUp);
  CHECK(fs::exists(dir / "blow" / "metadata.json"));
  CHECK(json::parse(slurp(dir / "blow" / "metadata.json"))["status"] == "blow-up");

  doc = fisher_demo();
  doc["monitors"] = {{"region", {{"type", "interval"}, {"lower", 0.0}, {"upper", 0.5}, {"fatal", true}}}};
  CHECK(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", (dir / "viol").string()}) ==
        kExitRegionViolation);
  doc["monitors"]["region"]["fatal"] = false;
  CHECK(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", (dir / "soft").string()}) == kExitOk);
}

TEST_CASE("kernel table against closed forms") {
  const fs::path dir = scratch("table");
  CHECK(cli({"kernel-table", "--beta", "1", "--t", "0.5", "--range", "12", "--samples", "241", "--out",
             (dir / "g.csv").string()}) == kExitOk);
  std::string header;
  auto rows = read_csv(dir / "g.csv", &header);
  CHECK(header == "x,g_beta,G");
  REQUIRE(rows.size() == 242);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double x = rows[i][0];
    CHECK(std::abs(rows[i][1] - std::exp(-x * x / 4) / std::sqrt(4 * std::numbers::pi)) < 1e-12);
    CHECK(std::abs(rows[i][2] - std::exp(-x * x / 2) / std::sqrt(2 * std::numbers::pi)) < 1e-12);
  }

  CHECK(cli({"kernel-table", "--beta", "0.5", "--range", "12", "--samples", "241", "--out",
             (dir / "p.csv").string()}) == kExitOk);
  rows = read_csv(dir / "p.csv");
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double x = rows[i][0];
    CHECK(std::abs(rows[i][1] - 1.0 / (std::numbers::pi * (1 + x * x))) < 1e-10);
  }

  CHECK(cli({"kernel-table", "--beta", "0.75", "--t", "2", "--range", "20", "--samples", "801", "--out",
             (dir / "s.csv").string()}) == kExitOk);
  rows = read_csv(dir / "s.csv");
  CHECK(std::abs(rows.back()[1] - 1.0) < 1e-6);
  CHECK(std::abs(rows.back()[2] - 1.0) < 1e-6);

  CHECK(cli({"kernel-table", "--beta", "1.5"}) == kExitConfig);
}

TEST_CASE("converge writes the table") {
  const fs::path dir = scratch("converge");
  json doc = fisher_demo();
  doc["model"] = {{"type", "zero"}};
  doc.erase("monitors");
  doc["converge"] = {{"T", 1.0}, {"h_list", {0.25, 0.125, 0.0625}}};
  CHECK(cli({"converge", "--config", write_config(dir, doc).string(), "--out", (dir / "o").string()}) == kExitOk);
  std::string header;
  const auto rows = read_csv(dir / "o" / "convergence.csv", &header);
  CHECK(header == "h,sup_error,order_estimate");
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r[1] <= 1e-12);
}

TEST_CASE("asymptote subcommand") {
  const fs::path dir = scratch("asym");
  json doc = fisher_demo();
  doc["initial"] = {{"type", "bump"}, {"background", 0.2}, {"amplitude", 0.6}, {"radius", 4.0}};
  doc["monitors"] = {{"asymptote", {{"band", 0.05}, {"background", 0.2}}}};
  CHECK(cli({"asymptote", "--config", write_config(dir, doc).string(), "--out", (dir / "o").string()}) == kExitOk);
  std::string header;
  const auto rows = read_csv(dir / "o" / "asymptote.csv", &header);
  CHECK(header == "time,ode_value,band_mean_dev,band_max_dev,tail_mass_bound");
  REQUIRE(rows.size() == 17);
  CHECK(rows.front()[3] == 0.0);
}

TEST_CASE("population kernels from CSV files") {
  const fs::path dir = scratch("pop");
  const std::size_t n = 3;
  {
    std::ofstream k(dir / "k.csv");
    k << "0,1,1,1\n1,2,2,2\n";
    std::ofstream m(dir / "m.csv");
    std::ofstream c(dir / "c.csv");
    for (double t : {0.0, 1.0}) {
      m << t;
      c << t;
      for (std::size_t i = 0; i < n * n; ++i) {
        m << ",0.1";
        c << ",1";
      }
      m << "\n";
      c << "\n";
    }
  }
  json doc = {{"grid", {{"L", 10.0}, {"N", 16}}},
              {"kernel", {{"sigma", 1.0}, {"beta", 0.5}}},
              {"model", {{"type", "population"}, {"traits", n}, {"times", {0.0, 1.0}},
                         {"k_csv", "k.csv"}, {"M_csv", "m.csv"}, {"C_csv", "c.csv"}}},
              {"schedule", {{"h", 0.25}, {"n", 4}}},
              {"initial", {{"type", "constant"}, {"value", 0.5}}},
              {"monitors", {{"region", {{"type", "population"}}}}}};
  const auto cfg_path = write_config(dir, doc);
  const RunConfig cfg = load_config(cfg_path);
  const auto& p = std::get<PopulationModel>(cfg.model.variant());
  CHECK(p.k_plus(1.0) == doctest::Approx(2.1));
  CHECK(cli({"simulate", "--config", cfg_path.string(), "--out", (dir / "o").string()}) == kExitOk);
  CHECK(json::parse(slurp(dir / "o" / "audit.json"))["pass"] == true);
}
