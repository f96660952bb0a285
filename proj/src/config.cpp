#include "fracrd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fracrd/error.hpp"
#include "fracrd/trajectory_io.hpp"

namespace fracrd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail("missing '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("bad value for '" + std::string(key) + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

// Scalar or list, broadcast to `n` entries.
std::vector<double> vec_or_scalar(const json& j, std::size_t n, const std::string& what) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  if (j.is_array()) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != n) fail(what + " needs " + std::to_string(n) + " entries");
    return v;
  }
  fail(what + " must be a number or an array");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Rows "t, v1, ..., vm" of a numeric CSV file (blank and '#' lines skipped).
std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open CSV file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail("non-numeric cell '" + cell + "' in " + path.string());
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

GridSpec parse_grid(const json& j) {
  check_keys(j, "grid", {"extent", "points", "L", "N", "dim"});
  try {
    if (j.contains("extent") || j.contains("points")) {
      return GridSpec(get<std::vector<double>>(j, "extent", "grid"),
                      get<std::vector<std::size_t>>(j, "points", "grid"));
    }
    return GridSpec::cube(get_or<std::size_t>(j, "dim", 1, "grid"), get<double>(j, "L", "grid"),
                          get<std::size_t>(j, "N", "grid"));
  } catch (const ParameterError& e) {
    fail(e.what());
  }
}

std::vector<KernelSpec> parse_kernels(const json& j, std::size_t components, std::size_t dim) {
  auto one = [&](const json& k) {
    check_keys(k, "kernel", {"sigma", "beta"});
    KernelSpec s{get<double>(k, "sigma", "kernel"), get_or<double>(k, "beta", 1.0, "kernel"), dim};
    try {
      s.validate();
    } catch (const ParameterError& e) {
      fail(e.what());
    }
    return s;
  };
  if (j.is_object()) return std::vector<KernelSpec>(components, one(j));
  if (!j.is_array()) fail("kernel must be an object or an array");
  if (j.size() != components) {
    fail("kernel list has " + std::to_string(j.size()) + " entries but the model has " +
         std::to_string(components) + " components");
  }
  std::vector<KernelSpec> out;
  for (const auto& k : j) out.push_back(one(k));
  return out;
}

// One n-entry table per time sample, from a scalar, a flat list (single
// time), a list with one scalar or table per time, or a CSV file with rows
// "t, values...".
void population_table(const json& j, const char* key, std::size_t entries, PopulationModel& p,
                      std::vector<std::vector<double>>& table, const fs::path& base) {
  const std::string csv_key = std::string(key) + "_csv";
  if (j.contains(csv_key)) {
    const auto rows = read_csv_rows(resolve(base, get<std::string>(j, csv_key.c_str(), "model")));
    if (rows.size() != p.times.size()) fail(csv_key + " needs one row per time sample");
    for (std::size_t s = 0; s < rows.size(); ++s) {
      if (rows[s].size() != entries + 1) fail(csv_key + " row has the wrong number of columns");
      if (rows[s][0] != p.times[s]) fail(csv_key + " row times must match model.times");
      table.emplace_back(rows[s].begin() + 1, rows[s].end());
    }
    return;
  }
  if (!j.contains(key)) fail(std::string("population model needs '") + key + "' or '" + csv_key + "'");
  const json& v = j.at(key);
  if (v.is_number()) {
    table.assign(p.times.size(), std::vector<double>(entries, v.get<double>()));
  } else if (v.is_array() && !v.empty() && v.front().is_number() && p.times.size() == 1) {
    table.push_back(vec_or_scalar(v, entries, std::string("population ") + key));
  } else if (v.is_array()) {
    if (v.size() != p.times.size()) fail(std::string(key) + " must list one table per time sample");
    for (const auto& row : v) table.push_back(vec_or_scalar(row, entries, std::string("population ") + key));
  } else {
    fail(std::string("bad population table '") + key + "'");
  }
}

double state_mass(std::span<const double> z, const std::vector<double>& w) {
  double m = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) m += w[i] * std::abs(z[i]);
  return m;
}

// Uniform double in [0,1) from the top 53 bits.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

ReactionModel model_from_json(const json& j, const fs::path& base) {
  if (!j.is_object()) fail("model must be an object");
  const auto type = get<std::string>(j, "type", "model");
  try {
    if (type == "fisher") {
      check_keys(j, "model", {"type", "chi"});
      return ReactionModel::fisher(get<double>(j, "chi", "model"));
    }
    if (type == "cgl") {
      check_keys(j, "model", {"type", "a", "b"});
      return ReactionModel::cgl(get_or<double>(j, "a", 0.0, "model"), get_or<double>(j, "b", 0.0, "model"));
    }
    if (type == "fhn") {
      check_keys(j, "model", {"type", "a", "e", "b", "sigma_u", "sigma_v"});
      return ReactionModel(FhnModel{get<double>(j, "a", "model"), get<double>(j, "e", "model"),
                                    get<double>(j, "b", "model"), get_or<double>(j, "sigma_u", 1.0, "model"),
                                    get_or<double>(j, "sigma_v", 1.0, "model")});
    }
    if (type == "zero") {
      check_keys(j, "model", {"type", "components", "complex"});
      return ReactionModel::zero(get_or<std::size_t>(j, "components", 1, "model"),
                                 get_or<bool>(j, "complex", false, "model"));
    }
    if (type == "population") {
      check_keys(j, "model", {"type", "traits", "nodes", "weights", "times", "k", "M", "C", "k_csv",
                              "M_csv", "C_csv"});
      PopulationModel p;
      if (j.contains("nodes")) {
        p.nodes = get<std::vector<double>>(j, "nodes", "model");
        p.weights = j.contains("weights")
                        ? get<std::vector<double>>(j, "weights", "model")
                        : std::vector<double>(p.nodes.size(), 1.0 / static_cast<double>(p.nodes.size()));
      } else {
        p = PopulationModel::uniform_traits(get_or<std::size_t>(j, "traits", 32, "model"));
      }
      p.times = get_or<std::vector<double>>(j, "times", {0.0}, "model");
      const std::size_t n = p.traits();
      population_table(j, "k", n, p, p.k, base);
      population_table(j, "M", n * n, p, p.M, base);
      population_table(j, "C", n * n, p, p.C, base);
      return ReactionModel::population(std::move(p));
    }
  } catch (const ParameterError& e) {
    fail(e.what());
  }
  fail("unknown model type '" + type + "'");
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  check_keys(doc, "config", {"grid", "kernel", "model", "schedule", "flow", "initial", "monitors",
                             "converge", "output", "seed", "keep_half_steps", "kernel_table"});
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.grid = parse_grid(doc.contains("grid") ? doc.at("grid") : json::object({{"L", 2 * std::numbers::pi}, {"N", 64}}));
  cfg.model_json = doc.contains("model") ? doc.at("model") : json{{"type", "zero"}};
  cfg.model = model_from_json(cfg.model_json, base_dir);

  json kernel = doc.value("kernel", json());
  if (kernel.is_null()) {
    if (const auto* f = std::get_if<FhnModel>(&cfg.model.variant())) {
      kernel = json::array({{{"sigma", f->sigma_u}}, {{"sigma", f->sigma_v}}});
    } else {
      kernel = {{"sigma", 1.0}, {"beta", 1.0}};
    }
  }
  cfg.kernels = parse_kernels(kernel, cfg.model.components(), cfg.grid.dim());

  const json sched = doc.value("schedule", json{{"h", 0.1}, {"n", 10}});
  check_keys(sched, "schedule", {"h", "n", "T"});
  cfg.h = get<double>(sched, "h", "schedule");
  try {
    if (sched.contains("T")) {
      const auto s = SplitSchedule::covering(get<double>(sched, "T", "schedule"), cfg.h);
      if (sched.contains("n") && get<std::size_t>(sched, "n", "schedule") != s.n()) {
        fail("schedule: n inconsistent with T / h");
      }
      cfg.n = s.n();
    } else {
      cfg.n = get<std::size_t>(sched, "n", "schedule");
      SplitSchedule(cfg.h, cfg.n);
    }
  } catch (const ParameterError& e) {
    fail(e.what());
  }

  if (doc.contains("flow")) {
    check_keys(doc.at("flow"), "flow", {"substeps_per_unit_time", "tolerance"});
    cfg.flow.substeps_per_unit_time =
        get_or<std::size_t>(doc.at("flow"), "substeps_per_unit_time", 64, "flow");
    cfg.flow.tolerance = get_or<double>(doc.at("flow"), "tolerance", 1e-8, "flow");
    if (cfg.flow.substeps_per_unit_time == 0) fail("flow: substeps_per_unit_time must be >= 1");
  }

  cfg.initial = doc.value("initial", json{{"type", "constant"}, {"value", 0.0}});
  if (!cfg.initial.is_object() || !cfg.initial.contains("type")) fail("initial needs a 'type'");

  if (doc.contains("monitors")) {
    const json& m = doc.at("monitors");
    check_keys(m, "monitors", {"region", "asymptote"});
    if (m.contains("region")) {
      RegionMonitorConfig r;
      r.spec = m.at("region");
      if (!r.spec.is_object() || !r.spec.contains("type")) fail("monitors.region needs a 'type'");
      r.fatal = r.spec.value("fatal", false);
      r.tolerance = r.spec.value("tolerance", 1e-6);
      cfg.region = r;
    }
    if (m.contains("asymptote")) {
      const json& a = m.at("asymptote");
      check_keys(a, "monitors.asymptote", {"band", "background"});
      AsymptoteProbe probe;
      probe.band_fraction = get_or<double>(a, "band", 0.05, "monitors.asymptote");
      if (!(probe.band_fraction > 0.0 && probe.band_fraction < 0.25)) fail("asymptote band must lie in (0, 0.25)");
      probe.background = vec_or_scalar(a.at("background"), cfg.model.width(), "asymptote background");
      cfg.asymptote = probe;
    }
  }

  if (doc.contains("converge")) {
    const json& c = doc.at("converge");
    check_keys(c, "converge", {"T", "h_list"});
    cfg.converge_T = get<double>(c, "T", "converge");
    cfg.h_list = get<std::vector<double>>(c, "h_list", "converge");
  }

  cfg.output = doc.value("output", std::string("out"));
  cfg.seed = doc.value("seed", std::uint64_t{0});
  cfg.keep_half_steps = doc.value("keep_half_steps", false);
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

Field initial_field(const RunConfig& cfg, std::uint64_t seed) {
  const json& j = cfg.initial;
  const auto type = get<std::string>(j, "type", "initial");
  const GridSpec& g = cfg.grid;
  const std::size_t w = cfg.model.width();
  Field u(g, cfg.model.components(), cfg.model.is_complex());
  std::vector<double> x(g.dim());
  auto coords = [&](std::size_t p) {
    const auto idx = g.unflatten(p);
    for (std::size_t a = 0; a < g.dim(); ++a) x[a] = g.coordinate(a, idx[a]);
    return x;
  };

  if (type == "constant") {
    check_keys(j, "initial", {"type", "value"});
    u.fill(vec_or_scalar(j.at("value"), w, "initial value"));
  } else if (type == "cosine") {
    check_keys(j, "initial", {"type", "mode", "amplitude", "offset"});
    const auto mode = get<std::vector<double>>(j, "mode", "initial");
    if (mode.size() != g.dim()) fail("initial.mode needs one entry per axis");
    const auto amp = vec_or_scalar(j.value("amplitude", json(1.0)), w, "initial amplitude");
    const auto off = vec_or_scalar(j.value("offset", json(0.0)), w, "initial offset");
    for (std::size_t p = 0; p < u.points(); ++p) {
      coords(p);
      double phase = 0.0;
      for (std::size_t a = 0; a < g.dim(); ++a) phase += 2.0 * std::numbers::pi * mode[a] * x[a] / g.extent()[a];
      auto s = u.at(p);
      for (std::size_t i = 0; i < w; ++i) s[i] = off[i] + amp[i] * std::cos(phase);
    }
  } else if (type == "logistic_front") {
    check_keys(j, "initial", {"type", "left", "right", "center", "width"});
    const auto left = vec_or_scalar(j.value("left", json(1.0)), w, "initial left");
    const auto right = vec_or_scalar(j.value("right", json(0.0)), w, "initial right");
    const double c = j.value("center", 0.0);
    const double width = j.value("width", 1.0);
    if (!(width > 0.0)) fail("initial.width must be positive");
    for (std::size_t p = 0; p < u.points(); ++p) {
      coords(p);
      const double s = 1.0 / (1.0 + std::exp((x[0] - c) / width));
      auto v = u.at(p);
      for (std::size_t i = 0; i < w; ++i) v[i] = right[i] + (left[i] - right[i]) * s;
    }
  } else if (type == "bump") {
    check_keys(j, "initial", {"type", "background", "amplitude", "center", "radius"});
    const auto bg = vec_or_scalar(j.at("background"), w, "initial background");
    const auto amp = vec_or_scalar(j.at("amplitude"), w, "initial amplitude");
    const auto c = vec_or_scalar(j.value("center", json(0.0)), g.dim(), "initial center");
    const double radius = get<double>(j, "radius", "initial");
    if (!(radius > 0.0)) fail("initial.radius must be positive");
    for (std::size_t p = 0; p < u.points(); ++p) {
      coords(p);
      double r2 = 0.0;
      for (std::size_t a = 0; a < g.dim(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      const double r = std::sqrt(r2);
      const double shape = r < radius ? std::pow(std::cos(0.5 * std::numbers::pi * r / radius), 2) : 0.0;
      auto v = u.at(p);
      for (std::size_t i = 0; i < w; ++i) v[i] = bg[i] + amp[i] * shape;
    }
  } else if (type == "random") {
    check_keys(j, "initial", {"type", "low", "high"});
    const auto lo = vec_or_scalar(j.at("low"), w, "initial low");
    const auto hi = vec_or_scalar(j.at("high"), w, "initial high");
    std::mt19937_64 gen(seed);
    for (std::size_t p = 0; p < u.points(); ++p) {
      auto v = u.at(p);
      for (std::size_t i = 0; i < w; ++i) v[i] = lo[i] + (hi[i] - lo[i]) * unit(gen);
    }
  } else if (type == "random_disk") {
    check_keys(j, "initial", {"type", "radius"});
    if (!cfg.model.is_complex()) fail("random_disk needs a complex model");
    const double radius = get<double>(j, "radius", "initial");
    std::mt19937_64 gen(seed);
    for (std::size_t p = 0; p < u.points(); ++p) {
      auto v = u.at(p);
      for (std::size_t c = 0; c < cfg.model.components(); ++c) {
        const double m = radius * unit(gen);
        const double th = 2.0 * std::numbers::pi * unit(gen);
        v[2 * c] = m * std::cos(th);
        v[2 * c + 1] = m * std::sin(th);
      }
    }
  } else if (type == "file") {
    check_keys(j, "initial", {"type", "path"});
    try {
      u = read_field(resolve(cfg.base_dir, get<std::string>(j, "path", "initial")), g,
                     cfg.model.components(), cfg.model.is_complex());
    } catch (const DataError& e) {
      fail(e.what());
    }
  } else {
    fail("unknown initial condition type '" + type + "'");
  }
  if (!u.all_finite()) fail("initial condition has non-finite values");
  return u;
}

RegionFamily region_from_config(const RunConfig& cfg, const Field& u0) {
  if (!cfg.region) fail("no region monitor configured");
  const json& j = cfg.region->spec;
  const auto type = get<std::string>(j, "type", "monitors.region");
  const std::size_t w = cfg.model.width();
  try {
    std::optional<RegionFamily> region;
    if (type == "fisher_interval") {
      check_keys(j, "monitors.region", {"type", "a0", "b0", "fatal", "tolerance"});
      const auto* f = std::get_if<FisherModel>(&cfg.model.variant());
      if (f == nullptr) fail("fisher_interval needs a fisher model");
      double lo = u0.values().front();
      double hi = lo;
      for (double v : u0.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double a0 = j.value("a0", std::clamp(lo, 0.0, 1.0));
      const double b0 = j.value("b0", std::max(1.0, hi));
      region = fisher_region(a0, b0, f->chi);
    } else if (type == "ball") {
      check_keys(j, "monitors.region", {"type", "center", "radius", "fatal", "tolerance"});
      region = RegionFamily::ball(vec_or_scalar(j.value("center", json(0.0)), w, "region center"),
                                  get<double>(j, "radius", "monitors.region"));
    } else if (type == "interval") {
      check_keys(j, "monitors.region", {"type", "lower", "upper", "fatal", "tolerance"});
      const double lo = get<double>(j, "lower", "monitors.region");
      const double hi = get<double>(j, "upper", "monitors.region");
      if (!(lo <= hi)) fail("interval region needs lower <= upper");
      region = RegionFamily::interval([lo](double) { return lo; }, [hi](double) { return hi; });
    } else if (type == "rectangle") {
      check_keys(j, "monitors.region", {"type", "half_widths", "fatal", "tolerance"});
      region = RegionFamily::rectangle(vec_or_scalar(j.at("half_widths"), w, "region half_widths"));
    } else if (type == "fhn_rectangle") {
      check_keys(j, "monitors.region", {"type", "fatal", "tolerance"});
      const auto* f = std::get_if<FhnModel>(&cfg.model.variant());
      if (f == nullptr) fail("fhn_rectangle needs an fhn model");
      const auto rect = fhn_rectangle(f->a, f->e, f->b);
      region = RegionFamily::rectangle({rect.r1, rect.r2});
    } else if (type == "population") {
      check_keys(j, "monitors.region", {"type", "fatal", "tolerance"});
      const auto* p = std::get_if<PopulationModel>(&cfg.model.variant());
      if (p == nullptr) fail("population region needs a population model");
      double mass = 0.0;
      for (std::size_t q = 0; q < u0.points(); ++q) mass = std::max(mass, state_mass(u0.at(q), p->weights));
      region = population_region(cfg.model, mass);
    } else {
      fail("unknown region type '" + type + "'");
    }
    region->set_tolerance(cfg.region->tolerance);
    return *region;
  } catch (const ParameterError& e) {
    fail(e.what());
  }
}

json describe(const RunConfig& cfg) {
  json kernels = json::array();
  for (const auto& k : cfg.kernels) kernels.push_back({{"sigma", k.sigma}, {"beta", k.beta}, {"dim", k.dim}});
  json d{{"model", cfg.model_json},
         {"kernels", kernels},
         {"flow", {{"substeps_per_unit_time", cfg.flow.substeps_per_unit_time}}},
         {"initial", cfg.initial},
         {"seed", cfg.seed}};
  if (cfg.region) d["region"] = cfg.region->spec;
  return d;
}

}  // namespace fracrd
