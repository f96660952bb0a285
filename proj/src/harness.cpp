#include "fracrd/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "fracrd/asymptotics.hpp"
#include "fracrd/error.hpp"
#include "fracrd/parallel.hpp"
#include "fracrd/regions.hpp"
#include "fracrd/splitting.hpp"
#include "fracrd/stable_kernel.hpp"
#include "fracrd/trajectory_io.hpp"

namespace fracrd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << "\n"; }

json audit_to_json(const AuditReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"time", e.time},
                       {"worst_margin", e.worst_margin},
                       {"worst_point_index", e.worst_point_index},
                       {"pass", e.pass}});
  }
  return {{"region", r.region}, {"tolerance", r.tolerance}, {"pass", r.pass}, {"snapshots", entries}};
}

void write_asymptote_csv(const fs::path& path, const std::vector<AsymptoteSample>& samples) {
  auto out = open_out(path);
  const std::size_t w = samples.empty() ? 1 : samples.front().ode_value.size();
  out << "time";
  if (w == 1) {
    out << ",ode_value";
  } else {
    for (std::size_t i = 0; i < w; ++i) out << ",ode_value_" << i;
  }
  out << ",band_mean_dev,band_max_dev,tail_mass_bound\n";
  for (const auto& s : samples) {
    out << num(s.time);
    for (double v : s.ode_value) out << ',' << num(v);
    out << ',' << num(s.band_mean_dev) << ',' << num(s.band_max_dev) << ',' << num(s.tail_mass_bound) << '\n';
  }
}

json run_metadata(const RunConfig& cfg, const char* status) {
  json extra = describe(cfg);
  extra["status"] = status;
  return extra;
}

// Trajectory either from disk or from a fresh simulation of the config.
Trajectory obtain_trajectory(const RunConfig& cfg, const fs::path& trajectory_dir) {
  if (!trajectory_dir.empty()) {
    auto loaded = read_trajectory(trajectory_dir);
    const Field& u0 = loaded.trajectory.snapshots.front();
    if (u0.components() != cfg.model.components() || u0.is_complex() != cfg.model.is_complex()) {
      throw ConfigError("trajectory state layout does not match the configured model");
    }
    return std::move(loaded.trajectory);
  }
  SimulationOptions opts;
  opts.flow = cfg.flow;
  return simulate(initial_field(cfg, cfg.seed), cfg.model, cfg.kernels, cfg.schedule(), opts);
}

double sphere_area(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double mass_beyond(double beta, std::size_t dim, double radius) {
  if (dim == 1) return stable_tail_mass(beta, 1, radius);
  return stable_tail_mass_asymptotic(beta, dim, radius);
}

}  // namespace

void write_kernel_table(std::ostream& out, const KernelTableRequest& req) {
  const KernelSpec spec{req.sigma, req.beta, req.dim};
  spec.validate();
  if (!(req.sigma > 0.0 && req.t > 0.0)) throw ParameterError("kernel-table: sigma and t must be positive");
  if (!(req.range > 0.0) || !std::isfinite(req.range)) throw ParameterError("kernel-table: range must be positive");
  if (req.samples < 3 || req.samples % 2 == 0) throw ParameterError("kernel-table: samples must be odd and >= 3");

  const std::size_t n = req.samples;
  const double dx = 2.0 * req.range / static_cast<double>(n - 1);
  std::vector<double> point(req.dim, 0.0);
  double mass_g = 0.0;
  double mass_G = 0.0;
  out << "x,g_beta,G\n";
  for (std::size_t i = 0; i < n; ++i) {
    // Symmetric sample positions so x = 0 is hit exactly.
    const double x = (static_cast<double>(i) - static_cast<double>(n / 2)) * dx;
    point[0] = x;
    const double g = stable_density(req.beta, req.dim, point);
    const double G = heat_kernel(spec, req.t, point);
    out << num(x) << ',' << num(g) << ',' << num(G) << '\n';

    double weight = (i == 0 || i == n - 1) ? 0.5 * dx : dx;
    if (req.dim > 1) {
      // Radial form on the half line x >= 0.
      if (x < 0.0) continue;
      weight = (i == n / 2 || i == n - 1) ? 0.5 * dx : dx;
      weight *= sphere_area(req.dim) * std::pow(x, static_cast<double>(req.dim - 1));
    }
    mass_g += weight * g;
    mass_G += weight * G;
  }
  const double scale = std::pow(req.sigma * req.t, -0.5 / req.beta);
  mass_g += mass_beyond(req.beta, req.dim, req.range);
  mass_G += mass_beyond(req.beta, req.dim, req.range * scale);
  out << "mass," << num(mass_g) << ',' << num(mass_G) << '\n';
}

int run_simulate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const Field u0 = initial_field(cfg, cfg.seed);
  const SplitSchedule sched = cfg.schedule();
  fs::create_directories(out_dir);

  std::optional<RegionFamily> region;
  if (cfg.region) region = region_from_config(cfg, u0);

  struct Row {
    std::size_t k;
    double t;
    double sup;
    std::optional<AuditEntry> audit;
  };
  std::vector<Row> rows;
  SimulationOptions opts;
  opts.flow = cfg.flow;
  opts.keep_half_steps = cfg.keep_half_steps;
  opts.monitors.push_back([&](std::size_t k, double t, const Field& u) {
    Row r{k, t, u.sup_norm(), std::nullopt};
    if (region) {
      const double times[1] = {t};
      r.audit = audit_snapshots(times, std::span<const Field>(&u, 1), *region).entries.front();
    }
    rows.push_back(std::move(r));
  });

  auto write_monitors = [&] {
    auto out = open_out(out_dir / "monitors.csv");
    out << "k,time,sup_norm" << (region ? ",region_worst_margin,region_pass" : "") << '\n';
    for (const auto& r : rows) {
      out << r.k << ',' << num(r.t) << ',' << num(r.sup);
      if (r.audit) out << ',' << num(r.audit->worst_margin) << ',' << (r.audit->pass ? 1 : 0);
      out << '\n';
    }
  };

  Trajectory traj;
  try {
    traj = simulate(u0, cfg.model, cfg.kernels, sched, opts);
  } catch (const BlowUpError& e) {
    json meta = run_metadata(cfg, "blow-up");
    meta["blow_up"] = {{"message", e.what()}, {"last_finite_time", e.last_finite_time()}};
    if (e.step_index() != BlowUpError::npos) meta["blow_up"]["step_index"] = e.step_index();
    if (e.grid_index() != BlowUpError::npos) meta["blow_up"]["grid_index"] = e.grid_index();
    if (e.partial() && !e.partial()->snapshots.empty()) write_trajectory(out_dir, *e.partial(), meta);
    else write_json(out_dir / "metadata.json", meta);
    write_monitors();
    log << "blow-up: " << e.what() << "\n";
    return kExitBlowUp;
  }

  write_monitors();
  int code = kExitOk;
  json meta = run_metadata(cfg, "ok");
  if (region) {
    const AuditReport report = audit_trajectory(traj, *region);
    write_json(out_dir / "audit.json", audit_to_json(report));
    meta["audit_pass"] = report.pass;
    log << "region " << report.region << ": " << (report.pass ? "pass" : "VIOLATED") << "\n";
    if (!report.pass && cfg.region->fatal) {
      meta["status"] = "region-violation";
      code = kExitRegionViolation;
    }
  }
  if (cfg.asymptote) {
    write_asymptote_csv(out_dir / "asymptote.csv",
                        track_asymptote(traj, cfg.model, cfg.kernels, *cfg.asymptote, cfg.flow));
  }
  write_trajectory(out_dir, traj, meta);
  log << "simulate: " << traj.snapshots.size() << " snapshots, T = " << num(sched.final_time())
      << ", sup|u(T)| = " << num(traj.sup_norms.back()) << "\n";
  return code;
}

int run_converge(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  if (cfg.h_list.empty() || !(cfg.converge_T > 0.0)) {
    throw ConfigError("config: converge needs 'converge': {\"T\": ..., \"h_list\": [...]}");
  }
  const ConvergenceTable table =
      self_convergence(initial_field(cfg, cfg.seed), cfg.model, cfg.kernels, cfg.converge_T, cfg.h_list, cfg.flow);
  fs::create_directories(out_dir);
  auto out = open_out(out_dir / "convergence.csv");
  out << "h,sup_error,order_estimate\n";
  for (const auto& r : table.rows) {
    out << num(r.h) << ',' << num(r.error) << ',' << (r.order ? num(*r.order) : "") << '\n';
    log << "h = " << num(r.h) << "  error = " << num(r.error);
    if (r.order) log << "  order = " << num(*r.order);
    log << "\n";
  }
  write_json(out_dir / "convergence.json",
             {{"T", cfg.converge_T}, {"reference_h", table.reference_h}, {"fitted_order", table.fitted_order}});
  log << "fitted order = " << num(table.fitted_order) << "\n";
  return kExitOk;
}

int run_invariant_audit(const RunConfig& cfg, const fs::path& out_dir, const fs::path& trajectory_dir,
                        std::ostream& log) {
  if (!cfg.region) throw ConfigError("config: invariant-audit needs monitors.region");
  const Trajectory traj = obtain_trajectory(cfg, trajectory_dir);
  const RegionFamily region = region_from_config(cfg, traj.snapshots.front());
  const AuditReport report = audit_trajectory(traj, region);
  fs::create_directories(out_dir);
  write_json(out_dir / "audit.json", audit_to_json(report));
  log << "region " << report.region << ": " << (report.pass ? "pass" : "VIOLATED") << "\n";
  return report.pass ? kExitOk : kExitRegionViolation;
}

int run_asymptote(const RunConfig& cfg, const fs::path& out_dir, const fs::path& trajectory_dir,
                  std::ostream& log) {
  if (!cfg.asymptote) throw ConfigError("config: asymptote needs monitors.asymptote");
  const Trajectory traj = obtain_trajectory(cfg, trajectory_dir);
  const auto samples = track_asymptote(traj, cfg.model, cfg.kernels, *cfg.asymptote, cfg.flow);
  fs::create_directories(out_dir);
  write_asymptote_csv(out_dir / "asymptote.csv", samples);
  if (!samples.empty()) log << "final band max deviation = " << num(samples.back().band_max_dev) << "\n";
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Fractional reaction-diffusion splitting solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string trajectory_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  KernelTableRequest table;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "Run configuration (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads; affects speed only")->check(CLI::PositiveNumber);
  };
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the splitting scheme and write the trajectory");
  auto* converge_cmd = app.add_subcommand("converge", "Self-convergence study over converge.h_list");
  auto* table_cmd = app.add_subcommand("kernel-table", "Tabulate g_beta and G(t, .) as CSV");
  auto* audit_cmd = app.add_subcommand("invariant-audit", "Check every snapshot against the region monitor");
  auto* asym_cmd = app.add_subcommand("asymptote", "Track the edge bands against the reaction ODE");
  common(simulate_cmd, true);
  common(converge_cmd, true);
  common(audit_cmd, true);
  common(asym_cmd, true);
  for (auto* sub : {audit_cmd, asym_cmd}) {
    sub->add_option("--trajectory", trajectory_dir, "Existing trajectory directory (default: simulate)");
  }
  table_cmd->add_option("--beta", table.beta)->required();
  table_cmd->add_option("--sigma", table.sigma);
  table_cmd->add_option("--dim", table.dim);
  table_cmd->add_option("--t", table.t);
  table_cmd->add_option("--range", table.range);
  table_cmd->add_option("--samples", table.samples);
  table_cmd->add_option("--out", out_dir, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    set_thread_count(threads);
    if (table_cmd->parsed()) {
      if (out_dir.empty()) {
        write_kernel_table(std::cout, table);
      } else {
        auto out = open_out(out_dir);
        write_kernel_table(out, table);
      }
      return kExitOk;
    }
    RunConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const fs::path out = out_dir.empty() ? fs::path(cfg.output) : fs::path(out_dir);
    if (simulate_cmd->parsed()) return run_simulate(cfg, out, std::cout);
    if (converge_cmd->parsed()) return run_converge(cfg, out, std::cout);
    if (audit_cmd->parsed()) return run_invariant_audit(cfg, out, trajectory_dir, std::cout);
    return run_asymptote(cfg, out, trajectory_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace fracrd
