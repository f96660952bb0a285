#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracrd/asymptotics.hpp"
#include "fracrd/grid.hpp"
#include "fracrd/reaction.hpp"
#include "fracrd/regions.hpp"
#include "fracrd/splitting.hpp"
#include "fracrd/stable_kernel.hpp"

namespace fracrd {

/// Region monitor settings. `spec` keeps the JSON descriptor because some
/// regions (fisher envelopes, population mass ball) depend on u0.
struct RegionMonitorConfig {
  nlohmann::json spec;
  bool fatal = false;
  double tolerance = 1e-6;
};

/// Everything needed to reproduce a run, parsed from one JSON document.
///
/// Document layout (keys not listed are rejected):
///
///     {
///       "grid":     {"extent": [L...], "points": [N...]}   or {"L": L, "N": N, "dim": d},
///       "kernel":   {"sigma": s, "beta": b}  or  [{...} per component],
///       "model":    {"type": "fisher" | "cgl" | "fhn" | "population" | "zero", ...},
///       "schedule": {"h": h, "n": n}  or  {"h": h, "T": T},
///       "flow":     {"substeps_per_unit_time": 64},
///       "initial":  {"type": "constant" | "cosine" | "logistic_front" | "bump" |
///                    "random" | "random_disk" | "file", ...},
///       "monitors": {"region": {...}, "asymptote": {"band": 0.05, "background": [...]}},
///       "converge": {"T": T, "h_list": [...]},
///       "output": "dir", "seed": 0, "keep_half_steps": false
///     }
struct RunConfig {
  GridSpec grid;
  std::vector<KernelSpec> kernels;
  ReactionModel model = ReactionModel::zero();
  nlohmann::json model_json;
  double h = 0.1;
  std::size_t n = 1;
  FlowConfig flow;
  nlohmann::json initial;
  std::optional<RegionMonitorConfig> region;
  std::optional<AsymptoteProbe> asymptote;
  double converge_T = 0.0;
  std::vector<double> h_list;
  std::string output = "out";
  std::uint64_t seed = 0;
  bool keep_half_steps = false;
  std::filesystem::path base_dir;

  SplitSchedule schedule() const { return SplitSchedule(h, n); }
};

/// Parses and validates a config document. Relative file paths resolve
/// against `base_dir`. Throws ConfigError on any schema or consistency error.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

ReactionModel model_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Builds u0 from the "initial" descriptor. Random descriptors draw from a
/// mt19937_64 seeded with `seed`, mapped to doubles with 53-bit resolution so
/// the field is identical across platforms.
Field initial_field(const RunConfig& cfg, std::uint64_t seed);

/// Region family for the configured monitor, resolved against u0.
RegionFamily region_from_config(const RunConfig& cfg, const Field& u0);

/// JSON echo of the run settings recorded in trajectory metadata.
nlohmann::json describe(const RunConfig& cfg);

}  // namespace fracrd
