#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fracrd/config.hpp"

namespace fracrd {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitBlowUp = 3,
  kExitRegionViolation = 4,
};

struct KernelTableRequest {
  double beta = 1.0;
  double sigma = 1.0;
  std::size_t dim = 1;
  double t = 1.0;
  double range = 10.0;
  std::size_t samples = 2001;
};

/// CSV rows "x,g,G" on a uniform grid of [-range, range] (along the first
/// axis when dim > 1), followed by "mass,<g>,<G>": trapezoid sums over the
/// samples plus the mass beyond the sampled range.
void write_kernel_table(std::ostream& out, const KernelTableRequest& req);

/// Each returns an exit code and writes its artifacts under `out_dir`.
int run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int run_converge(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int run_invariant_audit(const RunConfig& cfg, const std::filesystem::path& out_dir,
                        const std::filesystem::path& trajectory_dir, std::ostream& log);
int run_asymptote(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  const std::filesystem::path& trajectory_dir, std::ostream& log);

/// Entry point of the `fracrd` command-line tool.
int run_cli(int argc, char** argv);

}  // namespace fracrd
