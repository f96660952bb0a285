#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fracrd/grid.hpp"
#include "fracrd/splitting.hpp"

namespace fracrd {

/// Raw little-endian float64 dump of field.values() (row-major over the grid,
/// then over the real slots of the state).
void write_field(const std::filesystem::path& path, const Field& field);

/// Inverse of write_field; the file size must match the layout exactly.
Field read_field(const std::filesystem::path& path, const GridSpec& grid, std::size_t components,
                 bool is_complex);

nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

/// Writes snapshot_NNNNN.bin (and half_NNNNN.bin when present) plus
/// metadata.json into `dir`. `extra` is merged into the metadata document
/// (model, kernels, monitors...). Returns the metadata written.
nlohmann::json write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                                const nlohmann::json& extra = nlohmann::json::object());

struct LoadedTrajectory {
  Trajectory trajectory;
  nlohmann::json metadata;
};

LoadedTrajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace fracrd
