#include "fracrd/trajectory_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fracrd/error.hpp"

namespace fracrd {
namespace {

namespace fs = std::filesystem;

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

std::string numbered(const char* prefix, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu.bin", prefix, k);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

void write_field(const fs::path& path, const Field& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (double v : field.values()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw Error("write failed: " + path.string());
}

Field read_field(const fs::path& path, const GridSpec& grid, std::size_t components, bool is_complex) {
  Field field(grid, components, is_complex);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open snapshot " + path.string());
  const auto expected = field.values().size() * sizeof(double);
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec || size != expected) {
    throw DataError("snapshot " + path.string() + " has " + std::to_string(size) + " bytes, expected " +
                    std::to_string(expected));
  }
  for (double& v : field.values()) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    v = std::bit_cast<double>(to_little(bits));
  }
  if (!in) throw DataError("short read: " + path.string());
  return field;
}

nlohmann::json grid_to_json(const GridSpec& grid) {
  return {{"extent", grid.extent()}, {"points", grid.points()}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  return GridSpec(j.at("extent").get<std::vector<double>>(),
                  j.at("points").get<std::vector<std::size_t>>());
}

nlohmann::json write_trajectory(const fs::path& dir, const Trajectory& traj, const nlohmann::json& extra) {
  if (traj.snapshots.empty()) throw DataError("write_trajectory: empty trajectory");
  fs::create_directories(dir);
  const Field& first = traj.snapshots.front();

  nlohmann::json meta = extra;
  meta["format"] = "fracrd-trajectory-1";
  meta["grid"] = grid_to_json(first.grid());
  meta["components"] = first.components();
  meta["complex"] = first.is_complex();
  meta["layout"] = "little-endian float64, row-major over grid points then state slots";
  meta["schedule"] = {{"h", traj.schedule.h()}, {"n", traj.schedule.n()}, {"T", traj.schedule.final_time()}};
  meta["times"] = traj.times;
  meta["sup_norms"] = traj.sup_norms;

  auto files = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto name = numbered("snapshot", k);
    write_field(dir / name, traj.snapshots[k]);
    files.push_back(name);
  }
  meta["snapshots"] = files;

  auto halves = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.half_steps.size(); ++k) {
    const auto name = numbered("half", k + 1);
    write_field(dir / name, traj.half_steps[k]);
    halves.push_back(name);
  }
  meta["half_steps"] = halves;

  write_text(dir / "metadata.json", meta.dump(2) + "\n");
  return meta;
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
  std::ifstream in(dir / "metadata.json");
  if (!in) throw DataError("no metadata.json in " + dir.string());
  LoadedTrajectory out;
  try {
    out.metadata = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metadata.json: ") + e.what());
  }
  const auto& m = out.metadata;
  try {
    const GridSpec grid = grid_from_json(m.at("grid"));
    const auto comps = m.at("components").get<std::size_t>();
    const bool cplx = m.at("complex").get<bool>();
    Trajectory& t = out.trajectory;
    t.schedule = SplitSchedule(m.at("schedule").at("h").get<double>(),
                               m.at("schedule").at("n").get<std::size_t>());
    t.times = m.at("times").get<std::vector<double>>();
    t.sup_norms = m.value("sup_norms", std::vector<double>{});
    for (const auto& name : m.at("snapshots")) {
      t.snapshots.push_back(read_field(dir / name.get<std::string>(), grid, comps, cplx));
    }
    for (const auto& name : m.value("half_steps", nlohmann::json::array())) {
      t.half_steps.push_back(read_field(dir / name.get<std::string>(), grid, comps, cplx));
    }
    if (t.times.size() != t.snapshots.size()) throw DataError("metadata: times/snapshots mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metadata.json: ") + e.what());
  }
  return out;
}

}  // namespace fracrd
