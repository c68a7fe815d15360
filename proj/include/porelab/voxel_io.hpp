#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "porelab/error.hpp"
#include "porelab/volume.hpp"

namespace porelab {

/// Which gray phase of a raw scan is the pore space.
enum class PorePolarity { bright, dark };

inline const char* polarity_name(PorePolarity p) { return p == PorePolarity::bright ? "bright" : "dark"; }

inline PorePolarity parse_polarity(const std::string& s) {
  if (s == "bright") return PorePolarity::bright;
  if (s == "dark") return PorePolarity::dark;
  throw ValidationError("pore polarity must be 'bright' or 'dark', got '" + s + "'");
}

/// JSON sidecar accompanying every raw volume: `<file>.json`.
struct VolumeSidecar {
  Dims dims;
  double voxel_size_m = kDefaultVoxelSize;
  PorePolarity pore_polarity = PorePolarity::dark;
  std::string kind = "gray";  // "gray" or "binary"
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
  return std::filesystem::path(raw.string() + ".json");
}

inline nlohmann::ordered_json sidecar_to_json(const VolumeSidecar& s) {
  nlohmann::ordered_json j;
  j["dims"] = {s.dims.nx, s.dims.ny, s.dims.nz};
  j["voxel_size_m"] = s.voxel_size_m;
  j["pore_polarity"] = polarity_name(s.pore_polarity);
  j["kind"] = s.kind;
  return j;
}

inline VolumeSidecar sidecar_from_json(const nlohmann::json& j) {
  VolumeSidecar s;
  try {
    const auto& d = j.at("dims");
    if (!d.is_array() || d.size() != 3) throw FormatError("sidecar 'dims' must be [nx, ny, nz]");
    s.dims = {d[0].get<std::int64_t>(), d[1].get<std::int64_t>(), d[2].get<std::int64_t>()};
    s.voxel_size_m = j.at("voxel_size_m").get<double>();
    s.pore_polarity = parse_polarity(j.at("pore_polarity").get<std::string>());
    if (j.contains("kind")) s.kind = j.at("kind").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed volume sidecar: ") + e.what());
  }
  return s;
}

inline void write_sidecar(const std::filesystem::path& raw, const VolumeSidecar& s) {
  std::ofstream out(sidecar_path(raw));
  if (!out) throw IoError("cannot write sidecar for " + raw.string());
  out << sidecar_to_json(s).dump(2) << '\n';
}

inline std::optional<VolumeSidecar> read_sidecar(const std::filesystem::path& raw) {
  const auto p = sidecar_path(raw);
  if (!std::filesystem::exists(p)) return std::nullopt;
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
  return sidecar_from_json(j);
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed for " + path.string());
}

/// Reads a headerless unsigned 8-bit volume in x-fastest order.
inline GrayImage3D load_volume(const std::filesystem::path& path, Dims dims,
                               double voxel_size = kDefaultVoxelSize) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  auto bytes = read_bytes(path);
  if (static_cast<std::int64_t>(bytes.size()) != dims.voxels())
    throw DimensionError(path.string() + " has " + std::to_string(bytes.size()) + " bytes, dims require " +
                         std::to_string(dims.voxels()));
  return GrayImage3D(dims, voxel_size, std::move(bytes));
}

inline BinaryImage3D load_binary_volume(const std::filesystem::path& path, Dims dims,
                                        double voxel_size = kDefaultVoxelSize) {
  auto g = load_volume(path, dims, voxel_size);
  return BinaryImage3D(g.dims(), g.voxel_size(), g.values());
}

template <class Tag>
void save_volume(const std::filesystem::path& path, const Volume<Tag>& vol) {
  write_bytes(path, vol.data().data(), vol.data().size());
}

template <class Tag>
void save_volume_with_sidecar(const std::filesystem::path& path, const Volume<Tag>& vol, PorePolarity polarity) {
  save_volume(path, vol);
  VolumeSidecar s;
  s.dims = vol.dims();
  s.voxel_size_m = vol.voxel_size();
  s.pore_polarity = polarity;
  s.kind = std::is_same_v<Tag, BinaryTag> ? "binary" : "gray";
  write_sidecar(path, s);
}

}  // namespace porelab
