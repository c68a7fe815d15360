#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "porelab/error.hpp"

namespace porelab {

/// Edge length of one voxel of the reference micro-CT scan, in meters.
inline constexpr double kDefaultVoxelSize = 27.8e-6;

enum class Axis : int { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

inline int index_of(Axis a) { return static_cast<int>(a); }

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

inline Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw ValidationError("unknown axis '" + s + "'");
}

struct Dims {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  std::int64_t operator[](int a) const { return a == 0 ? nx : (a == 1 ? ny : nz); }
  std::int64_t operator[](Axis a) const { return (*this)[index_of(a)]; }
  std::int64_t voxels() const { return nx * ny * nz; }
  std::int64_t min_extent() const { return std::min({nx, ny, nz}); }
  bool operator==(const Dims&) const = default;
};

/// x-fastest linear index.
inline std::int64_t linear_index(const Dims& d, std::int64_t x, std::int64_t y, std::int64_t z) {
  return x + d.nx * (y + d.ny * z);
}

/// Per-axis stride of the x-fastest layout.
inline std::int64_t axis_stride(const Dims& d, int a) {
  return a == 0 ? 1 : (a == 1 ? d.nx : d.nx * d.ny);
}

struct GrayTag {};
struct BinaryTag {};

/// Immutable 3D grid of 8-bit values with a physical voxel size.
///
/// `GrayImage3D` holds gray levels in [0, 255]; `BinaryImage3D` holds phase
/// labels (0 = grain, 1 = pore) and rejects any other value on construction.
template <class Tag>
class Volume {
 public:
  Volume() = default;

  Volume(Dims dims, double voxel_size, std::vector<std::uint8_t> data)
      : dims_(dims), voxel_size_(voxel_size), data_(std::move(data)) {
    if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0)
      throw DimensionError("volume dimensions must be positive");
    if (static_cast<std::int64_t>(data_.size()) != dims_.voxels())
      throw DimensionError("volume data holds " + std::to_string(data_.size()) +
                           " values, expected " + std::to_string(dims_.voxels()));
    if (!(voxel_size_ > 0.0)) throw DimensionError("voxel size must be positive");
    if constexpr (std::is_same_v<Tag, BinaryTag>) {
      if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; }))
        throw ValidationError("binary volume labels must be 0 or 1");
    }
  }

  static Volume filled(Dims dims, std::uint8_t value, double voxel_size = kDefaultVoxelSize) {
    return Volume(dims, voxel_size, std::vector<std::uint8_t>(static_cast<std::size_t>(dims.voxels()), value));
  }

  const Dims& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  std::int64_t size() const { return dims_.voxels(); }
  std::span<const std::uint8_t> data() const { return data_; }
  const std::vector<std::uint8_t>& values() const { return data_; }

  std::uint8_t at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data_[static_cast<std::size_t>(linear_index(dims_, x, y, z))];
  }
  std::uint8_t operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  /// Axis-aligned sub-block starting at (x0, y0, z0).
  Volume crop(std::int64_t x0, std::int64_t y0, std::int64_t z0, Dims sub) const {
    if (x0 < 0 || y0 < 0 || z0 < 0 || x0 + sub.nx > dims_.nx || y0 + sub.ny > dims_.ny ||
        z0 + sub.nz > dims_.nz)
      throw DimensionError("crop window exceeds volume bounds");
    std::vector<std::uint8_t> out(static_cast<std::size_t>(sub.voxels()));
    std::size_t o = 0;
    for (std::int64_t z = 0; z < sub.nz; ++z)
      for (std::int64_t y = 0; y < sub.ny; ++y) {
        const auto* row = &data_[static_cast<std::size_t>(linear_index(dims_, x0, y0 + y, z0 + z))];
        std::copy(row, row + sub.nx, out.begin() + static_cast<std::ptrdiff_t>(o));
        o += static_cast<std::size_t>(sub.nx);
      }
    return Volume(sub, voxel_size_, std::move(out));
  }

  /// Central cube of edge `edge`.
  Volume center_crop(std::int64_t edge) const {
    if (edge > dims_.min_extent()) throw DimensionError("center crop larger than volume");
    return crop((dims_.nx - edge) / 2, (dims_.ny - edge) / 2, (dims_.nz - edge) / 2, {edge, edge, edge});
  }

  /// Relabels axes: output axis i is input axis perm[i].
  Volume permuted(std::array<int, 3> perm) const {
    const Dims out{dims_[perm[0]], dims_[perm[1]], dims_[perm[2]]};
    std::vector<std::uint8_t> buf(data_.size());
    std::array<std::int64_t, 3> c{};
    for (c[2] = 0; c[2] < out.nz; ++c[2])
      for (c[1] = 0; c[1] < out.ny; ++c[1])
        for (c[0] = 0; c[0] < out.nx; ++c[0]) {
          std::array<std::int64_t, 3> src{};
          for (int i = 0; i < 3; ++i) src[static_cast<std::size_t>(perm[i])] = c[i];
          buf[static_cast<std::size_t>(linear_index(out, c[0], c[1], c[2]))] = at(src[0], src[1], src[2]);
        }
    return Volume(out, voxel_size_, std::move(buf));
  }

  bool operator==(const Volume& o) const {
    return dims_ == o.dims_ && voxel_size_ == o.voxel_size_ && data_ == o.data_;
  }

 private:
  Dims dims_{};
  double voxel_size_ = kDefaultVoxelSize;
  std::vector<std::uint8_t> data_;
};

using GrayImage3D = Volume<GrayTag>;
using BinaryImage3D = Volume<BinaryTag>;

/// Pore voxel count.
inline std::int64_t pore_count(const BinaryImage3D& bin) {
  std::int64_t n = 0;
  for (auto v : bin.data()) n += v;
  return n;
}

}  // namespace porelab
