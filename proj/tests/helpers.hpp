#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "porelab/volume.hpp"

namespace porelab::testing {

inline BinaryImage3D random_binary(Dims d, double p, std::uint64_t seed, double h = 1.0) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pore(p);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(d.voxels()));
  for (auto& x : v) x = pore(rng) ? 1 : 0;
  return BinaryImage3D(d, h, std::move(v));
}

inline GrayImage3D random_gray(Dims d, std::uint64_t seed, double h = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> g(0, 255);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(d.voxels()));
  for (auto& x : v) x = static_cast<std::uint8_t>(g(rng));
  return GrayImage3D(d, h, std::move(v));
}

/// Binary image whose voxel (x, y, z) is pore iff `pred` holds.
inline BinaryImage3D make_binary(Dims d, const std::function<bool(std::int64_t, std::int64_t, std::int64_t)>& pred,
                                 double h = 1.0) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(d.voxels()));
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) v[static_cast<std::size_t>(linear_index(d, x, y, z))] = pred(x, y, z);
  return BinaryImage3D(d, h, std::move(v));
}

inline BinaryImage3D ball(std::int64_t n, double r, double h = 1.0) {
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  return make_binary({n, n, n}, [&](auto x, auto y, auto z) {
    const double dx = x - c, dy = y - c, dz = z - c;
    return dx * dx + dy * dy + dz * dz <= r * r;
  }, h);
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("porelab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace porelab::testing
