#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "porelab/volume.hpp"

namespace porelab::testing {

/// Gray volume of bright spherical grains (mean 180) in a dark pore matrix
/// (mean 60) with Gaussian noise; pore is the dark phase.
inline GrayImage3D grain_phantom(Dims d, int grains, double radius, std::uint64_t seed, double voxel = 5e-6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, static_cast<double>(d.nx)), uy(0.0, static_cast<double>(d.ny)),
      uz(0.0, static_cast<double>(d.nz));
  std::normal_distribution<double> noise(0.0, 10.0);
  std::vector<std::array<double, 3>> c(static_cast<std::size_t>(grains));
  for (auto& p : c) p = {ux(rng), uy(rng), uz(rng)};
  std::vector<std::uint8_t> v(static_cast<std::size_t>(d.voxels()));
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        bool grain = false;
        for (const auto& p : c)
          if ((x - p[0]) * (x - p[0]) + (y - p[1]) * (y - p[1]) + (z - p[2]) * (z - p[2]) < radius * radius) {
            grain = true;
            break;
          }
        const double g = (grain ? 180.0 : 60.0) + noise(rng);
        v[static_cast<std::size_t>(linear_index(d, x, y, z))] = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
      }
  return GrayImage3D(d, voxel, std::move(v));
}

}  // namespace porelab::testing
