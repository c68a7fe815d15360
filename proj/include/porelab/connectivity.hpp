#pragma once

#include <cstdint>
#include <vector>

#include "porelab/volume.hpp"

namespace porelab {

/// 6-connected component labels of the pore phase; grain voxels get -1.
/// Returns the number of components through `count`.
inline std::vector<std::int32_t> label_pore_components(const BinaryImage3D& bin, std::int32_t& count) {
  const Dims& d = bin.dims();
  std::vector<std::int32_t> label(static_cast<std::size_t>(d.voxels()), -1);
  std::vector<std::int64_t> stack;
  count = 0;
  for (std::int64_t seed = 0; seed < d.voxels(); ++seed) {
    if (!bin[seed] || label[static_cast<std::size_t>(seed)] >= 0) continue;
    const std::int32_t id = count++;
    label[static_cast<std::size_t>(seed)] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::int64_t p = stack.back();
      stack.pop_back();
      const std::int64_t x = p % d.nx;
      const std::int64_t y = (p / d.nx) % d.ny;
      const std::int64_t z = p / (d.nx * d.ny);
      const std::int64_t nb[6] = {x > 0 ? p - 1 : -1,
                                  x + 1 < d.nx ? p + 1 : -1,
                                  y > 0 ? p - d.nx : -1,
                                  y + 1 < d.ny ? p + d.nx : -1,
                                  z > 0 ? p - d.nx * d.ny : -1,
                                  z + 1 < d.nz ? p + d.nx * d.ny : -1};
      for (std::int64_t q : nb) {
        if (q < 0 || !bin[q] || label[static_cast<std::size_t>(q)] >= 0) continue;
        label[static_cast<std::size_t>(q)] = id;
        stack.push_back(q);
      }
    }
  }
  return label;
}

/// Pore voxels of the 6-connected components touching both the inlet
/// (axis-minimum) and outlet (axis-maximum) faces.
inline BinaryImage3D connected_pore(const BinaryImage3D& bin, Axis axis) {
  const Dims& d = bin.dims();
  std::int32_t ncomp = 0;
  const auto label = label_pore_components(bin, ncomp);
  std::vector<std::uint8_t> touches(static_cast<std::size_t>(ncomp), 0);

  const int a = index_of(axis);
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  std::array<std::int64_t, 3> pos{};
  for (std::int64_t j = 0; j < d[c]; ++j)
    for (std::int64_t i = 0; i < d[b]; ++i) {
      pos[static_cast<std::size_t>(b)] = i;
      pos[static_cast<std::size_t>(c)] = j;
      pos[static_cast<std::size_t>(a)] = 0;
      const auto lo = label[static_cast<std::size_t>(linear_index(d, pos[0], pos[1], pos[2]))];
      pos[static_cast<std::size_t>(a)] = d[a] - 1;
      const auto hi = label[static_cast<std::size_t>(linear_index(d, pos[0], pos[1], pos[2]))];
      if (lo >= 0) touches[static_cast<std::size_t>(lo)] |= 1;
      if (hi >= 0) touches[static_cast<std::size_t>(hi)] |= 2;
    }

  std::vector<std::uint8_t> out(static_cast<std::size_t>(d.voxels()), 0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (label[i] >= 0 && touches[static_cast<std::size_t>(label[i])] == 3) ? 1 : 0;
  return BinaryImage3D(d, bin.voxel_size(), std::move(out));
}

}  // namespace porelab
