#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "porelab/error.hpp"
#include "porelab/volume.hpp"

namespace porelab {

enum class SubdomainMode {
  nonoverlap_grid,    ///< cubes on the regular grid of pitch `size`, raster order
  random_nonoverlap,  ///< randomly chosen slots, each jittered inside its slot
  strided_grid,       ///< regular grid of pitch `stride`; cubes may overlap
};

inline SubdomainMode parse_subdomain_mode(const std::string& s) {
  if (s == "nonoverlap-grid") return SubdomainMode::nonoverlap_grid;
  if (s == "random-nonoverlap") return SubdomainMode::random_nonoverlap;
  if (s == "strided-grid") return SubdomainMode::strided_grid;
  throw ValidationError("unknown subdomain mode '" + s + "'");
}

inline const char* subdomain_mode_name(SubdomainMode m) {
  switch (m) {
    case SubdomainMode::nonoverlap_grid: return "nonoverlap-grid";
    case SubdomainMode::random_nonoverlap: return "random-nonoverlap";
    case SubdomainMode::strided_grid: return "strided-grid";
  }
  return "?";
}

using Origin = std::array<std::int64_t, 3>;

/// Number of disjoint `size`-cubes on the regular grid.
inline std::int64_t grid_capacity(const Dims& d, std::int64_t size) {
  return (d.nx / size) * (d.ny / size) * (d.nz / size);
}

inline std::int64_t strided_positions(std::int64_t extent, std::int64_t size, std::int64_t stride) {
  return (extent - size) / stride + 1;
}

inline std::int64_t strided_capacity(const Dims& d, std::int64_t size, std::int64_t stride) {
  return strided_positions(d.nx, size, stride) * strided_positions(d.ny, size, stride) *
         strided_positions(d.nz, size, stride);
}

/// Origins of `count` sub-cubes of edge `size`. `count == 0` requests every
/// available position for the grid modes. Deterministic given `seed`.
///
/// random_nonoverlap divides each axis into floor(n/size) slots of width
/// floor(n/slots); a cube is placed at a uniformly random offset inside its
/// slot, so cubes in distinct slots never intersect.
inline std::vector<Origin> plan_subdomains(const Dims& d, std::int64_t size, std::int64_t count, SubdomainMode mode,
                                           std::uint64_t seed, std::int64_t stride = 0) {
  if (size <= 0 || size > d.min_extent())
    throw DimensionError("sub-domain edge " + std::to_string(size) + " does not fit the volume");
  if (count < 0) throw CapacityError("negative sub-domain count");

  std::vector<Origin> out;
  if (mode == SubdomainMode::strided_grid) {
    if (stride <= 0) throw ValidationError("strided-grid mode requires a positive stride");
    const std::int64_t cap = strided_capacity(d, size, stride);
    if (count > cap)
      throw CapacityError("requested " + std::to_string(count) + " sub-domains, strided grid holds " +
                          std::to_string(cap));
    const std::int64_t px = strided_positions(d.nx, size, stride);
    const std::int64_t py = strided_positions(d.ny, size, stride);
    const std::int64_t pz = strided_positions(d.nz, size, stride);
    for (std::int64_t k = 0; k < pz; ++k)
      for (std::int64_t j = 0; j < py; ++j)
        for (std::int64_t i = 0; i < px; ++i) out.push_back({i * stride, j * stride, k * stride});
    if (count > 0) out.resize(static_cast<std::size_t>(count));
    return out;
  }

  const std::int64_t cap = grid_capacity(d, size);
  if (count > cap)
    throw CapacityError("requested " + std::to_string(count) + " disjoint sub-domains of edge " +
                        std::to_string(size) + ", at most " + std::to_string(cap) + " fit");
  const std::array<std::int64_t, 3> slots{d.nx / size, d.ny / size, d.nz / size};

  if (mode == SubdomainMode::nonoverlap_grid) {
    for (std::int64_t k = 0; k < slots[2]; ++k)
      for (std::int64_t j = 0; j < slots[1]; ++j)
        for (std::int64_t i = 0; i < slots[0]; ++i) out.push_back({i * size, j * size, k * size});
    if (count > 0) out.resize(static_cast<std::size_t>(count));
    return out;
  }

  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> order(static_cast<std::size_t>(cap));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::int64_t want = count == 0 ? cap : count;
  for (std::int64_t n = 0; n < want; ++n) {
    const std::int64_t slot = order[static_cast<std::size_t>(n)];
    const std::array<std::int64_t, 3> cell{slot % slots[0], (slot / slots[0]) % slots[1], slot / (slots[0] * slots[1])};
    Origin o{};
    for (int a = 0; a < 3; ++a) {
      const std::int64_t pitch = d[a] / slots[static_cast<std::size_t>(a)];
      std::uniform_int_distribution<std::int64_t> jitter(0, pitch - size);
      o[static_cast<std::size_t>(a)] = cell[static_cast<std::size_t>(a)] * pitch + jitter(rng);
    }
    out.push_back(o);
  }
  return out;
}

template <class Tag>
std::vector<Volume<Tag>> extract_subdomains(const Volume<Tag>& img, std::int64_t size, std::int64_t count,
                                            SubdomainMode mode, std::uint64_t seed, std::int64_t stride = 0) {
  std::vector<Volume<Tag>> out;
  for (const auto& o : plan_subdomains(img.dims(), size, count, mode, seed, stride))
    out.push_back(img.crop(o[0], o[1], o[2], {size, size, size}));
  return out;
}

}  // namespace porelab
