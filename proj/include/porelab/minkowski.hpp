#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numbers>
#include <optional>

#include "porelab/preprocess.hpp"
#include "porelab/volume.hpp"

namespace porelab {

/// Integer tallies of the pore phase from which all four densities follow.
///
/// Cells of the complex spanned by pore voxel centers: vertices are pore
/// voxels, edges join 6-adjacent pore voxels, squares are 2x2 pore blocks and
/// cubes are 2x2x2 pore blocks. This complex is homotopy equivalent to the
/// 6-connected pore set (grain is 26-connected).
struct MinkowskiCounts {
  std::int64_t voxels = 0;           ///< domain size N
  std::int64_t pore = 0;
  std::int64_t interface_faces = 0;  ///< interior pore/grain voxel faces
  std::array<std::int64_t, 3> edges{};    ///< edges parallel to axis a
  std::array<std::int64_t, 3> squares{};  ///< squares normal to axis a
  std::int64_t cubes = 0;
  /// 4x the slice Euler sum normal to each axis, taken over 2x2 windows lying
  /// inside the domain so that the domain faces add nothing.
  std::array<std::int64_t, 3> slice_euler4{};

  std::int64_t euler() const {
    return pore - (edges[0] + edges[1] + edges[2]) + (squares[0] + squares[1] + squares[2]) - cubes;
  }

  /// Sum over the unit-spaced slices normal to `axis` of the 2D (4-connected)
  /// Euler characteristic of the pore section, window-based.
  double slice_euler_sum(int axis) const { return static_cast<double>(slice_euler4[static_cast<std::size_t>(axis)]) / 4.0; }

  bool operator==(const MinkowskiCounts&) const = default;
};

/// Densities per bulk volume: phi (-), sv (1/m), kv (1/m^2), chiv (1/m^3).
struct MinkowskiDensities {
  double phi = 0.0;
  double sv = 0.0;
  double kv = 0.0;
  double chiv = 0.0;
  bool operator==(const MinkowskiDensities&) const = default;
};

/// Crofton prefactor: the integral of mean curvature of a convex body is
/// 2*pi times its mean breadth, and the mean breadth is estimated by h times
/// the axis-averaged sum of slice Euler characteristics. Checked against the
/// ball (M2 = 4 pi R) in the tests.
inline constexpr double kCroftonPrefactor = 2.0 * std::numbers::pi;

inline MinkowskiDensities densities_from_counts(const MinkowskiCounts& c, double h) {
  const double n = static_cast<double>(c.voxels);
  const double bulk = n * h * h * h;
  MinkowskiDensities m;
  m.phi = static_cast<double>(c.pore) / n;
  m.sv = static_cast<double>(c.interface_faces) * h * h / bulk;
  const double slice_mean = (c.slice_euler_sum(0) + c.slice_euler_sum(1) + c.slice_euler_sum(2)) / 3.0;
  m.kv = kCroftonPrefactor * h * slice_mean / bulk;
  m.chiv = static_cast<double>(c.euler()) / bulk;
  return m;
}

namespace detail {

/// Number of in-domain windows of width 2 along an axis of extent n that
/// contain coordinate i.
inline std::int64_t window_count(std::int64_t i, std::int64_t n) { return (i >= 1) + (i + 2 <= n); }

/// Adds one cell's contribution to the per-axis slice_euler4 tallies. `kind`
/// is 0 for a voxel, 1 for an edge along `e`, 2 for a square normal to `e`.
template <class Add>
void slice_weights(const std::array<std::int64_t, 3>& w, int kind, int e, Add&& add) {
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    if (kind == 0) {
      add(a, w[static_cast<std::size_t>(b)] * w[static_cast<std::size_t>(c)]);
    } else if (kind == 1 && e != a) {
      add(a, -2 * w[static_cast<std::size_t>(3 - a - e)]);
    } else if (kind == 2 && e == a) {
      add(a, 4);
    }
  }
}

}  // namespace detail

inline MinkowskiCounts minkowski_counts(const BinaryImage3D& bin) {
  const Dims& d = bin.dims();
  MinkowskiCounts c;
  c.voxels = d.voxels();
  const std::int64_t sx = 1, sy = d.nx, sz = d.nx * d.ny;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const std::int64_t p = linear_index(d, x, y, z);
        const bool v = bin[p] != 0;
        c.pore += v;
        const bool hx = x + 1 < d.nx, hy = y + 1 < d.ny, hz = z + 1 < d.nz;
        const bool vx = hx && bin[p + sx];
        const bool vy = hy && bin[p + sy];
        const bool vz = hz && bin[p + sz];
        if (hx && v != vx) ++c.interface_faces;
        if (hy && v != vy) ++c.interface_faces;
        if (hz && v != vz) ++c.interface_faces;
        if (!v) continue;
        c.edges[0] += vx;
        c.edges[1] += vy;
        c.edges[2] += vz;
        const bool vxy = hx && hy && bin[p + sx + sy];
        const bool vyz = hy && hz && bin[p + sy + sz];
        const bool vxz = hx && hz && bin[p + sx + sz];
        c.squares[2] += vx && vy && vxy;
        c.squares[0] += vy && vz && vyz;
        c.squares[1] += vx && vz && vxz;
        const std::array<std::int64_t, 3> w{detail::window_count(x, d.nx), detail::window_count(y, d.ny),
                                            detail::window_count(z, d.nz)};
        auto add = [&](int a, std::int64_t k) { c.slice_euler4[static_cast<std::size_t>(a)] += k; };
        detail::slice_weights(w, 0, 0, add);
        if (vx) detail::slice_weights(w, 1, 0, add);
        if (vy) detail::slice_weights(w, 1, 1, add);
        if (vz) detail::slice_weights(w, 1, 2, add);
        if (vx && vy && vxy) detail::slice_weights(w, 2, 2, add);
        if (vy && vz && vyz) detail::slice_weights(w, 2, 0, add);
        if (vx && vz && vxz) detail::slice_weights(w, 2, 1, add);
        c.cubes += vx && vy && vz && vxy && vyz && vxz && hx && hy && hz && bin[p + sx + sy + sz];
      }
  return c;
}

inline double porosity(const BinaryImage3D& bin) {
  return static_cast<double>(pore_count(bin)) / static_cast<double>(bin.size());
}

/// Voxel-face interface area per bulk volume. Faces on the domain boundary are
/// not interface. Overestimates isotropic surfaces by a factor of about 3/2.
inline double specific_surface(const BinaryImage3D& bin) {
  return densities_from_counts(minkowski_counts(bin), bin.voxel_size()).sv;
}

inline double mean_curvature_density(const BinaryImage3D& bin) {
  return densities_from_counts(minkowski_counts(bin), bin.voxel_size()).kv;
}

inline std::int64_t euler_characteristic(const BinaryImage3D& bin) { return minkowski_counts(bin).euler(); }

inline double euler_density(const BinaryImage3D& bin) {
  return densities_from_counts(minkowski_counts(bin), bin.voxel_size()).chiv;
}

inline MinkowskiDensities minkowski_densities(const BinaryImage3D& bin) {
  return densities_from_counts(minkowski_counts(bin), bin.voxel_size());
}

/// Densities at every gray threshold rho, pore = value > rho.
struct ThresholdSweep {
  std::array<MinkowskiDensities, 256> densities{};
  std::array<MinkowskiCounts, 256> counts{};
  std::optional<int> otsu;
  double voxel_size = kDefaultVoxelSize;
};

/// Evaluates all 256 thresholds in one pass. A cell of the complex is present
/// at threshold rho iff the minimum gray value over its voxels exceeds rho,
/// and a face is an interface iff min <= rho < max; tallying those minima and
/// maxima yields the same integer counts as segmenting at each rho.
inline ThresholdSweep threshold_sweep(const GrayImage3D& img) {
  using Hist = std::array<std::int64_t, 256>;
  Hist vox{}, face_min{}, face_max{}, cube{};
  std::array<Hist, 3> edge{}, square{}, slice4{};
  const Dims& d = img.dims();
  const std::int64_t sx = 1, sy = d.nx, sz = d.nx * d.ny;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const std::int64_t p = linear_index(d, x, y, z);
        const std::uint8_t v = img[p];
        ++vox[v];
        const std::array<std::int64_t, 3> wc{detail::window_count(x, d.nx), detail::window_count(y, d.ny),
                                             detail::window_count(z, d.nz)};
        auto tally = [&](std::uint8_t m, int kind, int e) {
          detail::slice_weights(wc, kind, e, [&](int a, std::int64_t k) { slice4[static_cast<std::size_t>(a)][m] += k; });
        };
        tally(v, 0, 0);
        const bool hx = x + 1 < d.nx, hy = y + 1 < d.ny, hz = z + 1 < d.nz;
        auto pair = [&](std::int64_t q, int a) {
          const std::uint8_t w = img[q];
          ++face_min[std::min(v, w)];
          ++face_max[std::max(v, w)];
          ++edge[static_cast<std::size_t>(a)][std::min(v, w)];
          tally(std::min(v, w), 1, a);
        };
        if (hx) pair(p + sx, 0);
        if (hy) pair(p + sy, 1);
        if (hz) pair(p + sz, 2);
        auto square_at = [&](int a, std::uint8_t m) {
          ++square[static_cast<std::size_t>(a)][m];
          tally(m, 2, a);
        };
        if (hx && hy) square_at(2, std::min({v, img[p + sx], img[p + sy], img[p + sx + sy]}));
        if (hy && hz) square_at(0, std::min({v, img[p + sy], img[p + sz], img[p + sy + sz]}));
        if (hx && hz) square_at(1, std::min({v, img[p + sx], img[p + sz], img[p + sx + sz]}));
        if (hx && hy && hz)
          ++cube[std::min({v, img[p + sx], img[p + sy], img[p + sz], img[p + sx + sy], img[p + sy + sz],
                           img[p + sx + sz], img[p + sx + sy + sz]})];
      }

  // above(h)[rho] = number of entries with value > rho
  auto above = [](const Hist& h) {
    Hist s{};
    std::int64_t run = 0;
    for (int rho = 255; rho >= 0; --rho) {
      s[static_cast<std::size_t>(rho)] = run;
      run += h[static_cast<std::size_t>(rho)];
    }
    return s;
  };
  const Hist a_vox = above(vox), a_min = above(face_min), a_max = above(face_max), a_cube = above(cube);
  std::array<Hist, 3> a_edge{}, a_square{}, a_slice4{};
  for (std::size_t a = 0; a < 3; ++a) {
    a_edge[a] = above(edge[a]);
    a_square[a] = above(square[a]);
    a_slice4[a] = above(slice4[a]);
  }

  ThresholdSweep sweep;
  sweep.voxel_size = img.voxel_size();
  for (std::size_t rho = 0; rho < 256; ++rho) {
    MinkowskiCounts c;
    c.voxels = d.voxels();
    c.pore = a_vox[rho];
    c.interface_faces = a_max[rho] - a_min[rho];
    for (std::size_t a = 0; a < 3; ++a) {
      c.edges[a] = a_edge[a][rho];
      c.squares[a] = a_square[a][rho];
      c.slice_euler4[a] = a_slice4[a][rho];
    }
    c.cubes = a_cube[rho];
    sweep.counts[rho] = c;
    sweep.densities[rho] = densities_from_counts(c, img.voxel_size());
  }
  try {
    sweep.otsu = otsu_threshold(img);
  } catch (const DegenerateError&) {
    sweep.otsu.reset();
  }
  return sweep;
}

}  // namespace porelab
