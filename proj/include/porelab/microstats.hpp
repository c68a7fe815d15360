#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porelab/error.hpp"
#include "porelab/volume.hpp"

namespace porelab {

enum class Direction { x, y, z, radial };

inline const char* direction_name(Direction d) {
  switch (d) {
    case Direction::x: return "x";
    case Direction::y: return "y";
    case Direction::z: return "z";
    case Direction::radial: return "radial";
  }
  return "?";
}

inline Direction to_direction(Axis a) { return static_cast<Direction>(index_of(a)); }

inline Direction parse_direction(const std::string& s) {
  if (s == "radial") return Direction::radial;
  return to_direction(parse_axis(s));
}

/// Pore-phase two-point probability S2(r) at integer voxel lags 0..r_max.
struct TwoPointFunction {
  std::vector<int> distances;
  std::vector<double> values;
  Direction direction = Direction::x;
  double voxel_size = kDefaultVoxelSize;
};

/// Raw lattice-pair tallies behind one directional S2 curve.
struct PairCounts {
  std::vector<std::uint64_t> both_pore;  ///< pairs (p, p + r e) with both voxels pore
  std::vector<std::uint64_t> pairs;      ///< pairs (p, p + r e) inside the domain
};

namespace detail {

inline std::uint64_t shifted_word(const std::vector<std::uint64_t>& w, std::size_t i, std::size_t q, unsigned b) {
  const std::size_t lo = i + q;
  std::uint64_t v = lo < w.size() ? (w[lo] >> b) : 0;
  if (b != 0 && lo + 1 < w.size()) v |= w[lo + 1] << (64 - b);
  return v;
}

}  // namespace detail

/// Counts pore pairs along one axis for lags 0..r_max. Boundary-crossing pairs
/// are excluded from both tallies. Each lattice line is packed into 64-bit
/// words and matched against a copy of itself shifted by the lag.
inline PairCounts s2_pair_counts(const BinaryImage3D& bin, Axis axis, int r_max) {
  const Dims& d = bin.dims();
  const int a = index_of(axis);
  const std::int64_t n = d[a];
  if (r_max < 0 || r_max >= n)
    throw RangeError("r_max " + std::to_string(r_max) + " must be below the extent " + std::to_string(n) +
                     " along " + axis_name(axis));
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const std::int64_t stride = axis_stride(d, a);
  const std::size_t words = static_cast<std::size_t>((n + 63) / 64);

  PairCounts out;
  out.both_pore.assign(static_cast<std::size_t>(r_max) + 1, 0);
  out.pairs.assign(static_cast<std::size_t>(r_max) + 1, 0);
  const std::uint64_t lines = static_cast<std::uint64_t>(d[b] * d[c]);
  for (int r = 0; r <= r_max; ++r) out.pairs[static_cast<std::size_t>(r)] = static_cast<std::uint64_t>(n - r) * lines;

  std::vector<std::uint64_t> line(words);
  std::array<std::int64_t, 3> pos{};
  for (std::int64_t j = 0; j < d[c]; ++j)
    for (std::int64_t i = 0; i < d[b]; ++i) {
      pos[static_cast<std::size_t>(a)] = 0;
      pos[static_cast<std::size_t>(b)] = i;
      pos[static_cast<std::size_t>(c)] = j;
      const std::int64_t base = linear_index(d, pos[0], pos[1], pos[2]);
      std::fill(line.begin(), line.end(), 0);
      for (std::int64_t t = 0; t < n; ++t)
        if (bin[base + t * stride]) line[static_cast<std::size_t>(t >> 6)] |= std::uint64_t{1} << (t & 63);
      for (int r = 0; r <= r_max; ++r) {
        const std::size_t q = static_cast<std::size_t>(r) >> 6;
        const unsigned s = static_cast<unsigned>(r) & 63u;
        std::uint64_t hits = 0;
        for (std::size_t w = 0; w + q < words; ++w)
          hits += static_cast<std::uint64_t>(std::popcount(line[w] & detail::shifted_word(line, w, q, s)));
        out.both_pore[static_cast<std::size_t>(r)] += hits;
      }
    }
  return out;
}

inline TwoPointFunction s2_directional(const BinaryImage3D& bin, Axis axis, int r_max) {
  const auto counts = s2_pair_counts(bin, axis, r_max);
  TwoPointFunction f;
  f.direction = to_direction(axis);
  f.voxel_size = bin.voxel_size();
  for (int r = 0; r <= r_max; ++r) {
    f.distances.push_back(r);
    f.values.push_back(static_cast<double>(counts.both_pore[static_cast<std::size_t>(r)]) /
                       static_cast<double>(counts.pairs[static_cast<std::size_t>(r)]));
  }
  return f;
}

/// Mean of the three Cartesian directional curves at each lag.
inline TwoPointFunction s2_radial(const BinaryImage3D& bin, int r_max) {
  if (r_max >= bin.dims().min_extent())
    throw RangeError("radial r_max must be below the smallest extent");
  TwoPointFunction f;
  f.direction = Direction::radial;
  f.voxel_size = bin.voxel_size();
  const auto sx = s2_directional(bin, Axis::x, r_max);
  const auto sy = s2_directional(bin, Axis::y, r_max);
  const auto sz = s2_directional(bin, Axis::z, r_max);
  f.distances = sx.distances;
  f.values.resize(sx.values.size());
  for (std::size_t r = 0; r < f.values.size(); ++r) f.values[r] = (sx.values[r] + sy.values[r] + sz.values[r]) / 3.0;
  return f;
}

/// S_V = -4 S2'(0), slope by forward difference over one voxel lag. Result is
/// per meter. For axis-sampled curves this is unbiased on isotropic media,
/// while voxel-face counting overestimates by 3/2 there.
inline double specific_surface_from_s2(const TwoPointFunction& s2) {
  if (s2.values.size() < 2) throw RangeError("specific surface needs S2 at lags 0 and 1");
  return -4.0 * (s2.values[1] - s2.values[0]) / s2.voxel_size;
}

/// Pointwise mean and population standard deviation over an image set.
struct EnsembleCurve {
  std::vector<int> distances;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t samples = 0;
  Direction direction = Direction::x;
  double voxel_size = kDefaultVoxelSize;
};

inline EnsembleCurve ensemble_stats(std::span<const TwoPointFunction> curves) {
  if (curves.empty()) throw ShapeError("ensemble needs at least one curve");
  const auto& first = curves.front();
  for (const auto& c : curves)
    if (c.distances != first.distances || c.direction != first.direction || c.values.size() != first.values.size())
      throw ShapeError("ensemble curves must share lags and direction");
  EnsembleCurve e;
  e.distances = first.distances;
  e.direction = first.direction;
  e.voxel_size = first.voxel_size;
  e.samples = curves.size();
  const std::size_t len = first.values.size();
  e.mean.assign(len, 0.0);
  e.stddev.assign(len, 0.0);
  const double n = static_cast<double>(curves.size());
  for (std::size_t r = 0; r < len; ++r) {
    double s = 0.0;
    for (const auto& c : curves) s += c.values[r];
    const double m = s / n;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c.values[r] - m) * (c.values[r] - m);
    e.mean[r] = m;
    e.stddev[r] = std::sqrt(ss / n);
  }
  return e;
}

}  // namespace porelab
