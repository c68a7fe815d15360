#include <gtest/gtest.h>

#include <array>

#include "helpers.hpp"
#include "porelab/microstats.hpp"
#include "porelab/minkowski.hpp"

using namespace porelab;
using porelab::testing::make_binary;
using porelab::testing::random_binary;

namespace {

/// Pair tallies by visiting every voxel and its partner r steps along `axis`.
PairCounts brute_pairs(const BinaryImage3D& bin, int axis, int r_max) {
  const Dims& d = bin.dims();
  PairCounts c;
  c.both_pore.assign(static_cast<std::size_t>(r_max) + 1, 0);
  c.pairs.assign(static_cast<std::size_t>(r_max) + 1, 0);
  for (int r = 0; r <= r_max; ++r)
    for (std::int64_t z = 0; z < d.nz; ++z)
      for (std::int64_t y = 0; y < d.ny; ++y)
        for (std::int64_t x = 0; x < d.nx; ++x) {
          std::array<std::int64_t, 3> q{x, y, z};
          q[static_cast<std::size_t>(axis)] += r;
          if (q[static_cast<std::size_t>(axis)] >= d[axis]) continue;
          ++c.pairs[static_cast<std::size_t>(r)];
          if (bin.at(x, y, z) && bin.at(q[0], q[1], q[2])) ++c.both_pore[static_cast<std::size_t>(r)];
        }
  return c;
}

}  // namespace

TEST(S2, MatchesExhaustivePairCounts) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const auto bin = random_binary({16, 16, 16}, 0.2 + 0.05 * static_cast<double>(s % 8), s);
    for (int a = 0; a < 3; ++a) {
      const auto got = s2_pair_counts(bin, kAxes[static_cast<std::size_t>(a)], 15);
      const auto want = brute_pairs(bin, a, 15);
      EXPECT_EQ(got.both_pore, want.both_pore);
      EXPECT_EQ(got.pairs, want.pairs);
    }
  }
}

TEST(S2, OddShapesAndWordBoundaries) {
  const auto bin = random_binary({130, 5, 67}, 0.5, 99);
  for (int a = 0; a < 3; ++a) {
    const int r = static_cast<int>(bin.dims()[a]) - 1;
    const auto got = s2_pair_counts(bin, kAxes[static_cast<std::size_t>(a)], r);
    const auto want = brute_pairs(bin, a, r);
    EXPECT_EQ(got.both_pore, want.both_pore);
    EXPECT_EQ(got.pairs, want.pairs);
  }
}

TEST(S2, AllPoreIsOne) {
  const auto bin = BinaryImage3D::filled({8, 8, 8}, 1);
  for (double v : s2_directional(bin, Axis::y, 7).values) EXPECT_EQ(v, 1.0);
  for (double v : s2_radial(bin, 7).values) EXPECT_EQ(v, 1.0);
}

TEST(S2, LagZeroIsPorosity) {
  const auto bin = random_binary({11, 13, 9}, 0.37, 4);
  for (Axis a : kAxes) EXPECT_DOUBLE_EQ(s2_directional(bin, a, 3).values[0], porosity(bin));
  EXPECT_DOUBLE_EQ(s2_radial(bin, 3).values[0], porosity(bin));
}

TEST(S2, RangeError) {
  const auto bin = random_binary({8, 8, 8}, 0.5, 1);
  EXPECT_THROW(s2_directional(bin, Axis::x, 8), RangeError);
  EXPECT_THROW(s2_radial(bin, 8), RangeError);
}

TEST(S2, RadialOfIsotropicNoise) {
  const auto bin = random_binary({40, 40, 40}, 0.3, 8);
  const auto rad = s2_radial(bin, 10);
  for (Axis a : kAxes) {
    const auto d = s2_directional(bin, a, 10);
    for (std::size_t r = 0; r < d.values.size(); ++r) EXPECT_NEAR(d.values[r], rad.values[r], 0.01);
  }
}

TEST(S2, LaminateClosedForm) {
  const int a = 4, periods = 8, n = 2 * a * periods;
  const auto bin = make_binary({n, 10, 10}, [&](auto x, auto, auto) { return (x / a) % 2 == 0; });
  const auto sx = s2_directional(bin, Axis::x, 2 * a);
  const auto sy = s2_directional(bin, Axis::y, 5);
  const auto sz = s2_directional(bin, Axis::z, 5);
  for (double v : sy.values) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double v : sz.values) EXPECT_DOUBLE_EQ(v, 0.5);
  for (int r = 0; r <= 2 * a; ++r) {
    // Pore pairs per period for lag r: a - r inside a slab for r <= a, r - a spanning into the next pore slab otherwise.
    const int per_period = r <= a ? a - r : r - a;
    std::int64_t both = static_cast<std::int64_t>(per_period) * periods;
    if (r > a) both -= per_period;  // the last slab has no partner beyond the domain
    EXPECT_NEAR(sx.values[static_cast<std::size_t>(r)], static_cast<double>(both) / (n - r), 1e-15) << r;
  }
  const auto rad = s2_radial(bin, 5);
  for (std::size_t r = 0; r < rad.values.size(); ++r)
    EXPECT_DOUBLE_EQ(rad.values[r], (sx.values[r] + 0.5 + 0.5) / 3.0);
}

TEST(SpecificSurface, AllPoreIsZero) {
  EXPECT_EQ(specific_surface_from_s2(s2_directional(BinaryImage3D::filled({6, 6, 6}, 1), Axis::x, 2)), 0.0);
}

TEST(SpecificSurface, LaminateSlope) {
  const int a = 4;
  const double h = 2e-6;
  const auto bin = make_binary({128, 6, 6}, [&](auto x, auto, auto) { return (x / a) % 2 == 0; }, h);
  const double sv = specific_surface_from_s2(s2_directional(bin, Axis::x, 2));
  // The forward difference over a bounded line loses one pair per line, a 1/n effect.
  EXPECT_NEAR(sv, 2.0 / (a * h), 2.0 / (a * h) * (4.0 / 128.0));
}

TEST(SpecificSurface, CubeAgainstFaceCount) {
  const auto bin = make_binary({32, 32, 32}, [](auto x, auto y, auto z) {
    return x >= 11 && x < 21 && y >= 11 && y < 21 && z >= 11 && z < 21;
  });
  const double faces = specific_surface(bin);
  EXPECT_DOUBLE_EQ(faces, 600.0 / 32768.0);

  // On lattice-pair tallies over the full domain the slope estimate is exactly
  // two thirds of the face count for an axis-aligned cube.
  double slope_sv = 0.0;
  for (Axis a : kAxes) {
    const auto c = s2_pair_counts(bin, a, 1);
    slope_sv += 4.0 * static_cast<double>(c.both_pore[0] - c.both_pore[1]) / 32768.0 / 3.0;
  }
  EXPECT_DOUBLE_EQ(slope_sv * 1.5, faces);

  // With the bounded-domain normalization the curve estimate reads low by the
  // fraction of pairs lost at the boundary.
  const double sv = specific_surface_from_s2(s2_radial(bin, 1));
  EXPECT_NEAR(sv, 4.0 * (1000.0 / 32768.0 - 900.0 / 31744.0), 1e-15);
  EXPECT_NEAR(sv, faces / 1.5, 0.3 * faces / 1.5);
}

TEST(EnsembleStats, SingleCurve) {
  TwoPointFunction f{{0, 1, 2}, {0.4, 0.3, 0.2}, Direction::z, 1.0};
  const std::vector<TwoPointFunction> v{f};
  const auto e = ensemble_stats(v);
  EXPECT_EQ(e.mean, f.values);
  for (double s : e.stddev) EXPECT_EQ(s, 0.0);
}

TEST(EnsembleStats, TwoCurves) {
  const std::vector<TwoPointFunction> v{{{0, 1}, {0.2, 0.1}, Direction::x, 1.0}, {{0, 1}, {0.4, 0.3}, Direction::x, 1.0}};
  const auto e = ensemble_stats(v);
  EXPECT_NEAR(e.mean[0], 0.3, 1e-15);
  EXPECT_NEAR(e.mean[1], 0.2, 1e-15);
  EXPECT_NEAR(e.stddev[0], 0.1, 1e-15);
  EXPECT_NEAR(e.stddev[1], 0.1, 1e-15);
}

TEST(EnsembleStats, MismatchedLagsRejected) {
  const std::vector<TwoPointFunction> v{{{0, 1}, {0.2, 0.1}, Direction::x, 1.0}, {{0}, {0.4}, Direction::x, 1.0}};
  EXPECT_THROW(ensemble_stats(v), ShapeError);
  EXPECT_THROW(ensemble_stats(std::span<const TwoPointFunction>{}), ShapeError);
}

TEST(EnsembleStats, SixtyFourRandomImages) {
  const double p = 0.3;
  std::vector<TwoPointFunction> curves;
  for (std::uint64_t s = 0; s < 64; ++s) curves.push_back(s2_radial(random_binary({16, 16, 16}, p, 1000 + s), 4));
  const auto e = ensemble_stats(curves);
  EXPECT_EQ(e.samples, 64u);
  EXPECT_LE(std::abs(e.mean[0] - p), 3.0 * e.stddev[0] / 8.0);
  EXPECT_LE(std::abs(e.mean[4] - p * p), 3.0 * e.stddev[4] / 8.0);
}
