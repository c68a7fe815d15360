#include <gtest/gtest.h>

#include <algorithm>

#include "flow_cases.hpp"
#include "porelab/flow.hpp"
#include "porelab/histogram.hpp"

using namespace porelab;
using namespace porelab::testing;

TEST(Stokes, PlaneChannelPermeability) {
  const int h = 20;
  const auto r = flow(plane_channel(h), Axis::x);
  EXPECT_NEAR(r.permeability_voxel, plane_channel_permeability(h), 0.05 * plane_channel_permeability(h));
  EXPECT_NEAR(r.effective_porosity, 20.0 / 22.0, 1e-15);
  EXPECT_LE(std::abs(r.inlet_flux - r.outlet_flux), 1e-6 * r.outlet_flux);
}

TEST(Stokes, PlaneChannelParabolicProfile) {
  const int h = 20;
  const auto f = stokes_solve(plane_channel(h), Axis::x);
  std::vector<double> u;
  for (int y = 1; y <= h; ++y) u.push_back(f.cell_velocity(8, y, 2)[0]);
  double mean = 0.0;
  for (double v : u) mean += v / h;
  const double peak = *std::max_element(u.begin(), u.end());
  EXPECT_NEAR(peak / mean, 1.5, 0.03 * 1.5);
  // Symmetric about the mid-plane and depth independent.
  for (int i = 0; i < h / 2; ++i) EXPECT_NEAR(u[static_cast<std::size_t>(i)], u[static_cast<std::size_t>(h - 1 - i)], 1e-7 * peak);
  for (int z = 0; z < 4; ++z) EXPECT_NEAR(f.cell_velocity(8, 5, z)[0], u[4], 1e-7 * peak);
}

TEST(Stokes, PlaneChannelSpeedLaw) {
  // v / <v> over a parabola has CDF 1 - sqrt(1 - 2 s / 3) on [0, 1.5]. The
  // discrete profile repeats each speed, so the law has to fall inside each
  // ECDF step.
  const auto f = stokes_solve(plane_channel(20), Axis::x);
  auto s = normalized_speeds(f);
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] - s[i] <= 1e-9 * s[i]) ++j;
    const double want = 1.0 - std::sqrt(std::max(0.0, 1.0 - 2.0 * s[i] / 3.0));
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(j) / n;
    worst = std::max(worst, std::max(lo - want, want - hi));
    i = j;
  }
  EXPECT_LT(worst, 0.02);
}

TEST(Stokes, SquareDuctSeries) {
  const int a = 20;
  const auto img = square_duct(a);
  const auto f = stokes_solve(img, Axis::x);
  const double q = duct_flux(a / 2.0, a / 2.0, 1.0 / static_cast<double>(img.dims().nx));
  EXPECT_NEAR(f.outlet_flux, q, 0.05 * q);
}

TEST(Stokes, CapillaryTubeHomogeneousLimit) {
  const auto f = stokes_solve(capillary_tube(15, 34), Axis::x);
  const auto h = velocity_histogram(f);
  EXPECT_LT(sup_gap_to_uniform02(h), 0.1);
  EXPECT_EQ(h.overflow, 0.0);
  const double q = std::numbers::pi * std::pow(15.0, 4) / (8.0 * 6.0);
  EXPECT_NEAR(f.outlet_flux, q, 0.1 * q);
}

TEST(Stokes, MassConservationOnSpherePack) {
  const auto img = sphere_pack(24, 30, 4.0, 3);
  const auto f = stokes_solve(img, Axis::z);
  EXPECT_LT(f.max_divergence, 1e-8);
  EXPECT_LE(std::abs(f.inlet_flux - f.outlet_flux), 1e-6 * std::abs(f.outlet_flux));
  for (std::int64_t z = 0; z < 24; ++z)
    for (std::int64_t y = 0; y < 24; ++y)
      for (std::int64_t x = 0; x < 24; ++x) {
        const bool flowing = f.region[static_cast<std::size_t>(linear_index(f.dims, x, y, z))];
        if (flowing) {
          EXPECT_LT(std::abs(f.divergence(x, y, z)), 1e-8);
        } else {
          const auto v = f.cell_velocity(x, y, z);
          EXPECT_EQ(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 0.0);
        }
      }
}

TEST(Stokes, UzawaAgreesWithMinres) {
  const auto img = sphere_pack(16, 30, 3.5, 5);
  StokesOptions u;
  u.method = StokesMethod::uzawa;
  const auto a = flow(img, Axis::x);
  const auto b = flow(img, Axis::x, u);
  EXPECT_NEAR(a.permeability_voxel, b.permeability_voxel, 1e-6 * a.permeability_voxel);
}

TEST(Stokes, AxisPermutationInvariance) {
  const auto img = sphere_pack(16, 30, 3.5, 7);
  const auto kx = flow(img, Axis::x).permeability_voxel;
  // Output axis y is input axis x.
  const auto ky = flow(img.permuted({1, 0, 2}), Axis::y).permeability_voxel;
  EXPECT_NEAR(kx, ky, 1e-9 * kx);
}

TEST(Permeability, VoxelSizeScaling) {
  const auto a = flow(plane_channel(8, 8, 3, 1e-6), Axis::x);
  const auto b = flow(plane_channel(8, 8, 3, 2e-6), Axis::x);
  EXPECT_EQ(b.permeability_m2, 4.0 * a.permeability_m2);
  EXPECT_EQ(a.permeability_voxel, b.permeability_voxel);
  EXPECT_DOUBLE_EQ(a.permeability_darcy, a.permeability_m2 / 9.869233e-13);
}

TEST(Permeability, AxisMismatch) {
  const auto f = stokes_solve(plane_channel(6, 6, 2), Axis::x);
  EXPECT_THROW(permeability(f, Axis::y), ValidationError);
}

TEST(Stokes, BlockedImageHasNoFlow) {
  EXPECT_THROW(stokes_solve(BinaryImage3D::filled({6, 6, 6}, 0), Axis::x), NoFlowError);
  // Pore everywhere except a solid plate across the flow axis.
  const auto plate = make_binary({8, 6, 6}, [](auto x, auto, auto) { return x != 4; });
  EXPECT_THROW(flow(plate, Axis::x), NoFlowError);
  EXPECT_NO_THROW(flow(plate, Axis::y));
}

TEST(EffectivePorosity, Examples) {
  const auto channel = make_binary({10, 10, 10}, [](auto, auto y, auto z) { return y >= 3 && y < 5 && z >= 2 && z < 7; });
  EXPECT_DOUBLE_EQ(effective_porosity(channel, Axis::x), 0.1);
  EXPECT_EQ(effective_porosity(channel, Axis::y), 0.0);
  const auto dead_end = make_binary({10, 10, 10}, [](auto x, auto y, auto z) { return y >= 3 && y < 5 && z == 7 && x < 6; });
  EXPECT_EQ(effective_porosity(dead_end, Axis::x), 0.0);
}

TEST(EffectivePorosity, FlowResultCarriesBoth) {
  const auto img = make_binary({10, 10, 10}, [](auto x, auto y, auto z) {
    return (y >= 3 && y < 5 && z >= 2 && z < 7) || (x == 2 && y == 8 && z < 4);
  });
  const auto r = flow(img, Axis::x);
  EXPECT_DOUBLE_EQ(r.effective_porosity, 0.1);
  EXPECT_DOUBLE_EQ(r.porosity, 0.104);
}
