#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "porelab/histogram.hpp"
#include "porelab/serialize.hpp"

using namespace porelab;

namespace {

VelocityField plug_field(double speed) {
  VelocityField f;
  f.dims = {4, 3, 3};
  f.region.assign(36, 1);
  for (int a = 0; a < 3; ++a) f.face[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(f.face_dims(a).voxels()), 0.0);
  for (auto& v : f.face[0]) v = speed;
  return f;
}

std::vector<double> channel_samples(double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> s;
  for (int i = 0; i < 200; ++i) {
    const double eta = (i + 0.5) / 100.0 - 1.0;
    s.push_back(1.5 * (1.0 - eta * eta) * (1.0 + eps * u(rng)));
  }
  return s;
}

}  // namespace

TEST(LogEdges, Layout) {
  const auto e = log_edges();
  ASSERT_EQ(e.size(), 257u);
  EXPECT_EQ(e.front(), 1e-4);
  EXPECT_EQ(e.back(), 1e2);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_NEAR(std::log10(e[i] / e[i - 1]), 6.0 / 256.0, 1e-12);
  EXPECT_THROW(log_edges(0.0, 1.0, 4), RangeError);
}

TEST(Histogram, PlugFlowSingleBin) {
  const auto h = velocity_histogram(plug_field(0.37));
  const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), 1.0);
  const auto bin = static_cast<std::size_t>(it - h.edges.begin() - 1);
  EXPECT_DOUBLE_EQ(h.density[bin] * h.width(bin), 1.0);
  for (std::size_t i = 0; i < h.bins(); ++i)
    if (i != bin) {
      EXPECT_EQ(h.density[i], 0.0);
    }
  EXPECT_EQ(h.samples, 36);
}

TEST(Histogram, ZeroFlowIsDegenerate) { EXPECT_THROW(velocity_histogram(plug_field(0.0)), DegenerateError); }

TEST(Histogram, CountsMatchLinearScan) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d(0.0, 2.0);
  std::vector<double> s(5000);
  for (auto& v : s) v = d(rng);
  const auto e = log_edges();
  const auto h = histogram_from_samples(s, e);
  std::vector<std::int64_t> counts(256, 0);
  std::int64_t under = 0, over = 0;
  for (double v : s) {
    if (v < e.front()) { ++under; continue; }
    if (v >= e.back()) { ++over; continue; }
    std::size_t i = 0;
    while (!(v >= e[i] && v < e[i + 1])) ++i;
    ++counts[i];
  }
  for (std::size_t i = 0; i < 256; ++i) EXPECT_NEAR(h.density[i] * h.width(i) * 5000.0, static_cast<double>(counts[i]), 1e-9);
  EXPECT_DOUBLE_EQ(h.underflow, under / 5000.0);
  EXPECT_DOUBLE_EQ(h.overflow, over / 5000.0);
  EXPECT_NEAR(h.in_range_mass() + h.underflow + h.overflow, 1.0, 1e-12);
}

TEST(Histogram, EdgesAreHalfOpen) {
  const std::vector<double> s{1.0, 2.0, 3.0, 0.5};
  const auto h = histogram_from_samples(s, {1.0, 2.0, 3.0});
  EXPECT_EQ(h.density[0], 0.25);
  EXPECT_EQ(h.density[1], 0.25);
  EXPECT_EQ(h.overflow, 0.25);
  EXPECT_EQ(h.underflow, 0.25);
  EXPECT_THROW(histogram_from_samples(s, {1.0, 1.0, 2.0}), ValidationError);
}

TEST(Ensemble, SingleMember) {
  const std::vector<double> s{0.5, 1.0, 2.0};
  const std::vector<HistogramPDF> v{histogram_from_samples(s, log_edges())};
  const auto e = ensemble_histogram(v);
  EXPECT_EQ(e.mean, v[0].density);
  for (double x : e.stddev) EXPECT_EQ(x, 0.0);
}

TEST(Ensemble, TwoMembers) {
  HistogramPDF a, b;
  a.edges = b.edges = {0.0, 1.0, 2.0};
  a.density = {0.2, 0.8};
  b.density = {0.6, 0.4};
  a.overflow = 0.0;
  b.overflow = 0.0;
  const std::vector<HistogramPDF> v{a, b};
  const auto e = ensemble_histogram(v);
  EXPECT_NEAR(e.mean[0], 0.4, 1e-15);
  EXPECT_NEAR(e.mean[1], 0.6, 1e-15);
  EXPECT_NEAR(e.stddev[0], 0.2, 1e-15);
  EXPECT_NEAR(e.stddev[1], 0.2, 1e-15);
  EXPECT_EQ(e.members, 2);
}

TEST(Ensemble, MismatchedEdges) {
  HistogramPDF a, b;
  a.edges = {0.0, 1.0};
  b.edges = {0.0, 2.0};
  a.density = b.density = {1.0};
  const std::vector<HistogramPDF> v{a, b};
  EXPECT_THROW(ensemble_histogram(v), ShapeError);
  EXPECT_THROW(ensemble_histogram(std::span<const HistogramPDF>{}), ShapeError);
}

TEST(Ensemble, SpreadShrinksWithPerturbation) {
  std::vector<double> spread;
  for (double eps : {0.2, 0.05, 0.01, 0.0}) {
    std::mt19937_64 rng(17);
    std::vector<HistogramPDF> hs;
    for (int i = 0; i < 64; ++i) hs.push_back(histogram_from_samples(channel_samples(eps, rng), log_edges()));
    const auto e = ensemble_histogram(hs);
    double total = 0.0;
    for (std::size_t i = 0; i < e.stddev.size(); ++i) total += e.stddev[i] * (e.edges[i + 1] - e.edges[i]);
    spread.push_back(total);
  }
  for (std::size_t i = 1; i < spread.size(); ++i) EXPECT_LT(spread[i], spread[i - 1]);
  EXPECT_EQ(spread.back(), 0.0);
}

TEST(HistogramCsv, RoundTrip) {
  std::mt19937_64 rng(5);
  const auto h = histogram_from_samples(channel_samples(0.1, rng), log_edges());
  const auto back = parse_histogram_csv(histogram_csv(h, "real_000"));
  EXPECT_EQ(back.edges, h.edges);
  EXPECT_EQ(back.density, h.density);
  EXPECT_EQ(back.underflow, h.underflow);
  EXPECT_EQ(back.overflow, h.overflow);
  EXPECT_EQ(back.samples, h.samples);
  const std::vector<HistogramPDF> v{h, h};
  const auto e = parse_histogram_csv(ensemble_histogram_csv(ensemble_histogram(v), "real"));
  EXPECT_EQ(e.density, h.density);
  EXPECT_THROW(parse_histogram_csv("a,b\n1,2\n"), FormatError);
}
