#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "porelab/error.hpp"
#include "porelab/volume.hpp"
#include "porelab/voxel_io.hpp"

namespace porelab {

using GrayHistogram = std::array<std::int64_t, 256>;

inline GrayHistogram gray_histogram(const GrayImage3D& img) {
  GrayHistogram h{};
  for (auto v : img.data()) ++h[v];
  return h;
}

/// Cumulative-histogram remapping
///   v' = round(255 * (cdf(v) - cdf_min) / (N - cdf_min)),
/// with cdf_min the cdf of the lowest occupied gray level. A constant image
/// has N == cdf_min and maps to all zeros.
inline GrayImage3D histogram_equalize(const GrayImage3D& img) {
  const auto hist = gray_histogram(img);
  const std::int64_t n = img.size();
  std::array<std::int64_t, 256> cdf{};
  std::int64_t run = 0;
  std::int64_t cdf_min = -1;
  for (int v = 0; v < 256; ++v) {
    run += hist[static_cast<std::size_t>(v)];
    cdf[static_cast<std::size_t>(v)] = run;
    if (cdf_min < 0 && hist[static_cast<std::size_t>(v)] > 0) cdf_min = run;
  }
  std::array<std::uint8_t, 256> lut{};
  const std::int64_t denom = n - cdf_min;
  for (int v = 0; v < 256; ++v) {
    if (denom == 0 || cdf[static_cast<std::size_t>(v)] < cdf_min) continue;
    const double r = 255.0 * static_cast<double>(cdf[static_cast<std::size_t>(v)] - cdf_min) / static_cast<double>(denom);
    lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(std::lround(r));
  }
  std::vector<std::uint8_t> out(img.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lut[img.values()[i]];
  return GrayImage3D(img.dims(), img.voxel_size(), std::move(out));
}

/// Otsu threshold over the 256-bin histogram. Voxels with value <= t form the
/// lower class. Ties resolve to the smallest maximizing t.
inline int otsu_threshold(const GrayHistogram& hist) {
  double total = 0.0;
  double sum_all = 0.0;
  int occupied = 0;
  for (int v = 0; v < 256; ++v) {
    const double c = static_cast<double>(hist[static_cast<std::size_t>(v)]);
    total += c;
    sum_all += v * c;
    if (c > 0) ++occupied;
  }
  if (occupied < 2) throw DegenerateError("Otsu threshold needs at least two distinct gray values");

  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    const double c = static_cast<double>(hist[static_cast<std::size_t>(t)]);
    w0 += c;
    sum0 += t * c;
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

inline int otsu_threshold(const GrayImage3D& img) { return otsu_threshold(gray_histogram(img)); }

/// Pore (label 1) iff value > t.
inline BinaryImage3D segment(const GrayImage3D& img, int t) {
  if (t < 0 || t > 255) throw RangeError("threshold must lie in [0, 255]");
  std::vector<std::uint8_t> out(img.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.values()[i] > t ? 1 : 0;
  return BinaryImage3D(img.dims(), img.voxel_size(), std::move(out));
}

inline GrayImage3D invert(const GrayImage3D& img) {
  std::vector<std::uint8_t> out(img.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(255 - img.values()[i]);
  return GrayImage3D(img.dims(), img.voxel_size(), std::move(out));
}

/// Brings a scan into canonical form, where the pore phase is the bright one.
/// All segmentation and morphology routines assume canonical input.
inline GrayImage3D canonicalize(const GrayImage3D& img, PorePolarity polarity) {
  return polarity == PorePolarity::bright ? img : invert(img);
}

}  // namespace porelab
