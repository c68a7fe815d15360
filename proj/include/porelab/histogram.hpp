#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "porelab/error.hpp"
#include "porelab/flow.hpp"

namespace porelab {

inline constexpr int kVelocityBins = 256;
inline constexpr double kVelocityLo = 1e-4;
inline constexpr double kVelocityHi = 1e2;

/// Probability density over bins [edges[i], edges[i+1]). Mass below the first
/// edge or at/above the last is kept as fractions of all samples.
struct HistogramPDF {
  std::vector<double> edges;
  std::vector<double> density;
  double underflow = 0.0;
  double overflow = 0.0;
  std::int64_t samples = 0;

  std::size_t bins() const { return density.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  double in_range_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < bins(); ++i) m += density[i] * width(i);
    return m;
  }
};

/// bins + 1 edges, uniformly spaced in log10 between lo and hi.
inline std::vector<double> log_edges(double lo = kVelocityLo, double hi = kVelocityHi, int bins = kVelocityBins) {
  if (!(lo > 0.0) || !(hi > lo) || bins < 1) throw RangeError("log bins need 0 < lo < hi and at least one bin");
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i <= bins; ++i) e[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / bins);
  e.front() = lo;
  e.back() = hi;
  return e;
}

inline HistogramPDF histogram_from_samples(std::span<const double> samples, std::vector<double> edges) {
  if (edges.size() < 2) throw ValidationError("histogram needs at least two edges");
  if (!std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw ValidationError("histogram edges must be strictly increasing");
  HistogramPDF h;
  h.edges = std::move(edges);
  h.density.assign(h.edges.size() - 1, 0.0);
  std::vector<std::int64_t> counts(h.density.size(), 0);
  std::int64_t under = 0, over = 0;
  for (double s : samples) {
    if (s < h.edges.front()) {
      ++under;
    } else if (s >= h.edges.back()) {
      ++over;
    } else {
      const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), s);
      ++counts[static_cast<std::size_t>(it - h.edges.begin() - 1)];
    }
  }
  h.samples = static_cast<std::int64_t>(samples.size());
  if (h.samples == 0) return h;
  const double n = static_cast<double>(h.samples);
  for (std::size_t i = 0; i < counts.size(); ++i) h.density[i] = static_cast<double>(counts[i]) / (n * h.width(i));
  h.underflow = static_cast<double>(under) / n;
  h.overflow = static_cast<double>(over) / n;
  return h;
}

/// Cell-centred speeds over the flowing region, divided by their mean.
inline std::vector<double> normalized_speeds(const VelocityField& field) {
  const Dims& d = field.dims;
  std::vector<double> s;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!field.region[static_cast<std::size_t>(linear_index(d, x, y, z))]) continue;
        const auto v = field.cell_velocity(x, y, z);
        s.push_back(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
      }
  double mean = 0.0;
  for (double v : s) mean += v;
  if (!s.empty()) mean /= static_cast<double>(s.size());
  if (!(mean > 0.0)) throw DegenerateError("mean cell speed is zero; cannot normalize velocities");
  for (double& v : s) v /= mean;
  return s;
}

inline HistogramPDF velocity_histogram(const VelocityField& field) {
  const auto s = normalized_speeds(field);
  return histogram_from_samples(s, log_edges());
}

/// Per-bin arithmetic mean and population standard deviation.
struct EnsembleHistogram {
  std::vector<double> edges;
  std::vector<double> mean;
  std::vector<double> stddev;
  double underflow = 0.0;
  double overflow = 0.0;
  std::int64_t members = 0;

  HistogramPDF mean_pdf() const {
    HistogramPDF h;
    h.edges = edges;
    h.density = mean;
    h.underflow = underflow;
    h.overflow = overflow;
    h.samples = members;
    return h;
  }
};

inline EnsembleHistogram ensemble_histogram(std::span<const HistogramPDF> hists) {
  if (hists.empty()) throw ShapeError("ensemble of zero histograms");
  EnsembleHistogram e;
  e.edges = hists[0].edges;
  const std::size_t nb = hists[0].bins();
  for (const auto& h : hists)
    if (h.edges != e.edges || h.bins() != nb) throw ShapeError("histograms in an ensemble must share bin edges");
  e.members = static_cast<std::int64_t>(hists.size());
  const double n = static_cast<double>(hists.size());
  e.mean.assign(nb, 0.0);
  e.stddev.assign(nb, 0.0);
  // Welford: identical members give a zero spread exactly.
  double k = 0.0;
  for (const auto& h : hists) {
    k += 1.0;
    for (std::size_t i = 0; i < nb; ++i) {
      const double dv = h.density[i] - e.mean[i];
      e.mean[i] += dv / k;
      e.stddev[i] += dv * (h.density[i] - e.mean[i]);
    }
    e.underflow += h.underflow;
    e.overflow += h.overflow;
  }
  e.underflow /= n;
  e.overflow /= n;
  for (double& s : e.stddev) s = std::sqrt(s / n);
  return e;
}

}  // namespace porelab
