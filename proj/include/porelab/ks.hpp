#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "porelab/error.hpp"
#include "porelab/histogram.hpp"

namespace porelab {

/// Cumulative distribution sampled at bin edges and linear in between.
/// Underflow mass sits below the first edge, overflow above the last.
struct StepFunction {
  std::vector<double> edges;
  std::vector<double> cdf;

  double operator()(double x) const {
    if (x <= edges.front()) return cdf.front();
    if (x >= edges.back()) return cdf.back();
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - edges.begin()) - 1;
    const double t = (x - edges[i]) / (edges[i + 1] - edges[i]);
    return cdf[i] + t * (cdf[i + 1] - cdf[i]);
  }
};

inline constexpr double kNormalizationTolerance = 1e-9;

inline StepFunction ecdf_from_histogram(const HistogramPDF& h) {
  if (h.edges.size() < 2 || h.density.size() + 1 != h.edges.size())
    throw ValidationError("histogram has empty support");
  StepFunction f;
  f.edges = h.edges;
  f.cdf.resize(h.edges.size());
  double run = h.underflow;
  f.cdf[0] = run;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.density[i] < 0.0 || !std::isfinite(h.density[i]))
      throw ValidationError("histogram density must be finite and non-negative");
    run += h.density[i] * h.width(i);
    f.cdf[i + 1] = run;
  }
  const double total = run + h.overflow;
  if (std::abs(total - 1.0) > kNormalizationTolerance)
    throw ValidationError("histogram is not normalized: total mass " + std::to_string(total));
  return f;
}

/// c(alpha) = sqrt(-ln(alpha / 2) / 2)
inline double ks_critical_coefficient(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw RangeError("alpha must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

/// c(alpha) * sqrt((n + m) / (n m))
inline double ks_threshold(double alpha, std::int64_t n, std::int64_t m) {
  if (n < 1 || m < 1) throw RangeError("sample sizes must be at least 1");
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return ks_critical_coefficient(alpha) * std::sqrt((dn + dm) / (dn * dm));
}

struct KSResult {
  double d_nm = 0.0;
  double threshold = 0.0;
  double alpha = 0.05;
  std::int64_t n = 0;
  std::int64_t m = 0;
  bool reject = false;
};

/// Largest CDF gap over the union of both edge sets; rejects equality when the
/// gap strictly exceeds the threshold.
inline KSResult ks_two_sample(const StepFunction& f1, const StepFunction& f2, std::int64_t n, std::int64_t m,
                              double alpha = 0.05) {
  if (f1.edges.empty() || f2.edges.empty()) throw ValidationError("step function has empty support");
  KSResult r;
  r.alpha = alpha;
  r.n = n;
  r.m = m;
  r.threshold = ks_threshold(alpha, n, m);
  double d = 0.0;
  if (f1.edges == f2.edges) {
    for (std::size_t i = 0; i < f1.cdf.size(); ++i) d = std::max(d, std::abs(f1.cdf[i] - f2.cdf[i]));
  } else {
    std::vector<double> grid = f1.edges;
    grid.insert(grid.end(), f2.edges.begin(), f2.edges.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double x : grid) d = std::max(d, std::abs(f1(x) - f2(x)));
  }
  r.d_nm = std::clamp(d, 0.0, 1.0);
  r.reject = r.d_nm > r.threshold;
  return r;
}

}  // namespace porelab
