#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "porelab/flow.hpp"
#include "porelab/gan.hpp"
#include "porelab/histogram.hpp"
#include "porelab/ks.hpp"
#include "porelab/microstats.hpp"
#include "porelab/minkowski.hpp"
#include "porelab/parallel.hpp"
#include "porelab/preprocess.hpp"
#include "porelab/serialize.hpp"
#include "porelab/subdomains.hpp"

namespace porelab {

inline constexpr int kReportVersion = 1;

enum class SeedStream : std::uint64_t { subdomains = 1, latent = 2 };

/// splitmix64 of (seed, stream, index); one root seed feeds every random draw.
inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index) {
  std::uint64_t z = seed ^ (static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ull) ^
                    (index * 0xD1B54A32D192ED03ull);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::string image_id(const std::string& kind, std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03lld", static_cast<long long>(i));
  return kind + buf;
}

/// Latent noise for generated image `index`, sized so the output covers
/// `edge` voxels per axis.
inline LatentVector latent_for(const NetworkWeights& gen, std::int64_t edge, std::uint64_t seed, std::int64_t index) {
  const std::int64_t m = latent_extent_for(gen.layers, edge);
  return sample_noise(gen.latent_dim, m, m, m, derive_seed(seed, SeedStream::latent, static_cast<std::uint64_t>(index)));
}

/// Generated gray image, center-cropped to `edge`, in the raw file polarity.
inline GrayImage3D generate_image(const NetworkWeights& gen, std::int64_t edge, std::uint64_t seed, std::int64_t index,
                                  double voxel_size) {
  return generator_forward(gen, latent_for(gen, edge, seed, index), voxel_size).center_crop(edge);
}

struct AnalysisOptions {
  int threshold = 127;
  int r_max = 1;
  std::vector<Axis> flow_axes{Axis::x, Axis::y, Axis::z};
  StokesOptions stokes{};
};

struct AxisFlow {
  Axis axis = Axis::x;
  std::optional<FlowResult> result;
  std::optional<HistogramPDF> histogram;
  std::string error_kind;
  std::string error;
};

struct ImageAnalysis {
  std::string id;
  std::array<TwoPointFunction, 4> s2;  ///< x, y, z, radial
  ThresholdSweep sweep;
  MinkowskiDensities densities;
  std::vector<AxisFlow> flows;
};

inline const std::array<Direction, 4> kS2Directions{Direction::x, Direction::y, Direction::z, Direction::radial};

/// Flow result and velocity histogram along one axis; solver failures are
/// recorded rather than thrown.
inline AxisFlow analyze_flow(const BinaryImage3D& bin, Axis axis, const StokesOptions& opt) {
  AxisFlow out;
  out.axis = axis;
  try {
    const VelocityField field = stokes_solve(bin, axis, opt);
    FlowResult r = permeability(field, axis);
    r.porosity = porosity(bin);
    out.result = r;
    out.histogram = velocity_histogram(field);
  } catch (const Error& e) {
    out.error_kind = e.kind();
    out.error = e.what();
  }
  return out;
}

/// Everything measured on one canonical (pore-bright) gray image.
inline ImageAnalysis analyze_image(const GrayImage3D& gray, const std::string& id, const AnalysisOptions& o) {
  ImageAnalysis a;
  a.id = id;
  const BinaryImage3D bin = segment(gray, o.threshold);
  for (int i = 0; i < 3; ++i) a.s2[static_cast<std::size_t>(i)] = s2_directional(bin, kAxes[static_cast<std::size_t>(i)], o.r_max);
  a.s2[3] = s2_radial(bin, o.r_max);
  a.sweep = threshold_sweep(gray);
  a.densities = a.sweep.densities[static_cast<std::size_t>(o.threshold)];
  for (Axis ax : o.flow_axes) a.flows.push_back(analyze_flow(bin, ax, o.stokes));
  return a;
}

inline std::string flow_file_text(const FlowResult& r) { return flow_json(r).dump(2) + "\n"; }
inline std::string ks_file_text(const KSResult& r, const std::string& dir) { return ks_json(r, dir).dump(2) + "\n"; }

/// The per-image files, named and formatted exactly as the single-purpose
/// commands write them.
inline void image_files(const ImageAnalysis& a, std::map<std::string, std::string>& files) {
  for (std::size_t i = 0; i < 4; ++i)
    files[a.id + "_s2_" + direction_name(kS2Directions[i]) + ".csv"] = s2_csv(a.s2[i], a.id);
  files[a.id + "_sweep.csv"] = sweep_csv(a.sweep, a.id);
  for (const auto& f : a.flows) {
    if (!f.result) continue;
    files[a.id + "_flow_" + axis_name(f.axis) + ".json"] = flow_file_text(*f.result);
    files[a.id + "_vhist_" + axis_name(f.axis) + ".csv"] = histogram_csv(*f.histogram, a.id);
  }
}

struct ValidateConfig {
  std::int64_t count = 64;
  std::int64_t size = 200;
  std::uint64_t seed = 0;
  int jobs = 1;
  SubdomainMode mode = SubdomainMode::random_nonoverlap;
  std::int64_t stride = 0;
  std::optional<int> threshold;
  int r_max = -1;  ///< -1: size / 2
  std::vector<Axis> flow_axes{Axis::x, Axis::y, Axis::z};
  double alpha = 0.05;
  std::int64_t ks_n = 0;  ///< 0: number of bins
  std::int64_t ks_m = 0;
  PorePolarity polarity = PorePolarity::dark;
  StokesOptions stokes{};
};

struct ValidationReport {
  Json json;
  std::map<std::string, std::string> files;  ///< relative name -> contents, report.json included
};

namespace detail {

inline Json mean_std(const std::vector<double>& v) {
  if (v.empty()) return Json{{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return Json{{"mean", m}, {"std", std::sqrt(s / static_cast<double>(v.size()))}, {"n", v.size()}};
}

inline Json image_json(const ImageAnalysis& a) {
  Json j{{"id", a.id}, {"minkowski", minkowski_json(a.densities)}, {"flow", Json::object()}};
  for (const auto& f : a.flows) {
    if (f.result)
      j["flow"][axis_name(f.axis)] = flow_json(*f.result);
    else
      j["flow"][axis_name(f.axis)] = Json{{"error", {{"kind", f.error_kind}, {"message", f.error}}}};
  }
  return j;
}

inline Json ensemble_json(const std::vector<ImageAnalysis>& imgs, const std::vector<Axis>& axes) {
  std::vector<double> phi, sv, kv, chiv;
  for (const auto& a : imgs) {
    phi.push_back(a.densities.phi);
    sv.push_back(a.densities.sv);
    kv.push_back(a.densities.kv);
    chiv.push_back(a.densities.chiv);
  }
  Json j{{"images", imgs.size()},
         {"minkowski", {{"phi", mean_std(phi)}, {"sv", mean_std(sv)}, {"kv", mean_std(kv)}, {"chiv", mean_std(chiv)}}},
         {"permeability_m2", Json::object()},
         {"effective_porosity", Json::object()}};
  for (std::size_t k = 0; k < axes.size(); ++k) {
    std::vector<double> perm, phie;
    std::int64_t failed = 0;
    for (const auto& a : imgs) {
      if (a.flows[k].result) {
        perm.push_back(a.flows[k].result->permeability_m2);
        phie.push_back(a.flows[k].result->effective_porosity);
      } else {
        ++failed;
      }
    }
    Json p = mean_std(perm);
    p["failed"] = failed;
    j["permeability_m2"][axis_name(axes[k])] = p;
    j["effective_porosity"][axis_name(axes[k])] = mean_std(phie);
  }
  return j;
}

}  // namespace detail

/// The full real-versus-generated comparison. `real` is the canonical
/// (pore-bright) gray volume; generated images are brought to the same
/// orientation with `cfg.polarity`.
inline ValidationReport validate(const GrayImage3D& real, const NetworkWeights& gen, const ValidateConfig& cfg) {
  if (gen.role != NetworkRole::generator) throw ValidationError("validate needs generator weights");
  validate_architecture(gen);
  if (cfg.size < 2) throw RangeError("sample size must be at least 2");
  if (cfg.count < 1) throw RangeError("sample count must be at least 1");

  ValidationReport rep;
  const int t = cfg.threshold ? *cfg.threshold : otsu_threshold(real);
  if (t < 0 || t > 255) throw RangeError("threshold must lie in [0, 255]");
  AnalysisOptions opt;
  opt.threshold = t;
  opt.r_max = cfg.r_max >= 0 ? cfg.r_max : static_cast<int>(cfg.size / 2);
  opt.flow_axes = cfg.flow_axes;
  opt.stokes = cfg.stokes;

  const auto origins = plan_subdomains(real.dims(), cfg.size, cfg.count, cfg.mode,
                                       derive_seed(cfg.seed, SeedStream::subdomains, 0), cfg.stride);
  const std::int64_t n = static_cast<std::int64_t>(origins.size());
  std::vector<ImageAnalysis> reals(static_cast<std::size_t>(n)), synths(static_cast<std::size_t>(n));
  const Dims cube{cfg.size, cfg.size, cfg.size};

  parallel_for_index(2 * n, cfg.jobs, [&](std::int64_t task) {
    const std::int64_t i = task / 2;
    const auto ui = static_cast<std::size_t>(i);
    if (task % 2 == 0) {
      const auto& o = origins[ui];
      reals[ui] = analyze_image(real.crop(o[0], o[1], o[2], cube), image_id("real", i), opt);
    } else {
      const GrayImage3D g = canonicalize(generate_image(gen, cfg.size, cfg.seed, i, real.voxel_size()), cfg.polarity);
      synths[ui] = analyze_image(g, image_id("synth", i), opt);
    }
  });

  Json& j = rep.json;
  j["report_version"] = kReportVersion;
  j["config"] = Json{{"count", n},
                     {"size", cfg.size},
                     {"seed", cfg.seed},
                     {"subdomain_mode", subdomain_mode_name(cfg.mode)},
                     {"r_max", opt.r_max},
                     {"flow_axes", Json::array()},
                     {"alpha", cfg.alpha},
                     {"pore_polarity", polarity_name(cfg.polarity)},
                     {"voxel_size_m", real.voxel_size()},
                     {"real_dims", {real.dims().nx, real.dims().ny, real.dims().nz}}};
  for (Axis a : cfg.flow_axes) j["config"]["flow_axes"].push_back(axis_name(a));
  j["threshold"] = Json{{"value", t}, {"source", cfg.threshold ? "user" : "otsu"}};
  const std::int64_t m = latent_extent_for(gen.layers, cfg.size);
  j["generator"] = Json{{"latent_dim", gen.latent_dim},
                        {"latent_extent", m},
                        {"output_extent", generator_output_extent(gen.layers, m)},
                        {"crop", cfg.size}};

  j["images"] = Json::array();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    Json r = detail::image_json(reals[ui]);
    r["kind"] = "real";
    r["origin"] = {origins[ui][0], origins[ui][1], origins[ui][2]};
    j["images"].push_back(r);
    Json s = detail::image_json(synths[ui]);
    s["kind"] = "synthetic";
    s["latent_seed"] = derive_seed(cfg.seed, SeedStream::latent, static_cast<std::uint64_t>(i));
    j["images"].push_back(s);
    image_files(reals[ui], rep.files);
    image_files(synths[ui], rep.files);
  }

  j["ensembles"] = Json{{"real", detail::ensemble_json(reals, cfg.flow_axes)},
                        {"synthetic", detail::ensemble_json(synths, cfg.flow_axes)}};

  for (const auto& [kind, set] : {std::pair{std::string("real"), &reals}, std::pair{std::string("synth"), &synths}}) {
    for (std::size_t d = 0; d < 4; ++d) {
      std::vector<TwoPointFunction> curves;
      for (const auto& a : *set) curves.push_back(a.s2[d]);
      rep.files[kind + "_s2_" + direction_name(kS2Directions[d]) + ".csv"] = ensemble_s2_csv(ensemble_stats(curves), kind);
    }
  }

  j["ks"] = Json::object();
  for (std::size_t k = 0; k < cfg.flow_axes.size(); ++k) {
    const std::string ax = axis_name(cfg.flow_axes[k]);
    std::array<std::vector<HistogramPDF>, 2> hs;
    for (const auto& a : reals)
      if (a.flows[k].histogram) hs[0].push_back(*a.flows[k].histogram);
    for (const auto& a : synths)
      if (a.flows[k].histogram) hs[1].push_back(*a.flows[k].histogram);
    if (hs[0].empty() || hs[1].empty()) {
      j["ks"][ax] = Json{{"error", {{"kind", "no_flow"}, {"message", "no velocity histograms on one side"}}}};
      continue;
    }
    const EnsembleHistogram er = ensemble_histogram(hs[0]), eg = ensemble_histogram(hs[1]);
    rep.files["real_vhist_" + ax + ".csv"] = ensemble_histogram_csv(er, "real");
    rep.files["synth_vhist_" + ax + ".csv"] = ensemble_histogram_csv(eg, "synth");
    const auto bins = static_cast<std::int64_t>(er.mean.size());
    const KSResult ks = ks_two_sample(ecdf_from_histogram(er.mean_pdf()), ecdf_from_histogram(eg.mean_pdf()),
                                      cfg.ks_n > 0 ? cfg.ks_n : bins, cfg.ks_m > 0 ? cfg.ks_m : bins, cfg.alpha);
    j["ks"][ax] = ks_json(ks, ax);
    rep.files["ks_" + ax + ".json"] = ks_file_text(ks, ax);
  }

  j["files"] = Json::array();
  for (const auto& [name, _] : rep.files) j["files"].push_back(name);
  rep.files["report.json"] = j.dump(2) + "\n";
  return rep;
}

}  // namespace porelab
