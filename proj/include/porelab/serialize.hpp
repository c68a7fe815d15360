#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "porelab/error.hpp"
#include "porelab/flow.hpp"
#include "porelab/histogram.hpp"
#include "porelab/ks.hpp"
#include "porelab/microstats.hpp"
#include "porelab/minkowski.hpp"
#include "porelab/voxel_io.hpp"

namespace porelab {

using Json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// CSV files open with a `# {json}` line carrying their metadata.
inline std::string csv_header(const Json& meta, const std::string& columns) {
  return "# " + meta.dump() + "\n" + columns + "\n";
}

inline Json s2_meta(const TwoPointFunction& f, const std::string& image_id) {
  return Json{{"direction", direction_name(f.direction)}, {"voxel_size", f.voxel_size}, {"image_id", image_id}};
}

inline std::string s2_csv(const TwoPointFunction& f, const std::string& image_id) {
  std::string s = csv_header(s2_meta(f, image_id), "lag_voxels,lag_m,value");
  for (std::size_t i = 0; i < f.values.size(); ++i)
    s += std::to_string(f.distances[i]) + "," + format_double(f.distances[i] * f.voxel_size) + "," +
         format_double(f.values[i]) + "\n";
  return s;
}

inline std::string ensemble_s2_csv(const EnsembleCurve& e, const std::string& image_id) {
  Json meta{{"direction", direction_name(e.direction)},
            {"voxel_size", e.voxel_size},
            {"image_id", image_id},
            {"samples", e.samples}};
  std::string s = csv_header(meta, "lag_voxels,lag_m,mean,std");
  for (std::size_t i = 0; i < e.mean.size(); ++i)
    s += std::to_string(e.distances[i]) + "," + format_double(e.distances[i] * e.voxel_size) + "," +
         format_double(e.mean[i]) + "," + format_double(e.stddev[i]) + "\n";
  return s;
}

inline std::string sweep_csv(const ThresholdSweep& sw, const std::string& image_id) {
  Json meta{{"voxel_size", sw.voxel_size}, {"otsu", nullptr}, {"image_id", image_id}};
  if (sw.otsu) meta["otsu"] = *sw.otsu;
  std::string s = csv_header(meta, "threshold,phi,sv,kv,chiv");
  for (std::size_t t = 0; t < 256; ++t) {
    const auto& m = sw.densities[t];
    s += std::to_string(t) + "," + format_double(m.phi) + "," + format_double(m.sv) + "," + format_double(m.kv) +
         "," + format_double(m.chiv) + "\n";
  }
  return s;
}

inline Json minkowski_json(const MinkowskiDensities& m) {
  return Json{{"phi", m.phi}, {"sv", m.sv}, {"kv", m.kv}, {"chiv", m.chiv}};
}

inline std::string histogram_csv(const HistogramPDF& h, const std::string& image_id) {
  Json meta{{"image_id", image_id}, {"samples", h.samples}, {"underflow", h.underflow}, {"overflow", h.overflow}};
  std::string s = csv_header(meta, "bin_lo,bin_hi,density");
  for (std::size_t i = 0; i < h.bins(); ++i)
    s += format_double(h.edges[i]) + "," + format_double(h.edges[i + 1]) + "," + format_double(h.density[i]) + "\n";
  return s;
}

inline std::string ensemble_histogram_csv(const EnsembleHistogram& e, const std::string& image_id) {
  Json meta{{"image_id", image_id}, {"members", e.members}, {"underflow", e.underflow}, {"overflow", e.overflow}};
  std::string s = csv_header(meta, "bin_lo,bin_hi,mean,std");
  for (std::size_t i = 0; i < e.mean.size(); ++i)
    s += format_double(e.edges[i]) + "," + format_double(e.edges[i + 1]) + "," + format_double(e.mean[i]) + "," +
         format_double(e.stddev[i]) + "\n";
  return s;
}

/// Reads either a single histogram (density column) or an ensemble (mean
/// column, used as the density).
inline HistogramPDF parse_histogram_csv(const std::string& text, const std::string& source = "histogram") {
  std::istringstream in(text);
  std::string line;
  HistogramPDF h;
  Json meta = Json::object();
  if (!std::getline(in, line)) throw FormatError(source + ": empty file");
  if (line.rfind("# ", 0) == 0) {
    try {
      meta = Json::parse(line.substr(2));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(source + ": bad header: " + e.what());
    }
    if (!std::getline(in, line)) throw FormatError(source + ": missing column row");
  }
  if (line != "bin_lo,bin_hi,density" && line != "bin_lo,bin_hi,mean,std")
    throw FormatError(source + ": unexpected columns '" + line + "'");
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double lo = 0, hi = 0, v = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &lo, &hi, &v) != 3)
      throw FormatError(source + ": malformed row " + std::to_string(row));
    if (h.edges.empty()) {
      h.edges.push_back(lo);
    } else if (h.edges.back() != lo) {
      throw FormatError(source + ": bins are not contiguous at row " + std::to_string(row));
    }
    h.edges.push_back(hi);
    h.density.push_back(v);
  }
  if (h.density.empty()) throw FormatError(source + ": no bins");
  h.underflow = meta.value("underflow", 0.0);
  h.overflow = meta.value("overflow", 0.0);
  h.samples = meta.contains("samples") ? meta["samples"].get<std::int64_t>() : meta.value("members", std::int64_t{0});
  return h;
}

inline HistogramPDF read_histogram_csv(const std::filesystem::path& path) {
  return parse_histogram_csv(read_text(path), path.string());
}

inline TwoPointFunction parse_s2_csv(const std::string& text, const std::string& source = "s2") {
  std::istringstream in(text);
  std::string line;
  TwoPointFunction f;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError(source + ": missing JSON header line");
  try {
    const Json meta = Json::parse(line.substr(2));
    f.direction = parse_direction(meta.at("direction").get<std::string>());
    f.voxel_size = meta.at("voxel_size").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source + ": bad header: " + e.what());
  }
  if (!std::getline(in, line) || line != "lag_voxels,lag_m,value")
    throw FormatError(source + ": expected columns lag_voxels,lag_m,value");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int lag = 0;
    double lag_m = 0, v = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &lag, &lag_m, &v) != 3)
      throw FormatError(source + ": malformed row '" + line + "'");
    f.distances.push_back(lag);
    f.values.push_back(v);
  }
  return f;
}

inline Json flow_json(const FlowResult& r) {
  return Json{{"axis", axis_name(r.axis)},
              {"permeability_m2", r.permeability_m2},
              {"permeability_darcy", r.permeability_darcy},
              {"permeability_voxel", r.permeability_voxel},
              {"porosity", r.porosity},
              {"effective_porosity", r.effective_porosity},
              {"mean_speed", r.mean_speed},
              {"inlet_flux", r.inlet_flux},
              {"outlet_flux", r.outlet_flux},
              {"iterations", r.iterations}};
}

inline Json ks_json(const KSResult& r, const std::string& direction) {
  return Json{{"direction", direction}, {"d_nm", r.d_nm},   {"threshold", r.threshold}, {"alpha", r.alpha},
              {"n", r.n},               {"m", r.m},         {"reject", r.reject}};
}

/// Three raw f32 face arrays (`<prefix>_u.raw`, `_v.raw`, `_w.raw`) plus a
/// `<prefix>.json` header.
inline void dump_velocity_field(const std::filesystem::path& prefix, const VelocityField& f) {
  static const char* names[3] = {"u", "v", "w"};
  Json meta{{"dims", {f.dims.nx, f.dims.ny, f.dims.nz}},
            {"voxel_size_m", f.voxel_size},
            {"axis", axis_name(f.axis)},
            {"viscosity", f.viscosity},
            {"pressure_drop", f.pressure_drop},
            {"dtype", "f32"},
            {"faces", Json::object()}};
  for (int a = 0; a < 3; ++a) {
    const Dims fd = f.face_dims(a);
    const std::string file = prefix.filename().string() + "_" + names[a] + ".raw";
    meta["faces"][names[a]] = Json{{"file", file}, {"dims", {fd.nx, fd.ny, fd.nz}}};
    std::vector<float> v(f.face[static_cast<std::size_t>(a)].begin(), f.face[static_cast<std::size_t>(a)].end());
    std::string bytes(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
    write_text(prefix.parent_path() / file, bytes);
  }
  write_text(prefix.string() + ".json", meta.dump(2) + "\n");
}

}  // namespace porelab
