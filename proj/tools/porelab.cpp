// porelab: reconstruction and validation of 3D porous-media volumes.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "porelab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace porelab;

namespace {

/// --in / --dims / --voxel-size / --pore, falling back to the JSON sidecar.
struct VolumeArgs {
  std::string path;
  std::vector<std::int64_t> dims;
  double voxel_size = kDefaultVoxelSize;
  std::string pore = "dark";
  CLI::Option* dims_opt = nullptr;
  CLI::Option* voxel_opt = nullptr;
  CLI::Option* pore_opt = nullptr;

  void add(CLI::App* app, const std::string& name = "--in", bool required = true) {
    auto* o = app->add_option(name, path, "raw u8 volume, x fastest");
    if (required) o->required();
    add_meta(app);
  }
  void add_meta(CLI::App* app) {
    dims_opt = app->add_option("--dims", dims, "nx ny nz (default: from sidecar)")->expected(3);
    voxel_opt = app->add_option("--voxel-size", voxel_size, "voxel edge in metres");
    pore_opt = app->add_option("--pore", pore, "pore phase brightness: bright|dark")->check(CLI::IsMember({"bright", "dark"}));
  }

  struct Loaded {
    std::optional<GrayImage3D> gray;      ///< canonical: pore bright
    std::optional<BinaryImage3D> binary;  ///< pore = 1
    PorePolarity polarity = PorePolarity::dark;
  };

  Loaded load(const std::string& p) const {
    const auto side = read_sidecar(p);
    Dims d{};
    if (dims_opt && dims_opt->count())
      d = {dims[0], dims[1], dims[2]};
    else if (side)
      d = side->dims;
    else
      throw ValidationError(p + ": --dims required when no sidecar is present");
    double h = kDefaultVoxelSize;
    if (voxel_opt && voxel_opt->count())
      h = voxel_size;
    else if (side)
      h = side->voxel_size_m;
    PorePolarity pol = PorePolarity::dark;
    if (pore_opt && pore_opt->count())
      pol = parse_polarity(pore);
    else if (side)
      pol = side->pore_polarity;
    Loaded out;
    out.polarity = pol;
    if (side && side->kind == "binary")
      out.binary = load_binary_volume(p, d, h);
    else
      out.gray = canonicalize(load_volume(p, d, h), pol);
    return out;
  }
  Loaded load() const { return load(path); }
};

struct ThresholdArgs {
  int threshold = -1;
  void add(CLI::App* app) {
    app->add_option("--threshold", threshold, "gray threshold; pore = value > t after orientation (default Otsu)")
        ->check(CLI::Range(-1, 255));
  }
  int resolve(const GrayImage3D& g) const { return threshold >= 0 ? threshold : otsu_threshold(g); }
};

BinaryImage3D binary_of(const VolumeArgs::Loaded& v, const ThresholdArgs& t, Json* meta = nullptr) {
  if (v.binary) return *v.binary;
  const int th = t.resolve(*v.gray);
  if (meta) *meta = Json{{"value", th}, {"source", t.threshold >= 0 ? "user" : "otsu"}};
  return segment(*v.gray, th);
}

std::string stem_of(const std::string& p) { return fs::path(p).stem().string(); }

std::vector<Axis> parse_axes(const std::string& s) {
  if (s == "all") return {Axis::x, Axis::y, Axis::z};
  std::vector<Axis> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    out.push_back(parse_axis(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::string volume_name(const std::string& prefix, std::int64_t i) { return image_id(prefix, i) + ".raw"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"porelab: generate, measure and compare 3D porous-media volumes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "porelab 1.0.0");

  // segment
  auto* seg = app.add_subcommand("segment", "global threshold to a binary pore image");
  VolumeArgs seg_in;
  ThresholdArgs seg_t;
  std::string seg_out;
  seg_in.add(seg);
  seg_t.add(seg);
  seg->add_option("--out", seg_out, "output raw path")->required();

  // subdomains
  auto* sub = app.add_subcommand("subdomains", "cut sub-cubes out of a volume");
  VolumeArgs sub_in;
  std::int64_t sub_size = 200, sub_count = 64, sub_stride = 0;
  std::uint64_t sub_seed = 0;
  std::string sub_mode = "random-nonoverlap", sub_out, sub_prefix = "real";
  sub_in.add(sub);
  sub->add_option("--size", sub_size, "cube edge in voxels");
  sub->add_option("--count", sub_count, "number of cubes (0: every grid position)");
  sub->add_option("--mode", sub_mode, "nonoverlap-grid|random-nonoverlap|strided-grid");
  sub->add_option("--stride", sub_stride, "grid pitch for strided-grid");
  sub->add_option("--seed", sub_seed, "root seed");
  sub->add_option("--prefix", sub_prefix, "file name prefix");
  sub->add_option("--out", sub_out, "output directory")->required();

  // s2
  auto* s2 = app.add_subcommand("s2", "two-point probability function");
  VolumeArgs s2_in;
  ThresholdArgs s2_t;
  int s2_rmax = -1;
  std::string s2_dir = "all", s2_id, s2_out;
  std::vector<std::string> s2_ens;
  s2->add_option("--in", s2_in.path, "raw volume");
  s2_in.add_meta(s2);
  s2_t.add(s2);
  s2->add_option("--r-max", s2_rmax, "largest lag (default: half the smallest extent)");
  s2->add_option("--direction", s2_dir, "x|y|z|radial|all");
  s2->add_option("--ensemble", s2_ens, "per-image S2 CSVs to average instead of a volume");
  s2->add_option("--id", s2_id, "image id (default: input file stem)");
  s2->add_option("--out", s2_out, "output directory, or file for --ensemble")->required();

  // minkowski-sweep
  auto* mk = app.add_subcommand("minkowski-sweep", "Minkowski densities at every threshold");
  VolumeArgs mk_in;
  std::string mk_id, mk_out;
  mk_in.add(mk);
  mk->add_option("--id", mk_id, "image id (default: input file stem)");
  mk->add_option("--out", mk_out, "output CSV")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "generator inference");
  std::string gen_weights, gen_out, gen_pore = "dark";
  std::uint64_t gen_seed = 0;
  std::int64_t gen_index = 0, gen_crop = 0;
  std::vector<std::int64_t> gen_latent;
  double gen_h = kDefaultVoxelSize;
  gen->add_option("--weights", gen_weights, "generator G3DW file")->required();
  gen->add_option("--seed", gen_seed, "root seed");
  gen->add_option("--index", gen_index, "image index under the root seed");
  gen->add_option("--latent", gen_latent, "latent spatial extent m n o")->expected(3);
  gen->add_option("--crop", gen_crop, "center-crop edge (default: no crop)");
  gen->add_option("--voxel-size", gen_h, "voxel edge recorded in the sidecar");
  gen->add_option("--pore", gen_pore, "pore polarity of the training data")->check(CLI::IsMember({"bright", "dark"}));
  gen->add_option("--out", gen_out, "output raw path")->required();

  // interpolate
  auto* itp = app.add_subcommand("interpolate", "generate along a line between two latents");
  std::string itp_weights, itp_out, itp_pore = "dark";
  std::uint64_t itp_seed = 0;
  std::int64_t itp_a = 0, itp_b = 1, itp_crop = 0;
  int itp_steps = 5;
  std::vector<std::int64_t> itp_latent;
  double itp_h = kDefaultVoxelSize;
  itp->add_option("--weights", itp_weights, "generator G3DW file")->required();
  itp->add_option("--seed", itp_seed, "root seed");
  itp->add_option("--index-a", itp_a, "start latent index");
  itp->add_option("--index-b", itp_b, "end latent index");
  itp->add_option("--steps", itp_steps, "number of images including both ends");
  itp->add_option("--latent", itp_latent, "latent spatial extent m n o")->expected(3);
  itp->add_option("--crop", itp_crop, "center-crop edge");
  itp->add_option("--voxel-size", itp_h, "voxel edge recorded in the sidecars");
  itp->add_option("--pore", itp_pore, "pore polarity of the training data")->check(CLI::IsMember({"bright", "dark"}));
  itp->add_option("--out", itp_out, "output directory")->required();

  // score
  auto* sc = app.add_subcommand("score", "discriminator probabilities for volumes");
  std::string sc_weights, sc_out;
  std::vector<std::string> sc_files;
  int sc_top = 0;
  VolumeArgs sc_meta;
  sc->add_option("--weights", sc_weights, "discriminator G3DW file")->required();
  sc->add_option("--in", sc_files, "raw volumes (at least 64^3)")->required();
  sc_meta.add_meta(sc);
  sc->add_option("--top", sc_top, "keep the k highest scoring");
  sc->add_option("--out", sc_out, "output JSON (default stdout)");

  // activations
  auto* act = app.add_subcommand("activations", "dump per-layer feature maps");
  std::string act_weights, act_out, act_image;
  std::uint64_t act_seed = 0;
  std::int64_t act_index = 0;
  std::vector<std::int64_t> act_latent{1, 1, 1};
  VolumeArgs act_meta;
  act->add_option("--weights", act_weights, "G3DW file")->required();
  act->add_option("--seed", act_seed, "root seed (generator)");
  act->add_option("--index", act_index, "latent index (generator)");
  act->add_option("--latent", act_latent, "latent spatial extent m n o (generator)")->expected(3);
  act->add_option("--in", act_image, "64^3 raw volume (discriminator)");
  act_meta.add_meta(act);
  act->add_option("--out", act_out, "output directory")->required();

  // flow
  auto* fl = app.add_subcommand("flow", "Stokes permeability");
  VolumeArgs fl_in;
  ThresholdArgs fl_t;
  std::string fl_axis = "all", fl_id, fl_out, fl_dump;
  fl_in.add(fl);
  fl_t.add(fl);
  fl->add_option("--axis", fl_axis, "x|y|z|all or a comma list");
  fl->add_option("--id", fl_id, "image id (default: input file stem)");
  fl->add_option("--dump-field", fl_dump, "write face velocities as raw f32 under this prefix");
  fl->add_option("--out", fl_out, "output directory")->required();

  // vhist
  auto* vh = app.add_subcommand("vhist", "normalized velocity-magnitude histograms");
  VolumeArgs vh_in;
  ThresholdArgs vh_t;
  std::string vh_axis = "all", vh_id, vh_out;
  std::vector<std::string> vh_ens;
  vh->add_option("--in", vh_in.path, "raw volume");
  vh_in.add_meta(vh);
  vh_t.add(vh);
  vh->add_option("--axis", vh_axis, "x|y|z|all or a comma list");
  vh->add_option("--ensemble", vh_ens, "per-image histogram CSVs to average instead of a volume");
  vh->add_option("--id", vh_id, "image id (default: input file stem)");
  vh->add_option("--out", vh_out, "output directory, or file for --ensemble")->required();

  // ks
  auto* ks = app.add_subcommand("ks", "two-sample Kolmogorov-Smirnov test on histograms");
  std::string ks_a, ks_b, ks_out, ks_dir = "x";
  double ks_alpha = 0.05;
  std::int64_t ks_n = 0, ks_m = 0;
  ks->add_option("--a", ks_a, "histogram CSV")->required();
  ks->add_option("--b", ks_b, "histogram CSV")->required();
  ks->add_option("--alpha", ks_alpha, "significance level");
  ks->add_option("--n", ks_n, "sample size of a (default: number of bins)");
  ks->add_option("--m", ks_m, "sample size of b (default: number of bins)");
  ks->add_option("--direction", ks_dir, "label stored in the result");
  ks->add_option("--out", ks_out, "output JSON (default stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "real versus generated comparison report");
  VolumeArgs val_in;
  ValidateConfig cfg;
  std::string val_weights, val_out, val_mode = "random-nonoverlap", val_axes = "all";
  int val_threshold = -1;
  val_in.add(val, "--real");
  val->add_option("--weights", val_weights, "generator G3DW file")->required();
  val->add_option("--count", cfg.count, "images per side");
  val->add_option("--size", cfg.size, "cube edge in voxels");
  val->add_option("--seed", cfg.seed, "root seed");
  val->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  val->add_option("--mode", val_mode, "subdomain mode for real samples");
  val->add_option("--stride", cfg.stride, "grid pitch for strided-grid");
  val->add_option("--threshold", val_threshold, "gray threshold (default Otsu of the real volume)")
      ->check(CLI::Range(-1, 255));
  val->add_option("--r-max", cfg.r_max, "largest S2 lag (default size / 2)");
  val->add_option("--flow-axes", val_axes, "x|y|z|all or a comma list");
  val->add_option("--alpha", cfg.alpha, "KS significance level");
  val->add_option("--out", val_out, "output directory")->required();

  // init-weights
  auto* iw = app.add_subcommand("init-weights", "write randomly initialised weights");
  std::string iw_role = "generator", iw_out;
  std::uint64_t iw_seed = 0;
  int iw_latent = 512, iw_filters = 64;
  iw->add_option("--role", iw_role, "generator|discriminator")->check(CLI::IsMember({"generator", "discriminator"}));
  iw->add_option("--seed", iw_seed, "initialisation seed");
  iw->add_option("--latent-dim", iw_latent, "latent channels d (generator)");
  iw->add_option("--filters", iw_filters, "base filter count ngf / ndf");
  iw->add_option("--out", iw_out, "output G3DW path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << Json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  try {
    if (*seg) {
      const auto v = seg_in.load();
      Json th = nullptr;
      const BinaryImage3D b = binary_of(v, seg_t, &th);
      save_volume_with_sidecar(seg_out, b, PorePolarity::bright);
      emit(Json{{"threshold", th}, {"porosity", porosity(b)}, {"out", seg_out}});
    } else if (*sub) {
      const auto v = sub_in.load();
      if (!v.gray) throw ValidationError("subdomains expects a gray volume");
      // cut from the stored bytes so sub-volumes keep the input polarity
      const GrayImage3D raw = canonicalize(*v.gray, v.polarity);
      const auto origins = plan_subdomains(raw.dims(), sub_size, sub_count, parse_subdomain_mode(sub_mode),
                                           derive_seed(sub_seed, SeedStream::subdomains, 0), sub_stride);
      Json list = Json::array();
      for (std::size_t i = 0; i < origins.size(); ++i) {
        const auto& o = origins[i];
        const auto name = volume_name(sub_prefix, static_cast<std::int64_t>(i));
        save_volume_with_sidecar(fs::path(sub_out) / name, raw.crop(o[0], o[1], o[2], {sub_size, sub_size, sub_size}),
                                 v.polarity);
        list.push_back(Json{{"file", name}, {"origin", {o[0], o[1], o[2]}}});
      }
      emit(Json{{"count", origins.size()}, {"subdomains", list}});
    } else if (*s2) {
      if (!s2_ens.empty()) {
        std::vector<TwoPointFunction> curves;
        for (const auto& f : s2_ens) curves.push_back(parse_s2_csv(read_text(f), f));
        write_text(s2_out, ensemble_s2_csv(ensemble_stats(curves), s2_id.empty() ? "ensemble" : s2_id));
      } else {
        if (s2_in.path.empty()) throw ValidationError("s2 needs --in or --ensemble");
        const auto v = s2_in.load();
        const BinaryImage3D b = binary_of(v, s2_t);
        const std::string id = s2_id.empty() ? stem_of(s2_in.path) : s2_id;
        const int r_max = s2_rmax >= 0 ? s2_rmax : static_cast<int>(b.dims().min_extent() / 2);
        std::vector<Direction> dirs;
        if (s2_dir == "all")
          dirs.assign(kS2Directions.begin(), kS2Directions.end());
        else
          dirs.push_back(parse_direction(s2_dir));
        for (Direction d : dirs) {
          const auto f = d == Direction::radial ? s2_radial(b, r_max) : s2_directional(b, static_cast<Axis>(d), r_max);
          write_text(fs::path(s2_out) / (id + "_s2_" + direction_name(d) + ".csv"), s2_csv(f, id));
        }
      }
    } else if (*mk) {
      const auto v = mk_in.load();
      if (!v.gray) throw ValidationError("minkowski-sweep expects a gray volume");
      const auto sw = threshold_sweep(*v.gray);
      write_text(mk_out, sweep_csv(sw, mk_id.empty() ? stem_of(mk_in.path) : mk_id));
      Json j{{"otsu", nullptr}};
      if (sw.otsu) {
        j["otsu"] = *sw.otsu;
        j["at_otsu"] = minkowski_json(sw.densities[static_cast<std::size_t>(*sw.otsu)]);
      }
      emit(j);
    } else if (*gen) {
      const NetworkWeights w = load_weights(gen_weights);
      LatentVector z;
      if (!gen_latent.empty())
        z = sample_noise(w.latent_dim, gen_latent[0], gen_latent[1], gen_latent[2],
                         derive_seed(gen_seed, SeedStream::latent, static_cast<std::uint64_t>(gen_index)));
      else if (gen_crop > 0)
        z = latent_for(w, gen_crop, gen_seed, gen_index);
      else
        throw ValidationError("generate needs --latent or --crop");
      GrayImage3D img = generator_forward(w, z, gen_h);
      if (gen_crop > 0) img = img.center_crop(gen_crop);
      save_volume_with_sidecar(gen_out, img, parse_polarity(gen_pore));
      emit(Json{{"latent", {z.shape().c, z.shape().d, z.shape().h, z.shape().w}},
                {"dims", {img.dims().nx, img.dims().ny, img.dims().nz}},
                {"seed", derive_seed(gen_seed, SeedStream::latent, static_cast<std::uint64_t>(gen_index))},
                {"out", gen_out}});
    } else if (*itp) {
      const NetworkWeights w = load_weights(itp_weights);
      std::array<std::int64_t, 3> m{};
      if (!itp_latent.empty())
        m = {itp_latent[0], itp_latent[1], itp_latent[2]};
      else if (itp_crop > 0)
        m.fill(latent_extent_for(w.layers, itp_crop));
      else
        throw ValidationError("interpolate needs --latent or --crop");
      auto noise = [&](std::int64_t idx) {
        return sample_noise(w.latent_dim, m[0], m[1], m[2],
                            derive_seed(itp_seed, SeedStream::latent, static_cast<std::uint64_t>(idx)));
      };
      const auto zs = interpolate_latent(noise(itp_a), noise(itp_b), itp_steps);
      Json files = Json::array();
      for (std::size_t i = 0; i < zs.size(); ++i) {
        GrayImage3D img = generator_forward(w, zs[i], itp_h);
        if (itp_crop > 0) img = img.center_crop(itp_crop);
        const auto name = volume_name("interp", static_cast<std::int64_t>(i));
        save_volume_with_sidecar(fs::path(itp_out) / name, img, parse_polarity(itp_pore));
        files.push_back(name);
      }
      emit(Json{{"steps", itp_steps}, {"files", files}});
    } else if (*sc) {
      const NetworkWeights w = load_weights(sc_weights);
      std::vector<std::pair<double, Json>> rows;
      for (const auto& f : sc_files) {
        const auto v = sc_meta.load(f);
        if (!v.gray) throw ValidationError(f + ": score expects a gray volume");
        // the discriminator sees the stored orientation
        const GrayImage3D raw = canonicalize(*v.gray, v.polarity);
        const auto s = discriminator_score(w, raw);
        rows.emplace_back(s.score, Json{{"file", f},
                                        {"score", s.score},
                                        {"tiles", s.tiles},
                                        {"tiled", s.tiled},
                                        {"remainder_ignored", s.remainder_ignored}});
      }
      std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (sc_top > 0 && static_cast<std::size_t>(sc_top) < rows.size()) rows.resize(static_cast<std::size_t>(sc_top));
      Json out = Json::array();
      for (auto& r : rows) out.push_back(r.second);
      if (sc_out.empty())
        emit(out);
      else
        write_text(sc_out, out.dump(2) + "\n");
    } else if (*act) {
      const NetworkWeights w = load_weights(act_weights);
      Tensor input;
      if (w.role == NetworkRole::generator) {
        input = sample_noise(w.latent_dim, act_latent[0], act_latent[1], act_latent[2],
                             derive_seed(act_seed, SeedStream::latent, static_cast<std::uint64_t>(act_index)));
      } else {
        if (act_image.empty()) throw ValidationError("discriminator activations need --in");
        const auto v = act_meta.load(act_image);
        if (!v.gray) throw ValidationError("activations expects a gray volume");
        input = gray_to_tensor(canonicalize(*v.gray, v.polarity));
      }
      const auto maps = dump_activations(w, input);
      Json layers = Json::array();
      for (std::size_t i = 0; i < maps.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "layer_%02zu.f32", i + 1);
        const auto& t = maps[i];
        write_text(fs::path(act_out) / name,
                   std::string(reinterpret_cast<const char*>(t.data().data()), t.data().size() * sizeof(float)));
        layers.push_back(Json{{"file", name}, {"shape", {t.shape().c, t.shape().d, t.shape().h, t.shape().w}}});
      }
      const Json meta{{"role", role_name(w.role)}, {"dtype", "f32"}, {"layout", "c,d,h,w"}, {"layers", layers}};
      write_text(fs::path(act_out) / "activations.json", meta.dump(2) + "\n");
      emit(meta);
    } else if (*fl) {
      const auto v = fl_in.load();
      const BinaryImage3D b = binary_of(v, fl_t);
      const std::string id = fl_id.empty() ? stem_of(fl_in.path) : fl_id;
      Json summary = Json::object();
      for (Axis a : parse_axes(fl_axis)) {
        const VelocityField field = stokes_solve(b, a);
        FlowResult r = permeability(field, a);
        r.porosity = porosity(b);
        write_text(fs::path(fl_out) / (id + "_flow_" + axis_name(a) + ".json"), flow_file_text(r));
        if (!fl_dump.empty()) dump_velocity_field(fl_dump + "_" + axis_name(a), field);
        summary[axis_name(a)] = flow_json(r);
      }
      emit(summary);
    } else if (*vh) {
      if (!vh_ens.empty()) {
        std::vector<HistogramPDF> hs;
        for (const auto& f : vh_ens) hs.push_back(read_histogram_csv(f));
        write_text(vh_out, ensemble_histogram_csv(ensemble_histogram(hs), vh_id.empty() ? "ensemble" : vh_id));
      } else {
        if (vh_in.path.empty()) throw ValidationError("vhist needs --in or --ensemble");
        const auto v = vh_in.load();
        const BinaryImage3D b = binary_of(v, vh_t);
        const std::string id = vh_id.empty() ? stem_of(vh_in.path) : vh_id;
        for (Axis a : parse_axes(vh_axis))
          write_text(fs::path(vh_out) / (id + "_vhist_" + axis_name(a) + ".csv"),
                     histogram_csv(velocity_histogram(stokes_solve(b, a)), id));
      }
    } else if (*ks) {
      const HistogramPDF a = read_histogram_csv(ks_a), b = read_histogram_csv(ks_b);
      const KSResult r = ks_two_sample(ecdf_from_histogram(a), ecdf_from_histogram(b),
                                       ks_n > 0 ? ks_n : static_cast<std::int64_t>(a.bins()),
                                       ks_m > 0 ? ks_m : static_cast<std::int64_t>(b.bins()), ks_alpha);
      if (ks_out.empty())
        std::cout << ks_file_text(r, ks_dir);
      else
        write_text(ks_out, ks_file_text(r, ks_dir));
    } else if (*val) {
      const auto v = val_in.load();
      if (!v.gray) throw ValidationError("validate expects a gray real volume");
      cfg.mode = parse_subdomain_mode(val_mode);
      cfg.polarity = v.polarity;
      if (val_threshold >= 0) cfg.threshold = val_threshold;
      cfg.flow_axes = parse_axes(val_axes);
      const ValidationReport rep = validate(*v.gray, load_weights(val_weights), cfg);
      for (const auto& [name, text] : rep.files) write_text(fs::path(val_out) / name, text);
      emit(Json{{"report", (fs::path(val_out) / "report.json").string()}, {"files", rep.files.size()}});
    } else if (*iw) {
      const bool g = iw_role == "generator";
      const NetworkWeights w = g ? random_weights(NetworkRole::generator, generator_architecture(iw_latent, iw_filters), iw_seed)
                                 : random_weights(NetworkRole::discriminator, discriminator_architecture(iw_filters), iw_seed);
      save_weights(w, iw_out);
      const auto pc = parameter_count(w.layers);
      emit(Json{{"role", iw_role}, {"kernel_parameters", pc.kernels}, {"trainable_parameters", pc.trainable()}, {"out", iw_out}});
    }
  } catch (const Error& e) {
    std::cerr << Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
