// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "../conv_oracle.hpp"
#include "../flow_cases.hpp"
#include "../helpers.hpp"
#include "../phantom.hpp"
#include "porelab/gan.hpp"
#include "porelab/ks.hpp"
#include "porelab/microstats.hpp"
#include "porelab/minkowski.hpp"
#include "porelab/serialize.hpp"

using namespace porelab;
using namespace porelab::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome convolution_oracle() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const ConvGeometry geoms[] = {{4, 1, 0}, {4, 2, 1}, {3, 1, 1}};
  const std::int64_t cin = 2, cout = 3;
  double worst = 0.0;
  int cases = 0;
  for (const auto& g : geoms)
    for (std::int64_t d = 1; d <= 6; ++d)
      for (std::int64_t h = 1; h <= 6; ++h)
        for (std::int64_t w = 1; w <= 6; ++w) {
          const auto k = random_floats(static_cast<std::size_t>(cin * cout * g.kernel * g.kernel * g.kernel), rng);
          const Shape4 in{cin, d, h, w};
          if (d + 2 * g.padding >= g.kernel && h + 2 * g.padding >= g.kernel && w + 2 * g.padding >= g.kernel) {
            const Tensor x(in, random_floats(static_cast<std::size_t>(in.elements()), rng));
            const Tensor y = conv3d(x, k, cout, g);
            worst = std::max(worst, max_rel_error(y.values(), UnrolledConv(in, cout, k, g).apply(x.values())));
            ++cases;
          }
          // Transposed: input (cout, d, h, w) to output (cin, ...), sharing the conv kernel buffer.
          const Shape4 tin{cout, d, h, w};
          const Shape4 tout{cin, conv_transpose_output_extent(d, g), conv_transpose_output_extent(h, g),
                            conv_transpose_output_extent(w, g)};
          if (tout.d <= 0 || tout.h <= 0 || tout.w <= 0) continue;
          const Tensor y(tin, random_floats(static_cast<std::size_t>(tin.elements()), rng));
          const Tensor xt = conv_transpose3d(y, k, cin, g);
          worst = std::max(worst, max_rel_error(xt.values(), UnrolledConv(tout, cout, k, g).apply_transposed(y.values())));
          ++cases;
        }
  o.check(worst < 1e-5, "max relative error < 1e-5");
  o.note(std::to_string(cases) + " cases, max rel err " + fmt("%.2e", worst));
  return o;
}

Outcome size_law() {
  Outcome o;
  const auto w = random_weights(NetworkRole::generator, generator_architecture(4, 1), 3);
  for (std::int64_t m : {1, 2, 3, 10}) {
    const auto img = generator_forward(w, sample_noise(4, m, m, m, static_cast<std::uint64_t>(m)));
    const std::int64_t want = 16 * m + 48;
    o.check(img.dims() == Dims{want, want, want}, "m=" + std::to_string(m) + " gives " + std::to_string(want));
    if (m == 1) o.check(img.dims() == Dims{64, 64, 64}, "m=1 gives 64^3");
  }
  o.note("edges 64, 80, 96, 208");
  return o;
}

Outcome s2_oracle() {
  Outcome o;
  int mismatches = 0;
  bool lag0 = true;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto bin = random_binary({16, 16, 16}, 0.1 + 0.016 * static_cast<double>(s), 500 + s);
    const Dims& d = bin.dims();
    for (int a = 0; a < 3; ++a) {
      const auto got = s2_pair_counts(bin, kAxes[static_cast<std::size_t>(a)], 15);
      for (int r = 0; r <= 15; ++r) {
        std::uint64_t both = 0, pairs = 0;
        for (std::int64_t z = 0; z < d.nz; ++z)
          for (std::int64_t y = 0; y < d.ny; ++y)
            for (std::int64_t x = 0; x < d.nx; ++x) {
              std::array<std::int64_t, 3> q{x, y, z};
              q[static_cast<std::size_t>(a)] += r;
              if (q[static_cast<std::size_t>(a)] >= d[a]) continue;
              ++pairs;
              both += bin.at(x, y, z) & bin.at(q[0], q[1], q[2]);
            }
        if (got.both_pore[static_cast<std::size_t>(r)] != both || got.pairs[static_cast<std::size_t>(r)] != pairs) ++mismatches;
      }
      lag0 = lag0 && s2_directional(bin, kAxes[static_cast<std::size_t>(a)], 1).values[0] == porosity(bin);
    }
  }
  o.check(mismatches == 0, "exact pair counts");
  o.check(lag0, "S2(0) == phi");
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto bin = random_binary({64, 64, 64}, 0.2 + 0.1 * static_cast<double>(s), 900 + s);
    const double phi = porosity(bin);
    for (const auto& f : {s2_directional(bin, Axis::x, 32), s2_directional(bin, Axis::y, 32),
                          s2_directional(bin, Axis::z, 32), s2_radial(bin, 32)})
      worst = std::max(worst, std::abs(f.values[32] - phi * phi));
  }
  o.check(worst < 0.02, "|S2(32) - phi^2| < 0.02");
  o.note("50 images, " + std::to_string(mismatches) + " count mismatches, max |S2(32)-phi^2| " + fmt("%.4f", worst));
  return o;
}

Outcome minkowski_oracles() {
  Outcome o;
  const auto voxel = make_binary({10, 10, 10}, [](auto x, auto y, auto z) { return x == 4 && y == 4 && z == 4; });
  o.check(euler_characteristic(voxel) == 1, "single voxel chi = 1");
  const auto ring = make_binary({7, 7, 3}, [](auto x, auto y, auto z) {
    return z == 1 && x >= 1 && x <= 5 && y >= 1 && y <= 5 && (x == 1 || x == 5 || y == 1 || y == 5);
  });
  o.check(euler_characteristic(ring) == 0, "voxel torus chi = 0");

  const auto a = random_binary({12, 12, 12}, 0.45, 1), b = random_binary({12, 12, 12}, 0.6, 2);
  const auto u = make_binary({12, 12, 25}, [&](auto x, auto y, auto z) {
    if (z < 12) return a.at(x, y, z) == 1;
    if (z > 12) return b.at(x, y, z - 13) == 1;
    return false;
  });
  const auto ca = minkowski_counts(a), cb = minkowski_counts(b), cu = minkowski_counts(u);
  bool additive = cu.pore == ca.pore + cb.pore && cu.euler() == ca.euler() + cb.euler();
  additive = additive && cu.slice_euler_sum(2) == ca.slice_euler_sum(2) + cb.slice_euler_sum(2);
  o.check(additive, "disjoint additivity");

  const double r = 20.0, n = 48.0;
  const auto bl = ball(48, r);
  const double v = n * n * n;
  const double sv_ratio = specific_surface(bl) / (4 * std::numbers::pi * r * r / v);
  const double kv_ratio = mean_curvature_density(bl) / (4 * std::numbers::pi * r / v);
  const auto chi = euler_characteristic(bl);
  o.check(sv_ratio >= 1.4 && sv_ratio <= 1.6, "ball surface ratio in [1.4, 1.6]");
  o.check(std::abs(kv_ratio - 1.0) <= 0.2, "ball mean curvature within 20%");
  o.check(chi == 1, "ball chi = 1");
  o.note("ball R=20: surface ratio " + fmt("%.4f", sv_ratio) + ", curvature ratio " + fmt("%.4f", kv_ratio) +
         ", chi " + std::to_string(chi));
  return o;
}

Outcome stokes_analytic() {
  Outcome o;
  double worst_time = 0.0;
  auto timed = [&](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    worst_time = std::max(worst_time, seconds_since(t0));
    return r;
  };
  double worst_balance = 0.0;
  auto balance = [&](const VelocityField& f) {
    worst_balance = std::max(worst_balance, std::abs(f.inlet_flux - f.outlet_flux) / std::abs(f.outlet_flux));
  };

  const auto ch = timed([] { return stokes_solve(plane_channel(20), Axis::x); });
  balance(ch);
  const double k_ch = permeability(ch, Axis::x).permeability_voxel;
  const double k_an = plane_channel_permeability(20);
  const double e_ch = std::abs(k_ch / k_an - 1.0);
  o.check(e_ch < 0.05, "plane channel within 5%");

  const auto duct_img = square_duct(20);
  const auto duct = timed([&] { return stokes_solve(duct_img, Axis::x); });
  balance(duct);
  const double q_an = duct_flux(10.0, 10.0, 1.0 / static_cast<double>(duct_img.dims().nx));
  const double e_duct = std::abs(duct.outlet_flux / q_an - 1.0);
  o.check(e_duct < 0.05, "square duct within 5%");

  const auto tube = timed([] { return stokes_solve(capillary_tube(15, 34), Axis::x); });
  balance(tube);
  const double gap = sup_gap_to_uniform02(velocity_histogram(tube));
  o.check(gap < 0.1, "capillary histogram sup deviation < 0.1");

  const auto pack = timed([] { return stokes_solve(sphere_pack(32, 60, 4.5, 3), Axis::x); });
  balance(pack);
  o.check(pack.max_divergence < 1e-6, "sphere pack cell divergence < 1e-6");

  o.check(worst_balance < 1e-6, "mass conservation 1e-6");
  o.check(worst_time < 300.0, "each solve < 5 min");
  o.note("channel err " + fmt("%.4f", e_ch) + ", duct err " + fmt("%.4f", e_duct) + ", tube sup gap " + fmt("%.4f", gap) +
         ", flux imbalance " + fmt("%.1e", worst_balance) + ", slowest solve " + fmt("%.1f s", worst_time));
  return o;
}

Outcome ks_closed_form() {
  Outcome o;
  const double c = ks_critical_coefficient(0.05);
  const double t = ks_threshold(0.05, 256, 256);
  o.check(std::abs(c - 1.3581) <= 1e-3, "c(0.05) = 1.3581");
  o.check(std::abs(t - 0.1200) <= 1e-3, "threshold 0.1200");
  const StepFunction base{{0.0, 1.0, 2.0}, {0.0, 0.5, 1.0}};
  for (double d : {0.09, 0.07}) {
    const StepFunction other{{0.0, 1.0, 2.0}, {0.0, 0.5 + d, 1.0}};
    const auto r = ks_two_sample(base, other, 256, 256, 0.05);
    o.check(std::abs(r.d_nm - d) < 1e-12 && !r.reject, "d = " + fmt("%.2f", d) + " accepted");
  }
  o.note("c " + fmt("%.5f", c) + ", threshold " + fmt("%.5f", t));
  return o;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PORELAB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism() {
  Outcome o;
  const auto dir = scratch_dir("acceptance_validate");
  save_volume_with_sidecar(dir / "real.raw", grain_phantom({48, 48, 48}, 80, 4.0, 7), PorePolarity::dark);
  const std::string w = (dir / "g.w").string();
  o.check(run_cli("init-weights --role generator --latent-dim 8 --filters 2 --seed 3 --out " + w, dir / "init.log") == 0,
          "init-weights");
  const std::string common = "validate --real " + (dir / "real.raw").string() + " --weights " + w +
                             " --count 3 --size 20 --seed 42 --r-max 8 --out ";
  o.check(run_cli(common + (dir / "a").string(), dir / "a.log") == 0, "first validate run");
  o.check(run_cli(common + (dir / "b").string() + " --jobs 2", dir / "b.log") == 0, "second validate run");
  std::size_t files = 0, differing = 0;
  if (fs::exists(dir / "a"))
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      ++files;
      const auto other = dir / "b" / e.path().filename();
      if (!fs::exists(other) || read_text(e.path()) != read_text(other)) ++differing;
    }
  std::size_t files_b = 0;
  if (fs::exists(dir / "b"))
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "b")) ++files_b;
  o.check(files > 0 && files == files_b && differing == 0, "byte-identical outputs");
  o.note(std::to_string(files) + " files compared, " + std::to_string(differing) + " differ");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"convolution oracle", 10.0, convolution_oracle},
      {"generator size law", 60.0, size_law},
      {"S2 oracle", 60.0, s2_oracle},
      {"Minkowski oracles", 120.0, minkowski_oracles},
      {"Stokes analytic", 1200.0, stokes_analytic},
      {"KS closed form", 1.0, ks_closed_form},
      {"validate determinism", 1e9, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double t = seconds_since(t0);
    if (t > c.budget_s) o.check(false, "runtime " + fmt("%.1f s", t) + " over budget " + fmt("%.0f s", c.budget_s));
    std::printf("%s  %-22s %6.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.name, t, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
