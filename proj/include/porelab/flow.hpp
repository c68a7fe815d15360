#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "porelab/connectivity.hpp"
#include "porelab/error.hpp"
#include "porelab/volume.hpp"

namespace porelab {

inline constexpr double kDarcy = 9.869233e-13;  // m^2

enum class StokesMethod { minres, uzawa };

struct StokesOptions {
  StokesMethod method = StokesMethod::minres;
  double flux_tolerance = 1e-6;        ///< relative change of outlet flux between outer iterations
  double divergence_tolerance = 1e-8;  ///< max |div u| over cells
  double momentum_tolerance = 1e-8;    ///< max |b - A u - G p| over faces
  double balance_tolerance = 1e-7;     ///< |Q_in - Q_out| / |Q_out|
  int max_outer_iterations = 50000;
  double inner_tolerance = 1e-12;  ///< uzawa only
  int max_inner_iterations = 200000;
};

/// Staggered solution in solver units (mu = 1, dp = 1, h = 1). Face arrays for
/// direction a have extent n_a + 1 along a; face i along a separates cells
/// i - 1 and i.
struct VelocityField {
  Dims dims{};
  double voxel_size = kDefaultVoxelSize;
  Axis axis = Axis::x;
  double viscosity = 1.0;
  double pressure_drop = 1.0;
  std::array<std::vector<double>, 3> face;
  std::vector<double> pressure;   ///< cell centred; 0 outside the flowing region
  std::vector<std::uint8_t> region;
  double inlet_flux = 0.0;
  double outlet_flux = 0.0;
  double max_divergence = 0.0;
  int outer_iterations = 0;

  Dims face_dims(int a) const {
    Dims f = dims;
    if (a == 0) ++f.nx;
    if (a == 1) ++f.ny;
    if (a == 2) ++f.nz;
    return f;
  }
  double face_velocity(int a, std::int64_t x, std::int64_t y, std::int64_t z) const {
    return face[static_cast<std::size_t>(a)][static_cast<std::size_t>(linear_index(face_dims(a), x, y, z))];
  }

  /// Velocity at the center of cell (x, y, z) from opposing face averages.
  std::array<double, 3> cell_velocity(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return {0.5 * (face_velocity(0, x, y, z) + face_velocity(0, x + 1, y, z)),
            0.5 * (face_velocity(1, x, y, z) + face_velocity(1, x, y + 1, z)),
            0.5 * (face_velocity(2, x, y, z) + face_velocity(2, x, y, z + 1))};
  }

  /// Net outflow of cell (x, y, z).
  double divergence(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return face_velocity(0, x + 1, y, z) - face_velocity(0, x, y, z) + face_velocity(1, x, y + 1, z) -
           face_velocity(1, x, y, z) + face_velocity(2, x, y, z + 1) - face_velocity(2, x, y, z);
  }
};

struct FlowResult {
  Axis axis = Axis::x;
  double permeability_voxel = 0.0;  ///< voxel^2
  double permeability_m2 = 0.0;
  double permeability_darcy = 0.0;
  double effective_porosity = 0.0;
  double porosity = 0.0;
  double mean_speed = 0.0;  ///< over flowing cells, solver units
  double inlet_flux = 0.0;
  double outlet_flux = 0.0;
  int iterations = 0;
};

namespace detail {

/// Momentum operator restricted to active faces, with boundary pressures
/// folded into the right-hand side. Rows are scaled to control-volume size so
/// that the operator is symmetric.
class StokesSystem {
 public:
  StokesSystem(const std::vector<std::uint8_t>& region, const Dims& d, int flow_axis)
      : d_(d), axis_(flow_axis), region_(region) {
    cell_id_.assign(region.size(), -1);
    for (std::size_t i = 0; i < region.size(); ++i)
      if (region[i]) {
        cell_id_[i] = static_cast<std::int32_t>(cells_.size());
        cells_.push_back(static_cast<std::int64_t>(i));
      }
    for (int a = 0; a < 3; ++a) enumerate_faces(a);
    couple_faces();
  }

  std::size_t faces() const { return left_.size(); }
  std::size_t cells() const { return cells_.size(); }
  const std::vector<double>& rhs() const { return b_; }
  const std::vector<double>& diagonal() const { return diag_; }

  void apply_a(const std::vector<double>& v, std::vector<double>& out) const {
    const auto n = static_cast<std::int64_t>(faces());
#pragma omp parallel for schedule(static)
    for (std::int64_t f = 0; f < n; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      double s = diag_[fi] * v[fi];
      const std::int32_t* nb = &nb_[6 * fi];
      if (nb[0] >= 0) s -= v[static_cast<std::size_t>(nb[0])];
      if (nb[1] >= 0) s -= v[static_cast<std::size_t>(nb[1])];
      const double tw = tw_[fi];
      for (int k = 2; k < 6; ++k)
        if (nb[k] >= 0) s -= tw * v[static_cast<std::size_t>(nb[k])];
      out[fi] = s;
    }
  }

  /// (G p)_f = p_right - p_left over interior cells.
  void apply_g(const std::vector<double>& p, std::vector<double>& out) const {
    for (std::size_t f = 0; f < faces(); ++f) {
      double s = 0.0;
      if (right_[f] >= 0) s += p[static_cast<std::size_t>(right_[f])];
      if (left_[f] >= 0) s -= p[static_cast<std::size_t>(left_[f])];
      out[f] = s;
    }
  }

  /// G^T u, which is minus the discrete divergence.
  void apply_gt(const std::vector<double>& u, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t f = 0; f < faces(); ++f) {
      if (right_[f] >= 0) out[static_cast<std::size_t>(right_[f])] += u[f];
      if (left_[f] >= 0) out[static_cast<std::size_t>(left_[f])] -= u[f];
    }
  }

  /// Jacobi-preconditioned CG from a zero initial guess.
  void solve_a(const std::vector<double>& rhs, std::vector<double>& x, double rtol, int max_iter) const {
    const std::size_t n = faces();
    x.assign(n, 0.0);
    std::vector<double> r = rhs, z(n), p(n), q(n);
    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) return;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
      apply_a(p, q);
      const double alpha = rz / dot(p, q);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      if (std::sqrt(dot(r, r)) <= rtol * bnorm) return;
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw ConvergenceError("momentum solve did not reach relative residual " + std::to_string(rtol) + " in " +
                           std::to_string(max_iter) + " iterations");
  }

  double flux(const std::vector<double>& u, bool outlet) const {
    double q = 0.0;
    for (std::size_t f = 0; f < faces(); ++f)
      if (dir_[f] == axis_ && (outlet ? right_[f] < 0 : left_[f] < 0)) q += u[f];
    return q;
  }

  /// Throws when some connected set of faces has no wall contact, so the
  /// momentum operator is singular there and the flow is unbounded.
  void check_anchored() const {
    std::vector<std::uint8_t> seen(faces(), 0);
    std::vector<std::int32_t> stack;
    for (std::size_t s = 0; s < faces(); ++s) {
      if (seen[s]) continue;
      bool anchored = false;
      seen[s] = 1;
      stack.assign(1, static_cast<std::int32_t>(s));
      while (!stack.empty()) {
        const auto f = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        double off = 0.0;
        for (int k = 0; k < 6; ++k) {
          const std::int32_t g = nb_[6 * f + static_cast<std::size_t>(k)];
          if (g < 0) continue;
          off += k < 2 ? 1.0 : tw_[f];
          if (!seen[static_cast<std::size_t>(g)]) {
            seen[static_cast<std::size_t>(g)] = 1;
            stack.push_back(g);
          }
        }
        if (diag_[f] > off + 1e-12) anchored = true;
      }
      if (!anchored)
        throw DegenerateError("pore channel spans the domain without touching grain: flow is unbounded");
    }
  }

  /// Copies the active-face solution into full face arrays.
  void scatter(const std::vector<double>& u, VelocityField& field) const {
    for (int a = 0; a < 3; ++a)
      field.face[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(field.face_dims(a).voxels()), 0.0);
    for (std::size_t f = 0; f < faces(); ++f) field.face[static_cast<std::size_t>(dir_[f])][static_cast<std::size_t>(pos_[f])] = u[f];
  }

  void scatter_pressure(const std::vector<double>& p, VelocityField& field) const {
    field.pressure.assign(region_.size(), 0.0);
    for (std::size_t c = 0; c < cells(); ++c) field.pressure[static_cast<std::size_t>(cells_[c])] = p[c];
  }

  /// Linear profile from p_in = 1 at the inlet plane to 0 at the outlet plane.
  std::vector<double> linear_pressure() const {
    std::vector<double> p(cells());
    const double n = static_cast<double>(d_[axis_]);
    for (std::size_t c = 0; c < cells(); ++c) {
      const std::int64_t i = cells_[c];
      const std::int64_t t = axis_ == 0 ? i % d_.nx : axis_ == 1 ? (i / d_.nx) % d_.ny : i / (d_.nx * d_.ny);
      p[c] = 1.0 - (static_cast<double>(t) + 0.5) / n;
    }
    return p;
  }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

 private:
  Dims face_dims(int a) const {
    Dims f = d_;
    if (a == 0) ++f.nx;
    if (a == 1) ++f.ny;
    if (a == 2) ++f.nz;
    return f;
  }

  std::int32_t cell_at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    if (x < 0 || y < 0 || z < 0 || x >= d_.nx || y >= d_.ny || z >= d_.nz) return -1;
    return cell_id_[static_cast<std::size_t>(linear_index(d_, x, y, z))];
  }

  void enumerate_faces(int a) {
    const Dims fd = face_dims(a);
    auto& ids = face_id_[static_cast<std::size_t>(a)];
    ids.assign(static_cast<std::size_t>(fd.voxels()), -1);
    for (std::int64_t z = 0; z < fd.nz; ++z)
      for (std::int64_t y = 0; y < fd.ny; ++y)
        for (std::int64_t x = 0; x < fd.nx; ++x) {
          std::array<std::int64_t, 3> c{x, y, z};
          const std::int64_t i = c[static_cast<std::size_t>(a)];
          const std::int32_t right = cell_at(x, y, z);
          c[static_cast<std::size_t>(a)] = i - 1;
          const std::int32_t left = cell_at(c[0], c[1], c[2]);
          const bool boundary = i == 0 || i == d_[a];
          bool active;
          if (!boundary)
            active = left >= 0 && right >= 0;
          else
            active = a == axis_ && (left >= 0 || right >= 0);
          if (!active) continue;
          const std::int64_t pos = linear_index(fd, x, y, z);
          ids[static_cast<std::size_t>(pos)] = static_cast<std::int32_t>(left_.size());
          left_.push_back(left);
          right_.push_back(right);
          dir_.push_back(a);
          pos_.push_back(pos);
          tw_.push_back(boundary ? 0.5 : 1.0);
          b_.push_back(boundary ? (i == 0 ? 1.0 : 0.0) : 0.0);
        }
  }

  void couple_faces() {
    const std::size_t n = faces();
    nb_.assign(6 * n, -1);
    diag_.assign(n, 0.0);
    for (std::size_t f = 0; f < n; ++f) {
      const int a = dir_[f];
      const Dims fd = face_dims(a);
      const auto& ids = face_id_[static_cast<std::size_t>(a)];
      const std::int64_t pos = pos_[f];
      const std::array<std::int64_t, 3> c{pos % fd.nx, (pos / fd.nx) % fd.ny, pos / (fd.nx * fd.ny)};
      int slot = 0;
      // normal neighbours: Dirichlet zero when inactive, nothing past the domain
      for (int s : {-1, 1}) {
        auto q = c;
        q[static_cast<std::size_t>(a)] += s;
        const std::size_t k = static_cast<std::size_t>(slot++);
        if (q[static_cast<std::size_t>(a)] < 0 || q[static_cast<std::size_t>(a)] > d_[a]) continue;
        const std::int32_t g = ids[static_cast<std::size_t>(linear_index(fd, q[0], q[1], q[2]))];
        diag_[f] += 1.0;
        nb_[6 * f + k] = g;
      }
      // tangential neighbours: mirrored ghost when inactive, free slip past the domain
      for (int b = 0; b < 3; ++b) {
        if (b == a) continue;
        for (int s : {-1, 1}) {
          auto q = c;
          q[static_cast<std::size_t>(b)] += s;
          const std::size_t k = static_cast<std::size_t>(slot++);
          if (q[static_cast<std::size_t>(b)] < 0 || q[static_cast<std::size_t>(b)] >= d_[b]) continue;
          const std::int32_t g = ids[static_cast<std::size_t>(linear_index(fd, q[0], q[1], q[2]))];
          if (g >= 0) {
            diag_[f] += tw_[f];
            nb_[6 * f + k] = g;
          } else {
            diag_[f] += 2.0 * tw_[f];
          }
        }
      }
    }
  }

  Dims d_;
  int axis_;
  const std::vector<std::uint8_t>& region_;
  std::vector<std::int32_t> cell_id_;
  std::vector<std::int64_t> cells_;
  std::array<std::vector<std::int32_t>, 3> face_id_;
  std::vector<std::int32_t> left_, right_;
  std::vector<int> dir_;
  std::vector<std::int64_t> pos_;
  std::vector<double> tw_, b_, diag_;
  std::vector<std::int32_t> nb_;
};

}  // namespace detail

namespace detail {

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Tracks the stopping rule: divergence, momentum residual, inlet/outlet
/// balance and the relative flux change since the previous check.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(const StokesSystem& sys, const StokesOptions& opt) : sys_(sys), opt_(opt) {}

  bool converged(const std::vector<double>& u, const std::vector<double>& p, bool first) {
    std::vector<double> r(sys_.cells()), au(sys_.faces()), gp(sys_.faces());
    sys_.apply_gt(u, r);
    div_ = max_abs(r);
    sys_.apply_a(u, au);
    sys_.apply_g(p, gp);
    mom_ = 0.0;
    for (std::size_t f = 0; f < sys_.faces(); ++f) mom_ = std::max(mom_, std::abs(sys_.rhs()[f] - au[f] - gp[f]));
    const double q_out = sys_.flux(u, true), q_in = sys_.flux(u, false);
    const double scale = std::max(std::abs(q_out), std::numeric_limits<double>::min());
    change_ = first ? std::numeric_limits<double>::infinity() : std::abs(q_out - q_prev_) / scale;
    q_prev_ = q_out;
    const bool balanced = std::abs(q_in - q_out) <= opt_.balance_tolerance * scale;
    return div_ < opt_.divergence_tolerance && mom_ < opt_.momentum_tolerance && balanced &&
           change_ < opt_.flux_tolerance;
  }

  [[noreturn]] void fail(int iterations) const {
    throw ConvergenceError("Stokes solve did not converge in " + std::to_string(iterations) +
                           " outer iterations: max divergence " + std::to_string(div_) + ", momentum residual " +
                           std::to_string(mom_) + ", flux change " + std::to_string(change_));
  }

  double divergence() const { return div_; }

 private:
  const StokesSystem& sys_;
  const StokesOptions& opt_;
  double q_prev_ = 0.0, div_ = 0.0, mom_ = 0.0, change_ = 0.0;
};

/// Conjugate gradients on the pressure Schur complement G^T A^-1 G; every
/// outer step solves the momentum equations to `inner_tolerance`.
inline int uzawa_cg(const StokesSystem& sys, const StokesOptions& opt, std::vector<double>& u,
                    std::vector<double>& p) {
  const std::size_t nf = sys.faces(), nc = sys.cells();
  std::vector<double> tmp(nf), r(nc), d(nc), w, q(nc);
  sys.apply_g(p, tmp);
  for (std::size_t f = 0; f < nf; ++f) tmp[f] = sys.rhs()[f] - tmp[f];
  sys.solve_a(tmp, u, opt.inner_tolerance, opt.max_inner_iterations);
  sys.apply_gt(u, r);
  d = r;
  double rr = StokesSystem::dot(r, r);
  ConvergenceMonitor mon(sys, opt);
  mon.converged(u, p, true);
  for (int it = 1;; ++it) {
    if (it > opt.max_outer_iterations) mon.fail(opt.max_outer_iterations);
    sys.apply_g(d, tmp);
    sys.solve_a(tmp, w, opt.inner_tolerance, opt.max_inner_iterations);
    sys.apply_gt(w, q);
    const double dq = StokesSystem::dot(d, q);
    if (dq > 0.0) {
      const double alpha = rr / dq;
      for (std::size_t c = 0; c < nc; ++c) p[c] += alpha * d[c];
      for (std::size_t f = 0; f < nf; ++f) u[f] -= alpha * w[f];
    }
    if (mon.converged(u, p, false)) return it;
    sys.apply_gt(u, r);
    const double rr_new = StokesSystem::dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t c = 0; c < nc; ++c) d[c] = r[c] + beta * d[c];
  }
}

/// MINRES on the coupled system [A G; G^T 0] [u; p] = [b; 0], preconditioned
/// by diag(A) on velocities and the identity on pressures.
inline int coupled_minres(const StokesSystem& sys, const StokesOptions& opt, std::vector<double>& u,
                          std::vector<double>& p) {
  const std::size_t nf = sys.faces(), nc = sys.cells();
  const std::vector<double>& diag = sys.diagonal();
  struct Pair {
    std::vector<double> u, p;
  };
  auto make = [&] { return Pair{std::vector<double>(nf, 0.0), std::vector<double>(nc, 0.0)}; };
  auto dot = [](const Pair& a, const Pair& b) { return StokesSystem::dot(a.u, b.u) + StokesSystem::dot(a.p, b.p); };
  std::vector<double> scratch(nf);
  auto apply_k = [&](const Pair& x, Pair& y) {
    sys.apply_a(x.u, y.u);
    sys.apply_g(x.p, scratch);
    for (std::size_t f = 0; f < nf; ++f) y.u[f] += scratch[f];
    sys.apply_gt(x.u, y.p);
  };
  auto precondition = [&](const Pair& v, Pair& z) {
    for (std::size_t f = 0; f < nf; ++f) z.u[f] = v.u[f] / diag[f];
    z.p = v.p;
  };

  u.assign(nf, 0.0);
  Pair x{u, p}, v = make(), v_old = make(), z = make(), kz = make(), w = make(), w_old = make();
  apply_k(x, kz);
  for (std::size_t f = 0; f < nf; ++f) v.u[f] = sys.rhs()[f] - kz.u[f];
  for (std::size_t c = 0; c < nc; ++c) v.p[c] = -kz.p[c];
  precondition(v, z);
  double gamma = std::sqrt(dot(z, v)), gamma_old = 1.0, eta = gamma;
  double c = 1.0, c_old = 1.0, s = 0.0, s_old = 0.0;

  ConvergenceMonitor mon(sys, opt);
  mon.converged(x.u, x.p, true);
  constexpr int kCheckInterval = 10;
  for (int it = 1;; ++it) {
    if (it > opt.max_outer_iterations) mon.fail(opt.max_outer_iterations);
    if (gamma > 0.0) {
      for (auto& t : z.u) t /= gamma;
      for (auto& t : z.p) t /= gamma;
      apply_k(z, kz);
      const double delta = dot(kz, z);
      for (std::size_t f = 0; f < nf; ++f) v_old.u[f] = kz.u[f] - (delta / gamma) * v.u[f] - (gamma / gamma_old) * v_old.u[f];
      for (std::size_t k = 0; k < nc; ++k) v_old.p[k] = kz.p[k] - (delta / gamma) * v.p[k] - (gamma / gamma_old) * v_old.p[k];
      std::swap(v, v_old);  // v is the new Lanczos vector, v_old the previous one
      const double a0 = c * delta - c_old * s * gamma;
      const double a2 = s * delta + c_old * c * gamma;
      const double a3 = s_old * gamma;
      Pair& zn = kz;  // reuse storage for the next preconditioned vector
      precondition(v, zn);
      const double gamma_new = std::sqrt(std::max(0.0, dot(zn, v)));
      const double a1 = std::hypot(a0, gamma_new);
      const double c_new = a0 / a1, s_new = gamma_new / a1;
      for (std::size_t f = 0; f < nf; ++f) {
        const double wn = (z.u[f] - a3 * w_old.u[f] - a2 * w.u[f]) / a1;
        w_old.u[f] = w.u[f];
        w.u[f] = wn;
        x.u[f] += c_new * eta * wn;
      }
      for (std::size_t k = 0; k < nc; ++k) {
        const double wn = (z.p[k] - a3 * w_old.p[k] - a2 * w.p[k]) / a1;
        w_old.p[k] = w.p[k];
        w.p[k] = wn;
        x.p[k] += c_new * eta * wn;
      }
      eta = -s_new * eta;
      std::swap(z, zn);
      gamma_old = gamma;
      gamma = gamma_new;
      c_old = c;
      c = c_new;
      s_old = s;
      s = s_new;
    }
    if (it % kCheckInterval == 0 || gamma == 0.0) {
      if (mon.converged(x.u, x.p, false)) {
        u = std::move(x.u);
        p = std::move(x.p);
        return it;
      }
      if (gamma == 0.0) mon.fail(it);
    }
  }
}

}  // namespace detail

/// Steady Stokes flow driven by p = 1 at the inlet face and p = 0 at the
/// outlet face, solved on the pore cells connected to both. Lateral domain
/// boundaries are impermeable and pore/grain faces are no-slip.
inline VelocityField stokes_solve(const BinaryImage3D& bin, Axis axis, const StokesOptions& opt = {}) {
  const BinaryImage3D connected = connected_pore(bin, axis);
  if (pore_count(connected) == 0)
    throw NoFlowError(std::string("no pore path connects the two faces normal to ") + axis_name(axis));

  VelocityField field;
  field.dims = bin.dims();
  field.voxel_size = bin.voxel_size();
  field.axis = axis;
  field.region = connected.values();

  const detail::StokesSystem sys(field.region, field.dims, index_of(axis));
  sys.check_anchored();

  std::vector<double> u, p = sys.linear_pressure();
  field.outer_iterations =
      opt.method == StokesMethod::minres ? detail::coupled_minres(sys, opt, u, p) : detail::uzawa_cg(sys, opt, u, p);

  std::vector<double> r(sys.cells());
  sys.apply_gt(u, r);
  sys.scatter(u, field);
  sys.scatter_pressure(p, field);
  field.inlet_flux = sys.flux(u, false);
  field.outlet_flux = sys.flux(u, true);
  field.max_divergence = detail::max_abs(r);
  return field;
}

/// |connected_pore(bin, axis)| / |domain|
inline double effective_porosity(const BinaryImage3D& bin, Axis axis) {
  return static_cast<double>(pore_count(connected_pore(bin, axis))) / static_cast<double>(bin.size());
}

inline double mean_cell_speed(const VelocityField& field) {
  const Dims& d = field.dims;
  double sum = 0.0;
  std::int64_t n = 0;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!field.region[static_cast<std::size_t>(linear_index(d, x, y, z))]) continue;
        const auto v = field.cell_velocity(x, y, z);
        sum += std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        ++n;
      }
  return n ? sum / static_cast<double>(n) : 0.0;
}

/// k = Q mu L / (A dp), with A the full cross-section; scaled by h^2.
inline FlowResult permeability(const VelocityField& field, Axis axis) {
  if (axis != field.axis) throw ValidationError("field was solved along a different axis");
  const int a = index_of(axis);
  const Dims& d = field.dims;
  const double length = static_cast<double>(d[a]);
  const double area = static_cast<double>(d.voxels()) / length;
  FlowResult r;
  r.axis = axis;
  r.inlet_flux = field.inlet_flux;
  r.outlet_flux = field.outlet_flux;
  r.iterations = field.outer_iterations;
  r.permeability_voxel = std::max(0.0, field.outlet_flux * field.viscosity * length / (area * field.pressure_drop));
  r.permeability_m2 = r.permeability_voxel * field.voxel_size * field.voxel_size;
  r.permeability_darcy = r.permeability_m2 / kDarcy;
  std::int64_t flowing = 0;
  for (auto v : field.region) flowing += v;
  r.effective_porosity = static_cast<double>(flowing) / static_cast<double>(d.voxels());
  r.porosity = r.effective_porosity;
  r.mean_speed = mean_cell_speed(field);
  return r;
}

/// Solve plus permeability, with the total porosity of `bin` filled in.
inline FlowResult flow(const BinaryImage3D& bin, Axis axis, const StokesOptions& opt = {}) {
  const VelocityField field = stokes_solve(bin, axis, opt);
  FlowResult r = permeability(field, axis);
  r.porosity = static_cast<double>(pore_count(bin)) / static_cast<double>(bin.size());
  return r;
}

}  // namespace porelab
