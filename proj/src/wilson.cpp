#include "ehs/wilson.hpp"

#include <cmath>
#include <memory>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"
#include "ehs/parallel.hpp"
#include "ehs/spectral.hpp"

namespace ehs {

Matrix2c transport_rk4(const Connection1d& A, double s0, double s1, int steps) {
  const double h = (s1 - s0) / steps;
  Matrix2c U = Matrix2c::Identity();
  Matrix2c a0 = A(s0);
  for (int k = 0; k < steps; ++k) {
    const double s = s0 + k * h;
    const Matrix2c am = A(s + 0.5 * h);
    const Matrix2c a1 = A(s + h);
    const Matrix2c k1 = I * a0 * U;
    const Matrix2c k2 = I * am * (U + 0.5 * h * k1);
    const Matrix2c k3 = I * am * (U + 0.5 * h * k2);
    const Matrix2c k4 = I * a1 * (U + h * k3);
    U += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    a0 = a1;
  }
  return U;
}

HolonomyResult path_ordered_exponential(const Connection1d& A, double s0, double s1, int steps,
                                        const HolonomyOptions& opt) {
  int n = std::max(steps, 1);
  Matrix2c coarse = transport_rk4(A, s0, s1, n);
  for (;;) {
    const int m = 2 * n;
    if (m > opt.max_steps) throw Error(Errc::no_convergence, "holonomy did not converge under step halving");
    const Matrix2c fine = transport_rk4(A, s0, s1, m);
    const double diff = (fine - coarse).cwiseAbs().maxCoeff();
    n = m;
    coarse = fine;
    if (diff < opt.tol) break;
  }
  HolonomyResult r;
  r.u = coarse;
  r.w = coarse.trace();
  r.det_u = coarse.determinant();
  r.step_count = n;
  return r;
}

double observed_order(const Connection1d& A, double s0, double s1, int steps) {
  const Matrix2c u1 = transport_rk4(A, s0, s1, steps);
  const Matrix2c u2 = transport_rk4(A, s0, s1, 2 * steps);
  const Matrix2c u4 = transport_rk4(A, s0, s1, 4 * steps);
  return std::log2((u1 - u2).norm() / (u2 - u4).norm());
}

// ---- θ2 slice -------------------------------------------------------------

namespace {

cd slice_lower_energy(double R, double kappa) {
  Vector5d q;
  q << R, 0.0, 0.0, 0.0, 0.0;
  return lower_energy(q, kappa);
}

}  // namespace

double slice_norm2(double R, double kappa) {
  const cd e = slice_lower_energy(R, kappa);
  return 1.0 + std::norm(e + I * kappa) / (R * R);
}

BandFrame slice_frame(double R, double kappa, double theta2, double phi1) {
  const cd e = slice_lower_energy(R, kappa);
  const double c = std::cos(theta2), s = std::sin(theta2);
  const cd ph = std::exp(I * phi1);
  const double n = std::sqrt(slice_norm2(R, kappa));
  BandFrame f;
  f.right.col(0) << -(e + I * kappa) / R, -std::conj(ph) * c, 0.0, s;
  f.right.col(1) << 0.0, -s, -(e + I * kappa) / R, -ph * c;
  f.right /= n;
  // Hermitian partner: columns are orthonormal, so R^+ = R^†.
  f.left = f.right;
  return f;
}

Matrix2c connection_slice_closed_form(double theta2, double phi1, double N2) {
  const double c = std::cos(theta2), s = std::sin(theta2);
  const cd ph = std::exp(I * phi1);
  Matrix2c a;
  a << c * c, ph * c * s, std::conj(ph) * c * s, -c * c;
  return a / N2;
}

Matrix2c holonomy_closed_form(double theta2, double N2) {
  const double c2t = std::cos(2.0 * theta2);
  const double Q = std::max(0.0, N2 * N2 - 2.0 * N2 + 2.0 + 2.0 * c2t - 2.0 * N2 * c2t);
  const double rq = std::sqrt(Q);
  const double arg = pi * rq / N2;
  // sin(arg)/sqrt(Q), finite at Q = 0
  const double sq = rq > 1e-12 ? std::sin(arg) / rq : pi / N2;
  const double c = std::cos(theta2);
  const double diag = (2.0 * c * c - N2) * sq;
  Matrix2c u;
  u(0, 0) = -std::cos(arg) - I * diag;
  u(1, 1) = -std::cos(arg) + I * diag;
  u(0, 1) = u(1, 0) = -I * std::sin(2.0 * theta2) * sq;
  return u;
}

cd wilson_closed_form(double theta2, double N2) { return holonomy_closed_form(theta2, N2).trace(); }

// ---- Möbius loop ------------------------------------------------------------

namespace {

cd moebius_e2(double R, double delta, double kappa, double th) {
  const Vector5d q = moebius_q(R, delta, th);
  return cd(q.squaredNorm() - kappa * kappa, 2.0 * kappa * q(3));
}

// Continuous branch of the lower energy along θ1, tabulated once and used to
// pick the sign of √E² at arbitrary θ1.
class MoebiusBranch {
 public:
  MoebiusBranch(double R, double delta, double kappa, int cycles)
      : R_(R), delta_(delta), kappa_(kappa), span_(2.0 * pi * cycles) {
    const int n = 8192 * cycles;
    table_.resize(n + 1);
    cd cur = lower_energy(moebius_q(R, delta, 0.0), kappa);
    for (int k = 0; k <= n; ++k) {
      const double th = span_ * k / n;
      const cd r = std::sqrt(moebius_e2(R, delta, kappa, th));
      if (std::abs(r) < 5e-7) throw Error(Errc::ehs_crossing, "Möbius loop touches the exceptional hypersphere");
      cur = std::abs(r - cur) <= std::abs(-r - cur) ? r : -r;
      table_[k] = cur;
    }
  }

  cd operator()(double th) const {
    const int n = static_cast<int>(table_.size()) - 1;
    const int k = std::clamp(static_cast<int>(std::lround(th / span_ * n)), 0, n);
    const cd r = std::sqrt(moebius_e2(R_, delta_, kappa_, th));
    return std::abs(r - table_[k]) <= std::abs(-r - table_[k]) ? r : -r;
  }

 private:
  double R_, delta_, kappa_, span_;
  std::vector<cd> table_;
};

// Fixed generic reference pair; P X stays rank 2 along the loop unless
// det(X^† P X) vanishes, which is checked.
Frame4x2 moebius_reference() {
  Frame4x2 x;
  x << 1.0, 0.0,
       cd(0.3, 0.17), cd(0.21, -0.4),
       0.0, 1.0,
       cd(-0.12, 0.25), cd(0.3, 0.0);
  return x;
}

BandFrame moebius_frame(double R, double delta, double kappa, double th, cd eps) {
  const Matrix4c P = band_projector(build_moebius_hamiltonian(R, delta, th, kappa), eps);
  static const Frame4x2 X = moebius_reference();
  const Matrix2c g = X.adjoint() * P * X;
  if (std::abs(g.determinant()) < 1e-10)
    throw Error(Errc::singular_overlap, "reference pair degenerate against the band projector");
  BandFrame f;
  f.right = P * X;
  f.left = (g.inverse() * X.adjoint() * P).adjoint();
  return f;
}

}  // namespace

ConnectionKind default_connection_kind(LoopKind kind) {
  return kind == LoopKind::theta2_slice ? ConnectionKind::hermitian : ConnectionKind::biorthogonal;
}

Connection1d loop_connection(const LoopSpec& loop, ConnectionKind kind) {
  const double h = 1e-5;
  if (loop.kind == LoopKind::theta2_slice) {
    const double R = loop.R, kappa = loop.kappa, t2 = loop.theta2;
    if (2.0 * std::abs(slice_lower_energy(R, kappa)) < 1e-6)
      throw Error(Errc::ehs_crossing, "slice loop lies on the exceptional hypersphere");
    return [=](double s) -> Matrix2c {
      return -connection_1d([&](double p) { return slice_frame(R, kappa, t2, p); }, s, h, kind);
    };
  }
  auto branch = std::make_shared<MoebiusBranch>(loop.R, loop.delta, loop.kappa, loop.cycles);
  const double R = loop.R, delta = loop.delta, kappa = loop.kappa;
  return [=](double s) -> Matrix2c {
    return -connection_1d([&](double t) { return moebius_frame(R, delta, kappa, t, (*branch)(t)); }, s, h, kind);
  };
}

HolonomyResult holonomy(const LoopSpec& loop, const HolonomyOptions& opt) {
  if (loop.steps < 64) throw Error(Errc::invalid_argument, "loop needs at least 64 steps");
  const Connection1d A = loop_connection(loop, default_connection_kind(loop.kind));
  const double span = loop.kind == LoopKind::theta2_slice ? 2.0 * pi : 2.0 * pi * loop.cycles;
  return path_ordered_exponential(A, 0.0, span, loop.steps * (loop.kind == LoopKind::moebius ? loop.cycles : 1), opt);
}

std::vector<WilsonRow> wilson_scan(double R, double kappa, const std::vector<double>& grid, int threads) {
  if (std::abs(R - kappa) < 1e-9) throw Error(Errc::ehs_crossing, "R equals kappa");
  std::vector<WilsonRow> rows(grid.size());
  const double n2 = slice_norm2(R, kappa);
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    LoopSpec loop;
    loop.kind = LoopKind::theta2_slice;
    loop.R = R;
    loop.kappa = kappa;
    loop.theta2 = grid[i];
    const HolonomyResult h = holonomy(loop);
    rows[i] = WilsonRow{grid[i], h.w, wilson_closed_form(grid[i], n2), h.u};
  });
  return rows;
}

std::vector<MinWilsonRow> min_wilson_vs_radius(double kappa, const std::vector<double>& R_grid, int n_theta2,
                                               int threads) {
  std::vector<double> t2(n_theta2);
  for (int k = 0; k < n_theta2; ++k) t2[k] = pi * k / (n_theta2 - 1);
  std::vector<MinWilsonRow> out;
  out.reserve(R_grid.size());
  for (double R : R_grid) {
    const auto rows = wilson_scan(R, kappa, t2, threads);
    MinWilsonRow m{R, 1e300, 0.0};
    for (const auto& r : rows)
      if (r.w.real() < m.min_re_w) {
        m.min_re_w = r.w.real();
        m.theta2_at_min = r.theta2;
      }
    out.push_back(m);
  }
  return out;
}

cd moebius_wilson(double R, double delta, double kappa, int steps_per_cycle) {
  LoopSpec loop;
  loop.kind = LoopKind::moebius;
  loop.R = R;
  loop.delta = delta;
  loop.kappa = kappa;
  loop.cycles = 2;
  loop.steps = steps_per_cycle;
  HolonomyOptions opt;
  opt.tol = 1e-6;
  return holonomy(loop, opt).w;
}

double locate_moebius_transition(double R, double kappa, double lo, double hi, double tol) {
  const bool lo_neg = moebius_wilson(R, lo, kappa).real() < 0.0;
  const bool hi_neg = moebius_wilson(R, hi, kappa).real() < 0.0;
  if (lo_neg == hi_neg) throw Error(Errc::invalid_argument, "no sign change of W on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    bool neg;
    try {
      neg = moebius_wilson(R, mid, kappa).real() < 0.0;
    } catch (const Error& e) {
      // the loop passes through the exceptional ring exactly at the transition
      if (e.code() != Errc::ehs_crossing) throw;
      return mid;
    }
    (neg == lo_neg ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TransportSeries transport_expectations(double R, double kappa, double theta2, int initial_index, int samples) {
  if (!(R > kappa)) throw Error(Errc::invalid_argument, "transport needs R > kappa");
  if (initial_index != 0 && initial_index != 1) throw Error(Errc::invalid_argument, "initial index must be 0 or 1");
  LoopSpec loop;
  loop.kind = LoopKind::theta2_slice;
  loop.R = R;
  loop.kappa = kappa;
  loop.theta2 = theta2;
  const Connection1d A = loop_connection(loop, ConnectionKind::hermitian);
  Matrix2c sig[3];
  sig[0] << 0.0, 1.0, 1.0, 0.0;
  sig[1] << 0.0, -I, I, 0.0;
  sig[2] << 1.0, 0.0, 0.0, -1.0;
  TransportSeries out;
  Vector2c c = Vector2c::Zero();
  c(initial_index) = 1.0;
  const double dphi = 2.0 * pi / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    if (k > 0) c = transport_rk4(A, dphi * (k - 1), dphi * k, 16) * c;
    const double nn = c.squaredNorm();
    double v[3];
    for (int j = 0; j < 3; ++j) v[j] = (c.adjoint() * sig[j] * c)(0, 0).real() / nn;
    out.phi.push_back(dphi * k);
    out.sx.push_back(v[0]);
    out.sy.push_back(v[1]);
    out.sz.push_back(v[2]);
    out.s2.push_back(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  return out;
}

}  // namespace ehs
