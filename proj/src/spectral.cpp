#include "ehs/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"
#include "ehs/parallel.hpp"

namespace ehs {

bool lower_branch(cd d) {
  const cd d2 = d * d;
  if (d2.real() > 0.0) return d.real() < 0.0;
  return d.imag() < 0.0;
}

std::pair<cd, cd> eigenvalues_closed_form(double R, double kappa, double theta1) {
  const cd e2 = R * R - kappa * kappa + 2.0 * I * kappa * R * std::cos(theta1);
  const cd e = std::sqrt(e2);
  return {e, -e};
}

cd lower_energy(const Vector5d& q, double kappa) {
  const cd e = std::sqrt(cd(q.squaredNorm() - kappa * kappa, 2.0 * kappa * q(3)));
  return lower_branch(e) ? e : -e;
}

Matrix4c band_projector(const Matrix4c& H, cd eps) {
  return (H + eps * Matrix4c::Identity()) / (2.0 * eps);
}

Matrix4c lower_projector(const Vector5d& q, double kappa) {
  return band_projector(build_hamiltonian(q, kappa), lower_energy(q, kappa));
}

namespace {

struct Pairing {
  cd upper, lower;
  double spread;  // largest distance inside a pair
  std::array<int, 4> order;  // indices: (upper pair, lower pair)
};

Pairing group_pairs(const Eigen::Matrix<cd, 4, 1>& ev) {
  static const int cand[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
  int best = 0;
  double best_cost = 1e300;
  for (int c = 0; c < 3; ++c) {
    const double cost = std::abs(ev(cand[c][0]) - ev(cand[c][1])) + std::abs(ev(cand[c][2]) - ev(cand[c][3]));
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  const int* k = cand[best];
  const cd m1 = 0.5 * (ev(k[0]) + ev(k[1]));
  const cd m2 = 0.5 * (ev(k[2]) + ev(k[3]));
  Pairing p;
  p.spread = std::max(std::abs(ev(k[0]) - ev(k[1])), std::abs(ev(k[2]) - ev(k[3])));
  if (lower_branch(m1 - 0.5 * (m1 + m2))) {
    p.lower = m1;
    p.upper = m2;
    p.order = {k[2], k[3], k[0], k[1]};
  } else {
    p.lower = m2;
    p.upper = m1;
    p.order = {k[0], k[1], k[2], k[3]};
  }
  return p;
}

}  // namespace

// Orthonormal basis of the column space of a rank-2 projector, picked by pivoting
// so that axis-aligned subspaces come out as unit vectors without sign flips.
BandFrame frame_from_projector(const Matrix4c& P) {
  Matrix4c cols = P;
  Frame4x2 R;
  for (int k = 0; k < 2; ++k) {
    int j;
    cols.colwise().norm().maxCoeff(&j);
    Vector4c v = cols.col(j).normalized();
    R.col(k) = v;
    cols -= v * (v.adjoint() * cols);
  }
  BandFrame f;
  f.right = R;
  f.left = P.adjoint() * R;
  balance_frame(f);
  return f;
}

std::array<cd, 2> pair_energies(const Matrix4c& H) {
  Eigen::ComplexEigenSolver<Matrix4c> es(H, false);
  const Pairing p = group_pairs(es.eigenvalues());
  return {p.upper, p.lower};
}

void balance_frame(BandFrame& f) {
  const double nr = f.right.norm(), nl = f.left.norm();
  if (nr == 0.0 || nl == 0.0) return;
  const double s = std::sqrt(nl / nr);
  f.right *= s;
  f.left /= s;
}

Matrix2c polar_unitary(const Matrix2c& m, double tol) {
  Eigen::JacobiSVD<Matrix2c> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(1) < tol * std::max(1.0, s(0)))
    throw Error(Errc::singular_overlap, "frame overlap is rank deficient");
  return svd.matrixU() * svd.matrixV().adjoint();
}

void align_frame(BandFrame& f, const BandFrame& ref, double tol) {
  const Matrix2c w = polar_unitary(ref.left.adjoint() * f.right, tol);
  f.right = f.right * w.adjoint();
  f.left = f.left * w.adjoint();
}

EigenSystem eigensystem(const Matrix4c& H, double tol, const BandFrame* reference) {
  Eigen::ComplexEigenSolver<Matrix4c> es(H, false);
  const auto& ev = es.eigenvalues();
  const Pairing p = group_pairs(ev);
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double gap = std::abs(p.upper - p.lower);
  if (gap < tol * scale) throw Error(Errc::ep_too_close, "eigenvalue gap below tolerance");
  if (p.spread > 1e-6 * scale) throw Error(Errc::non_degenerate, "eigenvalues are not pairwise degenerate");

  const Matrix4c id = Matrix4c::Identity();
  EigenSystem sys;
  sys.e_plus = p.upper;
  sys.e_minus = p.lower;
  sys.minus = frame_from_projector((H - p.upper * id) / (p.lower - p.upper));
  sys.plus = frame_from_projector((H - p.lower * id) / (p.upper - p.lower));
  if (reference) align_frame(sys.minus, *reference);
  return sys;
}

ClosedFormVectors right_eigenvectors_closed_form(const ParameterPoint& p) {
  const Vector5d& q = p.q;
  const double kappa = p.kappa;
  const double rho = std::sqrt(q(0) * q(0) + q(1) * q(1) + q(2) * q(2) + q(4) * q(4));
  const double scale = std::max(1.0, q.norm() + kappa);
  if (rho < 1e-12 * scale) throw Error(Errc::degenerate_formula, "R sin(theta1) vanishes");
  const cd ep = std::sqrt(cd(q.squaredNorm() - kappa * kappa, 2.0 * kappa * q(3)));
  if (std::abs(ep) < 1e-12 * scale) throw Error(Errc::degenerate_formula, "point lies on the exceptional hypersphere");

  const cd u23(q(1), -q(2));  // q2 - i q3
  const cd u15(q(0), -q(4));  // q1 - i q5
  auto band = [&](cd e, cd& n) {
    const cd a = e - q(3) - I * kappa;
    const cd ab = std::conj(a);
    Frame4x2 r, l;
    r.col(0) << rho, a * u23 / rho, 0.0, -a * u15 / rho;
    r.col(1) << 0.0, a * std::conj(u15) / rho, rho, a * std::conj(u23) / rho;
    l.col(0) << rho, ab * u23 / rho, 0.0, -ab * u15 / rho;
    l.col(1) << 0.0, ab * std::conj(u15) / rho, rho, ab * std::conj(u23) / rho;
    n = std::sqrt(rho * rho + a * a);
    BandFrame f;
    f.right = r / n;
    f.left = l / std::conj(n);
    return f;
  };
  ClosedFormVectors out;
  out.e_plus = ep;
  out.e_minus = -ep;
  out.plus = band(ep, out.n_plus);
  out.minus = band(-ep, out.n_minus);
  return out;
}

EpReport detect_ep(const ParameterPoint& p, double tol) {
  const Matrix4c H = build_hamiltonian(p);
  Eigen::ComplexEigenSolver<Matrix4c> es(H, true);
  const Pairing pr = group_pairs(es.eigenvalues());
  Matrix4c V = es.eigenvectors();
  for (int k = 0; k < 4; ++k) V.col(k).normalize();
  Eigen::JacobiSVD<Matrix4c> svd(V);
  const auto& s = svd.singularValues();
  EpReport r;
  r.gap = std::abs(pr.upper - pr.lower);
  r.coalescence = s(3) / s(0);
  r.is_ep = r.gap <= tol && r.coalescence <= tol;
  return r;
}

BranchTrack track_branches(const std::vector<ParameterPoint>& loop) {
  if (loop.empty()) throw Error(Errc::invalid_argument, "empty loop");
  BranchTrack t;
  t.energies.reserve(loop.size());
  {
    const auto e = pair_energies(build_hamiltonian(loop.front()));
    t.energies.push_back({e[1], e[0]});
  }
  for (std::size_t k = 1; k < loop.size(); ++k) {
    const auto e = pair_energies(build_hamiltonian(loop[k]));
    const auto& prev = t.energies.back();
    const double keep = std::abs(e[1] - prev[0]) + std::abs(e[0] - prev[1]);
    const double swap = std::abs(e[0] - prev[0]) + std::abs(e[1] - prev[1]);
    std::array<cd, 2> next = keep <= swap ? std::array<cd, 2>{e[1], e[0]} : std::array<cd, 2>{e[0], e[1]};
    const double disp = std::max(std::abs(next[0] - prev[0]), std::abs(next[1] - prev[1]));
    const double gap = std::abs(e[0] - e[1]);
    if (disp > 0.5 * gap)
      throw Error(Errc::ambiguous_continuation, "step displacement exceeds half the local gap; refine the path");
    t.energies.push_back(next);
  }
  const auto& first = t.energies.front();
  const auto& last = t.energies.back();
  t.swapped = std::abs(last[0] - first[1]) < std::abs(last[0] - first[0]);
  return t;
}

std::vector<ParameterPoint> moebius_loop(double R, double delta, double kappa, int steps_per_cycle, int cycles) {
  const int n = steps_per_cycle * cycles;
  std::vector<ParameterPoint> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double th = 2.0 * pi * cycles * static_cast<double>(k) / n;
    out.push_back(ParameterPoint::cartesian(moebius_q(R, delta, th), kappa));
  }
  return out;
}

std::vector<SpectrumRow> spectrum_scan(const PlaneSpec& plane, double kappa, int threads) {
  const int d = static_cast<int>(plane.axes.size());
  if (d < 2 || d > 3) throw Error(Errc::invalid_argument, "plane must select 2 or 3 axes");
  for (int a : plane.axes)
    if (a != 0 && a != 1 && a != 2 && a != 4) throw Error(Errc::invalid_argument, "axes must be among q1,q2,q3,q5");
  if (plane.n < 2) throw Error(Errc::invalid_argument, "scan needs at least 2 points per axis");
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(plane.n);
  std::vector<SpectrumRow> rows(total);
  const double step = (plane.hi - plane.lo) / (plane.n - 1);
  parallel_for(total, threads, [&](std::size_t idx) {
    Vector5d q = plane.base;
    std::size_t rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      q(plane.axes[k]) = plane.lo + step * static_cast<double>(rem % plane.n);
      rem /= plane.n;
    }
    const auto e = pair_energies(build_hamiltonian(q, kappa));
    rows[idx] = SpectrumRow{q, e[0], e[1], std::abs(e[0] - e[1])};
  });
  return rows;
}

}  // namespace ehs
