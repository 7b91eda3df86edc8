#include "ehs/cqed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include "ehs/error.hpp"
#include "ehs/parallel.hpp"

namespace ehs {

std::vector<double> fit_times(double gap, int n, double& delta) {
  if (!(gap > 0.0) || !std::isfinite(gap)) throw Error(Errc::invalid_argument, "fit_times needs a positive gap");
  if (n < 2) throw Error(Errc::invalid_argument, "fit_times needs at least two samples");
  const double period = 2.0 * pi / gap;
  const double lo = 0.05 * period, hi = 3.0 * period;
  std::vector<double> t(n);
  for (int j = 0; j < n; ++j) t[j] = lo * std::pow(hi / lo, static_cast<double>(j) / (n - 1));
  delta = period / 8.0;
  return t;
}

namespace {

Matrix4c orthogonal_projector(const Frame4x2& a) {
  return a * (a.adjoint() * a).inverse() * a.adjoint();
}

}  // namespace

double subspace_fidelity(const Frame4x2& a, const Frame4x2& b) {
  return (orthogonal_projector(a) * orthogonal_projector(b)).trace().real() / 2.0;
}

FitResult fit_eigenstates(const std::vector<TrajectorySample>& samples, double delta) {
  if (!(delta > 0.0)) throw Error(Errc::invalid_argument, "pencil step must be positive");
  // (trajectory, t) -> sample; t is matched to t + delta with a relative tolerance
  std::map<int, std::vector<const TrajectorySample*>> by_traj;
  for (const auto& s : samples) by_traj[s.trajectory].push_back(&s);
  const double ttol = 1e-9 * std::max(1.0, delta);

  std::vector<std::pair<Vector4c, Vector4c>> pairs;
  Eigen::MatrixXcd span(4, 0);
  for (auto& [id, list] : by_traj) {
    std::sort(list.begin(), list.end(), [](auto* x, auto* y) { return x->t < y->t; });
    for (std::size_t k = 1; k < list.size(); ++k)
      if (std::abs(list[k]->t - list[k - 1]->t) < ttol)
        throw Error(Errc::ill_conditioned, "duplicate time stamps in trajectory " + std::to_string(id));
    for (const auto* s : list) {
      span.conservativeResize(Eigen::NoChange, span.cols() + 1);
      span.col(span.cols() - 1) = s->state;
      const double target = s->t + delta;
      auto it = std::lower_bound(list.begin(), list.end(), target - ttol,
                                 [](const TrajectorySample* x, double v) { return x->t < v; });
      if (it != list.end() && std::abs((*it)->t - target) < ttol)
        pairs.emplace_back(s->state.normalized(), (*it)->state.normalized());
    }
  }
  if (span.cols() < 4 || pairs.size() < 6) throw Error(Errc::ill_conditioned, "too few sample pairs for the pencil");
  {
    const Eigen::SelfAdjointEigenSolver<Matrix4c> gram(span * span.adjoint(), Eigen::EigenvaluesOnly);
    const auto& ev = gram.eigenvalues();  // squared singular values, ascending
    if (!(ev(0) > 1e-16 * ev(3))) throw Error(Errc::ill_conditioned, "samples span fewer than four dimensions");
  }

  // Each pair demands (I - ψ'ψ'^†) M ψ = 0, linear in vec(M) (column major).
  Eigen::MatrixXcd A(4 * pairs.size(), 16);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Vector4c& u = pairs[k].first;
    const Vector4c& v = pairs[k].second;
    const Matrix4c perp = Matrix4c::Identity() - v * v.adjoint();
    for (int c = 0; c < 4; ++c) A.block(4 * k, 4 * c, 4, 4) = u(c) * perp;
  }
  // Rank-revealing QR: the last diagonal entry of R measures the residual and the
  // next one the separation from a second null direction.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
  const Eigen::MatrixXcd Rf = qr.matrixR().topRows(16).triangularView<Eigen::Upper>();
  const double r0 = std::abs(Rf(0, 0)), r14 = std::abs(Rf(14, 14)), r15 = std::abs(Rf(15, 15));
  FitResult r;
  r.pairs = static_cast<int>(pairs.size());
  r.residual = r15 / r0;
  r.condition = r15 / r14;
  if (r14 < 1e-9 * r0) throw Error(Errc::ill_conditioned, "pencil null space is not one dimensional");
  Eigen::VectorXcd y(16);
  y(15) = 1.0;
  y.head(15) = Rf.topLeftCorner(15, 15).triangularView<Eigen::Upper>().solve(-Rf.col(15).head(15));
  const Eigen::VectorXcd m = qr.colsPermutation() * y.normalized();
  const Matrix4c M = Eigen::Map<const Matrix4c>(m.data());

  const auto mu = pair_energies(M);  // pair means of the eigenvalues of M, labels irrelevant here
  cd mu_a = mu[0], mu_b = mu[1];
  // E = i log μ / δ up to the unknown normalisation of M, which only moves the shift.
  const cd ea = I * std::log(mu_a) / delta;
  const cd eb = I * std::log(mu_b) / delta;
  const cd ratio = mu_b / mu_a;
  cd half = 0.5 * I * std::log(ratio) / delta;  // (E_b - E_a) / 2
  if (std::abs(half.real() * delta) > 0.9 * pi)
    throw Error(Errc::ambiguous_log, "eigenvalue phases wrap within one pencil step");
  Matrix4c Pb = (M - mu_a * Matrix4c::Identity()) / (mu_b - mu_a);
  if (!lower_branch(half)) {
    std::swap(mu_a, mu_b);
    half = -half;
    Pb = Matrix4c::Identity() - Pb;
  }
  r.shift = 0.5 * (ea + eb);
  r.energies = {-half, half};
  r.lower = frame_from_projector(Pb);
  r.upper = frame_from_projector(Matrix4c::Identity() - Pb);
  r.generator = half * (2.0 * Pb - Matrix4c::Identity());
  return r;
}

namespace {

// Dissipative part of the generator of the postselected dynamics on S, i.e. the S
// block of the no-jump Hamiltonian minus H_eff. It does not depend on the drives.
// Every jump of the effective model lands in |gg0>, which is frozen, so the
// postselected Lindblad state and the normalised no-jump state coincide.
Matrix4c loss_block(const CqedConfig& cfg) {
  const CqedSpace sp{cfg.fock_cutoff};
  const MatrixXc S = sp.s_basis();
  return S.adjoint() * nh_hamiltonian(cfg, cfg.dissipator) * S - effective_hamiltonian(cfg.effective());
}

// exp(-iGt); when (G - cI)² = E² I this is the two-term Clifford formula.
struct Propagator {
  Matrix4c G, g;
  cd c, E;
  bool clifford = false;

  explicit Propagator(const Matrix4c& gen) : G(gen) {
    c = G.trace() / 4.0;
    g = G - c * Matrix4c::Identity();
    const Matrix4c g2 = g * g;
    E = std::sqrt(g2.trace() / 4.0);
    clifford = (g2 - E * E * Matrix4c::Identity()).norm() <= 1e-12 * std::max(1e-300, g2.norm()) &&
               std::abs(E) > 1e-12 * std::max(1e-300, g.norm());
  }
  Matrix4c operator()(double t) const {
    if (!clifford) return static_cast<Matrix4c>(-I * t * G).exp();
    return std::exp(-I * c * t) * (std::cos(E * t) * Matrix4c::Identity() - I * (std::sin(E * t) / E) * g);
  }
};

std::array<Vector4c, 3> initial_states() {
  // |fg0>, |gf0> and a state mixing their spans; two trajectories alone leave
  // the relative scale of the pencil on the two spans undetermined.
  Vector4c a = Vector4c::Zero(), b = Vector4c::Zero(), c;
  a(0) = 1.0;
  b(2) = 1.0;
  c << 0.5, 0.5, 0.5 * I, -0.5;
  return {a, b, c};
}

PointFit point_fit(const Matrix4c& loss, double kappa_eff, double R, const Angles& ang, int samples) {
  const EffectiveParams p = params_from_spherical(R, ang);
  const Propagator U(effective_hamiltonian(p) + loss);

  // design estimate of the gap from the target parameters
  const Vector5d q = effective_q(p);
  const double gap = 2.0 * std::abs(std::sqrt(cd(q.squaredNorm() - kappa_eff * kappa_eff, 2.0 * kappa_eff * q(3))));
  double delta = 0.0;
  const std::vector<double> times = fit_times(gap, samples, delta);

  std::vector<TrajectorySample> data;
  const auto init = initial_states();
  for (int k = 0; k < 3; ++k)
    for (double t0 : times)
      for (double t : {t0, t0 + delta}) {
        const Vector4c psi = U(t) * init[k];
        const double n2 = psi.squaredNorm();
        if (!(n2 > 0.0)) throw Error(Errc::empty_support, "no-jump state vanished");
        TrajectorySample s;
        s.t = t;
        s.trajectory = k;
        s.state = psi / std::sqrt(n2);
        s.discarded = 1.0 - n2;
        data.push_back(s);
      }

  PointFit out;
  out.fit = fit_eigenstates(data, delta);
  out.projector = out.fit.lower.projector();
  const BandFrame ref = frame_from_projector(lower_projector(q, kappa_eff));
  out.fidelity = subspace_fidelity(out.fit.lower.right, ref.right);
  return out;
}

}  // namespace

PointFit protocol_point(const CqedConfig& base, double kappa_eff, double R, const Angles& a, int samples) {
  return point_fit(loss_block(base), kappa_eff, R, a, samples);
}

ProtocolResult protocol_chern(const CqedConfig& base, double R_over_kappa, const ProtocolOptions& opt) {
  ProtocolResult res;
  const MappingReport rep = validate_mapping(base);
  res.kappa_eff = rep.kappa_eff;
  if (!(res.kappa_eff > 0.0)) throw Error(Errc::invalid_argument, "protocol needs kappa > 0");
  const double R = R_over_kappa * res.kappa_eff;
  if (std::abs(R_over_kappa - 1.0) < 1e-3) throw Error(Errc::transition_point, "R is within 1e-3 of kappa_eff");

  const Matrix4c loss = loss_block(base);
  ProjectorField field = [&](const Angles& a) {
    return point_fit(loss, res.kappa_eff, R, a, opt.samples).projector;
  };
  ChernOptions copt;
  copt.threads = opt.threads;
  res.chern = integrate_chern(field, opt.grid, copt);

  const QuadratureGrid& g = opt.grid;
  const std::size_t n = static_cast<std::size_t>(g.n_theta1) * g.n_theta2 * g.n_phi1 * g.n_phi2;
  std::vector<double> fid(n);
  parallel_for(n, opt.threads, [&](std::size_t k) {
    std::size_t r = k;
    const int i4 = static_cast<int>(r % g.n_phi2);
    r /= g.n_phi2;
    const int i3 = static_cast<int>(r % g.n_phi1);
    r /= g.n_phi1;
    const int i2 = static_cast<int>(r % g.n_theta2);
    const int i1 = static_cast<int>(r / g.n_theta2);
    fid[k] = point_fit(loss, res.kappa_eff, R, g.node(i1, i2, i3, i4), opt.samples).fidelity;
  });
  double sum = 0.0;
  for (double f : fid) {
    sum += f;
    res.min_fidelity = std::min(res.min_fidelity, f);
  }
  res.mean_fidelity = sum / static_cast<double>(n);
  res.fits = static_cast<long>(n);
  return res;
}

}  // namespace ehs
