#include "ehs/cqed.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"

namespace ehs {

namespace {

MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatrixXc qutrit_lower() {
  MatrixXc l = MatrixXc::Zero(3, 3);
  l(0, 1) = 1.0;
  l(1, 2) = std::sqrt(2.0);
  return l;
}

MatrixXc on_qutrit(int qutrit, const MatrixXc& op, int n_fock) {
  const MatrixXc id3 = MatrixXc::Identity(3, 3);
  const MatrixXc idf = MatrixXc::Identity(n_fock, n_fock);
  return qutrit == 0 ? kron(kron(op, id3), idf) : kron(kron(id3, op), idf);
}

}  // namespace

std::vector<std::string> validate_config(const CqedConfig& cfg) {
  auto finite = [](double v) { return std::isfinite(v); };
  const double all[] = {cfg.omega_e[0], cfg.omega_e[1], cfg.omega_f[0], cfg.omega_f[1], cfg.omega_r,
                        cfg.g_r,        cfg.kappa,      cfg.Xi,         cfg.Lambda1,    cfg.Lambda2,
                        cfg.phase1,     cfg.phase2};
  for (double v : all)
    if (!finite(v)) throw Error(Errc::invalid_argument, "cqed parameters must be finite");
  if (cfg.fock_cutoff < 2) throw Error(Errc::invalid_argument, "fock_cutoff must be >= 2");
  if (cfg.kappa < 0.0) throw Error(Errc::invalid_argument, "kappa must be >= 0");
  if (cfg.g_r <= 0.0) throw Error(Errc::invalid_argument, "g_r must be positive");
  std::vector<std::string> warn;
  for (int m = 0; m < 4; ++m)
    if (cfg.lambda[m] > cfg.g_r / 10.0)
      warn.push_back("drive " + std::to_string(m) + " amplitude exceeds g_r/10; effective model may not hold");
  if (std::abs(cfg.omega_e[0] - cfg.omega_r) > 1e-12 || std::abs(cfg.omega_e[1] - cfg.omega_r) > 1e-12)
    warn.push_back("qutrit g-e transitions are not resonant with the resonator");
  return warn;
}

Vector5d effective_q(const EffectiveParams& p) {
  Vector5d q;
  q << p.Lambda2 * std::cos(p.phi2), p.Lambda1 * std::cos(p.phi1), p.Lambda1 * std::sin(p.phi1), p.Xi,
      p.Lambda2 * std::sin(p.phi2);
  return q;
}

EffectiveParams params_from_spherical(double R, const Angles& a) {
  EffectiveParams p;
  p.Xi = R * std::cos(a[0]);
  p.Lambda1 = R * std::sin(a[0]) * std::cos(a[1]);
  p.Lambda2 = R * std::sin(a[0]) * std::sin(a[1]);
  p.phi1 = a[2];
  p.phi2 = a[3];
  return p;
}

VectorXc CqedSpace::basis(int q1, int q2, int n) const {
  VectorXc v = VectorXc::Zero(dim());
  v(index(q1, q2, n)) = 1.0;
  return v;
}

MatrixXc CqedSpace::a() const {
  MatrixXc af = MatrixXc::Zero(n_fock, n_fock);
  for (int n = 1; n < n_fock; ++n) af(n - 1, n) = std::sqrt(static_cast<double>(n));
  return kron(MatrixXc::Identity(9, 9), af);
}

MatrixXc CqedSpace::lower(int qutrit) const { return on_qutrit(qutrit, qutrit_lower(), n_fock); }

MatrixXc CqedSpace::number(int qutrit, int level) const {
  MatrixXc p = MatrixXc::Zero(3, 3);
  p(level, level) = 1.0;
  return on_qutrit(qutrit, p, n_fock);
}

MatrixXc CqedSpace::excitation() const {
  const MatrixXc aa = a();
  MatrixXc n = aa.adjoint() * aa;
  for (int q = 0; q < 2; ++q) n += number(q, 1) + 2.0 * number(q, 2);
  return n;
}

MatrixXc CqedSpace::top_fock_projector() const {
  MatrixXc p = MatrixXc::Zero(n_fock, n_fock);
  p(n_fock - 1, n_fock - 1) = 1.0;
  return kron(MatrixXc::Identity(9, 9), p);
}

MatrixXc CqedSpace::s_basis() const {
  MatrixXc s(dim(), 4);
  const VectorXc ge0 = basis(0, 1, 0), eg0 = basis(1, 0, 0), gg1 = basis(0, 0, 1);
  s.col(0) = basis(2, 0, 0);
  s.col(1) = 0.5 * ge0 + 0.5 * eg0 + gg1 / std::sqrt(2.0);
  s.col(2) = basis(0, 2, 0);
  s.col(3) = 0.5 * ge0 + 0.5 * eg0 - gg1 / std::sqrt(2.0);
  return s;
}

MatrixXc undriven_hamiltonian(const CqedConfig& cfg) {
  const CqedSpace sp{cfg.fock_cutoff};
  const MatrixXc a = sp.a();
  MatrixXc h = cfg.omega_r * (a.adjoint() * a);
  for (int q = 0; q < 2; ++q) {
    h += cfg.omega_e[q] * sp.number(q, 1) + cfg.omega_f[q] * sp.number(q, 2);
    const MatrixXc c = cfg.g_r * sp.lower(q) * a.adjoint();
    h += c + c.adjoint();
  }
  return h;
}

namespace {

int drive_qutrit(int m) { return m < 2 ? 0 : 1; }

MatrixXc drive_terms(const CqedConfig& cfg, double t, double frame_omega) {
  const CqedSpace sp{cfg.fock_cutoff};
  MatrixXc h = MatrixXc::Zero(sp.dim(), sp.dim());
  for (int m = 0; m < 4; ++m) {
    if (cfg.lambda[m] == 0.0) continue;
    const MatrixXc c = cfg.lambda[m] * std::exp(I * ((cfg.xi[m] - frame_omega) * t + cfg.phi[m])) * sp.lower(drive_qutrit(m));
    h += c + c.adjoint();
  }
  return h;
}

}  // namespace

MatrixXc build_full_hamiltonian(const CqedConfig& cfg, double t) {
  return undriven_hamiltonian(cfg) + drive_terms(cfg, t, 0.0);
}

MatrixXc rotating_full_hamiltonian(const CqedConfig& cfg, double t) {
  const CqedSpace sp{cfg.fock_cutoff};
  return undriven_hamiltonian(cfg) - cfg.omega_r * sp.excitation() + drive_terms(cfg, t, cfg.omega_r);
}

DressedStates dressed_states(const CqedConfig& cfg) {
  const CqedSpace sp{cfg.fock_cutoff};
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(undriven_hamiltonian(cfg));
  MatrixXc targets(sp.dim(), 5);
  targets.leftCols(4) = sp.s_basis();
  targets.col(4) = sp.gg0();
  DressedStates d;
  d.vectors.resize(sp.dim(), 5);
  d.excitation = {2, 1, 2, 1, 0};
  for (int k = 0; k < 5; ++k) {
    const VectorXc ov = es.eigenvectors().adjoint() * targets.col(k);
    int best;
    ov.cwiseAbs().maxCoeff(&best);
    if (std::abs(ov(best)) < 0.9) throw Error(Errc::invalid_argument, "dressed state is not adiabatically connected to its bare state");
    d.energy[k] = es.eigenvalues()(best);
    d.vectors.col(k) = es.eigenvectors().col(best) * (std::abs(ov(best)) / ov(best));
  }
  return d;
}

Matrix4c effective_hamiltonian(double Xi, double Lambda1, double Lambda2, double phi1, double phi2) {
  Matrix4c h = Matrix4c::Zero();
  h.diagonal() << Xi, -Xi, Xi, -Xi;
  const cd c1 = Lambda1 * std::exp(I * phi1);
  const cd c2 = Lambda2 * std::exp(I * phi2);
  h(0, 1) += c1;   // |fg0><1+|
  h(3, 2) += c1;   // |1-><gf0|
  h(1, 2) += c2;   // |1+><gf0|
  h(0, 3) -= c2;   // -|fg0><1-|
  Matrix4c herm = h;
  herm.diagonal().setZero();
  return h + herm.adjoint();
}

namespace {

// (source, target) dressed indices of each drive and the effective element <target|H|source>.
struct DriveTarget {
  int src, tgt;
  cd element;
};

std::array<DriveTarget, 4> drive_targets(const EffectiveParams& p) {
  const cd e1 = p.Lambda1 * std::exp(I * p.phi1);
  const cd e2 = p.Lambda2 * std::exp(I * p.phi2);
  return {{{0, 1, std::conj(e1)}, {0, 3, -std::conj(e2)}, {2, 1, e2}, {2, 3, e1}}};
}

}  // namespace

CqedConfig configure_drives(CqedConfig cfg) {
  if (!cfg.auto_drives) return cfg;
  const CqedSpace sp{cfg.fock_cutoff};
  const DressedStates d = dressed_states(cfg);
  const auto targets = drive_targets(cfg.effective());
  for (int m = 0; m < 4; ++m) {
    const auto& t = targets[m];
    const cd x = d.vectors.col(t.tgt).dot(sp.lower(drive_qutrit(m)) * d.vectors.col(t.src));
    const cd amp = t.element / x;
    cfg.lambda[m] = std::abs(amp);
    cfg.phi[m] = std::abs(amp) > 0.0 ? std::arg(amp) : 0.0;
    cfg.xi[m] = d.energy[t.src] - d.energy[t.tgt] - 2.0 * cfg.Xi;
  }
  return cfg;
}

std::vector<MatrixXc> jump_operators(const CqedConfig& cfg, DissipatorModel model) {
  const CqedSpace sp{cfg.fock_cutoff};
  const MatrixXc a = sp.a();
  const double rk = std::sqrt(cfg.kappa);
  if (model == DissipatorModel::literal) return {rk * a};
  // The S states have pairwise distinct Bohr frequencies towards |gg0>, so the
  // secular jump set is one operator per S state.
  const MatrixXc s = sp.s_basis();
  std::vector<MatrixXc> out;
  for (int k = 0; k < 4; ++k) {
    const VectorXc img = a * s.col(k);
    if (img.norm() < 1e-14) continue;
    out.push_back(rk * img * s.col(k).adjoint());
  }
  return out;
}

MatrixXc nh_hamiltonian(const CqedConfig& cfg, DissipatorModel model) {
  const CqedSpace sp{cfg.fock_cutoff};
  const MatrixXc s = sp.s_basis();
  MatrixXc h = s * effective_hamiltonian(cfg.effective()) * s.adjoint();
  for (const auto& l : jump_operators(cfg, model)) h -= 0.5 * I * (l.adjoint() * l);
  return h;
}

namespace {

struct CliffordFit {
  Vector5d q;
  double kappa_eff;
  cd shift;
  double residual;
};

CliffordFit fit_clifford(const Matrix4c& m) {
  const auto& g = dirac_basis().gamma;
  CliffordFit f;
  f.shift = m.trace() / 4.0;
  Matrix4c model = f.shift * Matrix4c::Identity();
  for (int k = 0; k < 5; ++k) {
    const cd t = (g[k] * m).trace() / 4.0;
    f.q(k) = t.real();
    model += t.real() * g[k];
    if (k == 3) {
      f.kappa_eff = t.imag();
      model += I * t.imag() * g[k];
    }
  }
  f.residual = (m - model).norm();
  return f;
}

}  // namespace

namespace {

// Frame energies that make the four resonant couplings static.
std::array<double, 4> frame_energies(const CqedConfig& cfg) {
  return {cfg.xi[0], 0.0, cfg.xi[2], cfg.xi[0] - cfg.xi[1]};
}

}  // namespace

Vector4c effective_frame_amplitudes(const CqedConfig& cfg, const DressedStates& d, const VectorXc& psi, double t) {
  const std::array<double, 4> r = frame_energies(cfg);
  const double offset = d.energy[1] + cfg.Xi;
  Vector4c c;
  for (int i = 0; i < 4; ++i) {
    const double phase = (r[i] + offset - cfg.omega_r * d.excitation[i]) * t;
    c(i) = d.vectors.col(i).dot(psi) * std::exp(I * phase);
  }
  return c;
}

MappingReport validate_mapping(const CqedConfig& cfg_in, bool throw_on_failure) {
  const CqedConfig cfg = configure_drives(cfg_in);
  const CqedSpace sp{cfg.fock_cutoff};
  const DressedStates d = dressed_states(cfg);
  const MatrixXc D = d.vectors.leftCols(4);

  const std::array<double, 4> r = frame_energies(cfg);
  MappingReport rep;
  rep.loop_mismatch = std::abs((cfg.xi[2] - cfg.xi[3]) - (cfg.xi[0] - cfg.xi[1]));

  const double tol = 1e-8;
  const double offset = d.energy[1] + cfg.Xi;
  Matrix4c coh = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) coh(i, i) = d.energy[i] - r[i] - offset;
  for (int m = 0; m < 4; ++m) {
    if (cfg.lambda[m] == 0.0) continue;
    const MatrixXc X = sp.lower(drive_qutrit(m));
    const Matrix4c xs = D.adjoint() * X * D;
    const Matrix4c xd = D.adjoint() * X.adjoint() * D;
    const cd c = cfg.lambda[m] * std::exp(I * cfg.phi[m]);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (std::abs(cfg.xi[m] + r[i] - r[j]) < tol) coh(i, j) += c * xs(i, j);
        if (std::abs(-cfg.xi[m] + r[i] - r[j]) < tol) coh(i, j) += std::conj(c) * xd(i, j);
      }
  }
  const MatrixXc a = sp.a();
  const Matrix4c n = D.adjoint() * (a.adjoint() * a) * D;
  Matrix4c sec = coh, lit = coh;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const cd v = -0.5 * I * cfg.kappa * n(i, j);
      lit(i, j) += v;
      if (std::abs(r[i] - r[j]) < tol) sec(i, j) += v;
    }

  const CliffordFit fs = fit_clifford(sec);
  const CliffordFit fl = fit_clifford(lit);
  rep.q = fs.q;
  rep.kappa_eff = fs.kappa_eff;
  rep.shift = fs.shift;
  rep.residual = fs.residual + rep.loop_mismatch;
  rep.kappa_eff_literal = fl.kappa_eff;
  rep.residual_literal = fl.residual;
  rep.h_norm = (sec - fs.shift * Matrix4c::Identity()).norm();
  rep.projected = sec;
  if (throw_on_failure && rep.residual > 1e-3 * rep.h_norm)
    throw Error(Errc::residual_too_large, "effective mapping residual " + std::to_string(rep.residual) +
                                              " exceeds 1e-3 of the Hamiltonian norm");
  return rep;
}

}  // namespace ehs
