#include "ehs/cqed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "ehs/error.hpp"

namespace ehs {

namespace odeint = boost::numeric::odeint;

Model effective_model(const CqedConfig& cfg, DissipatorModel model) {
  Model m;
  m.space = CqedSpace{cfg.fock_cutoff};
  const MatrixXc s = m.space.s_basis();
  const MatrixXc h = s * effective_hamiltonian(cfg.effective()) * s.adjoint();
  m.h = [h](double) { return h; };
  m.jumps = jump_operators(cfg, model);
  return m;
}

namespace {

// Splits a into its Bohr-frequency components with respect to h0.
std::vector<MatrixXc> secular_components(const MatrixXc& h0, const MatrixXc& a, double rate) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h0);
  const MatrixXc V = es.eigenvectors();
  const MatrixXc aw = V.adjoint() * a * V;
  const Eigen::VectorXd e = es.eigenvalues();
  const double tol = 1e-7 * std::max(1.0, e.cwiseAbs().maxCoeff());
  // cluster representatives in increasing order; lookups are tolerance based
  std::vector<double> freqs;
  std::vector<MatrixXc> parts;
  for (int i = 0; i < aw.rows(); ++i)
    for (int j = 0; j < aw.cols(); ++j) {
      if (std::abs(aw(i, j)) < 1e-13) continue;
      const double w = e(j) - e(i);
      std::size_t k = 0;
      while (k < freqs.size() && std::abs(freqs[k] - w) > tol) ++k;
      if (k == freqs.size()) {
        freqs.push_back(w);
        parts.push_back(MatrixXc::Zero(aw.rows(), aw.cols()));
      }
      parts[k](i, j) = aw(i, j);
    }
  std::vector<std::size_t> order(freqs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return freqs[x] < freqs[y]; });
  std::vector<MatrixXc> out;
  for (std::size_t k : order) out.push_back(std::sqrt(rate) * V * parts[k] * V.adjoint());
  return out;
}

}  // namespace

Model full_model(const CqedConfig& cfg_in, DissipatorModel model) {
  const CqedConfig cfg = configure_drives(cfg_in);
  Model m;
  m.space = CqedSpace{cfg.fock_cutoff};
  const MatrixXc h0 = undriven_hamiltonian(cfg);
  const MatrixXc static_part = h0 - cfg.omega_r * m.space.excitation();
  std::vector<MatrixXc> ops;
  std::vector<double> freq;
  for (int k = 0; k < 4; ++k) {
    if (cfg.lambda[k] == 0.0) continue;
    ops.push_back(cfg.lambda[k] * std::exp(I * cfg.phi[k]) * m.space.lower(k < 2 ? 0 : 1));
    freq.push_back(cfg.xi[k] - cfg.omega_r);
  }
  m.h = [static_part, ops, freq](double t) {
    MatrixXc h = static_part;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const MatrixXc c = std::exp(I * (freq[k] * t)) * ops[k];
      h += c + c.adjoint();
    }
    return h;
  };
  if (model == DissipatorModel::literal)
    m.jumps = {std::sqrt(cfg.kappa) * m.space.a()};
  else
    m.jumps = secular_components(h0, m.space.a(), cfg.kappa);
  return m;
}

namespace {

typedef std::vector<double> State;

void check_grid(const std::vector<double>& t) {
  if (t.empty()) throw Error(Errc::invalid_argument, "time grid is empty");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1])) throw Error(Errc::invalid_argument, "time grid must be strictly increasing");
}

MatrixXc loss_term(const Model& m) {
  const int n = m.space.dim();
  MatrixXc g = MatrixXc::Zero(n, n);
  for (const auto& l : m.jumps) g += l.adjoint() * l;
  return 0.5 * g;
}

// Interleaved (re, im) storage of a column-major complex array.
void pack(const cd* src, std::size_t n, State& x) {
  x.resize(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    x[2 * k] = src[k].real();
    x[2 * k + 1] = src[k].imag();
  }
}

template <class Rhs, class Observer>
void integrate(Rhs rhs, State& x, const std::vector<double>& t_grid, double atol, double rtol, Observer obs) {
  check_grid(t_grid);
  if (t_grid.size() == 1) {
    obs(x, t_grid[0]);
    return;
  }
  auto stepper = odeint::make_controlled(atol, rtol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = std::min(1e-2, (t_grid.back() - t_grid.front()) / 16.0);
  try {
    odeint::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), dt0, obs,
                            odeint::max_step_checker(50000000));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::step_rejected, std::string("integrator failed: ") + e.what());
  }
}

void check_leakage(double top, double total, double tol, double t) {
  if (total > 0.0 && top / total > tol)
    throw Error(Errc::cutoff_too_small,
                "top Fock level population " + std::to_string(top / total) + " at t = " + std::to_string(t));
}

}  // namespace

std::vector<SystemState> no_jump_evolve(const Model& m, const VectorXc& psi0, const std::vector<double>& t_grid,
                                        const EvolveOptions& opt) {
  const int n = m.space.dim();
  if (psi0.size() != n) throw Error(Errc::invalid_argument, "initial state has the wrong dimension");
  const MatrixXc loss = loss_term(m);
  const Eigen::VectorXd top = m.space.top_fock_projector().diagonal().real();
  auto rhs = [&](const State& x, State& dx, double t) {
    Eigen::Map<const VectorXc> psi(reinterpret_cast<const cd*>(x.data()), n);
    Eigen::Map<VectorXc> dpsi(reinterpret_cast<cd*>(dx.data()), n);
    dpsi.noalias() = (-I) * (m.h(t) * psi) - loss * psi;
  };
  std::vector<SystemState> out;
  auto obs = [&](const State& x, double t) {
    Eigen::Map<const VectorXc> psi(reinterpret_cast<const cd*>(x.data()), n);
    check_leakage(top.dot(psi.cwiseAbs2()), psi.squaredNorm(), opt.leakage_tol, t);
    out.push_back({psi, t});
  };
  State x;
  pack(psi0.data(), n, x);
  integrate(rhs, x, t_grid, opt.atol, opt.rtol, obs);
  return out;
}

namespace {

std::vector<MatrixXc> evolve_density(const Model& m, const MatrixXc& rho0, const std::vector<double>& t_grid,
                                     const EvolveOptions& opt, bool recycle) {
  const int n = m.space.dim();
  if (rho0.rows() != n || rho0.cols() != n) throw Error(Errc::invalid_argument, "initial density has the wrong shape");
  const MatrixXc loss = loss_term(m);
  const Eigen::VectorXd top = m.space.top_fock_projector().diagonal().real();
  std::vector<MatrixXc> jumps_adj;
  for (const auto& l : m.jumps) jumps_adj.push_back(l.adjoint());
  MatrixXc tmp(n, n);
  auto rhs = [&](const State& x, State& dx, double t) {
    Eigen::Map<const MatrixXc> rho(reinterpret_cast<const cd*>(x.data()), n, n);
    Eigen::Map<MatrixXc> drho(reinterpret_cast<cd*>(dx.data()), n, n);
    const MatrixXc heff = m.h(t) - I * loss;
    tmp.noalias() = heff * rho;
    drho = (-I) * tmp + I * tmp.adjoint();
    if (recycle)
      for (std::size_t k = 0; k < m.jumps.size(); ++k) drho.noalias() += m.jumps[k] * rho * jumps_adj[k];
  };
  std::vector<MatrixXc> out;
  auto obs = [&](const State& x, double t) {
    Eigen::Map<const MatrixXc> rho(reinterpret_cast<const cd*>(x.data()), n, n);
    const Eigen::VectorXd pop = rho.diagonal().real();
    check_leakage(top.dot(pop), pop.sum(), opt.leakage_tol, t);
    out.push_back(rho);
  };
  State x;
  pack(rho0.data(), static_cast<std::size_t>(n) * n, x);
  integrate(rhs, x, t_grid, opt.atol, opt.rtol, obs);
  return out;
}

}  // namespace

std::vector<MatrixXc> lindblad_evolve(const Model& m, const MatrixXc& rho0, const std::vector<double>& t_grid,
                                      EvolveOptions opt) {
  return evolve_density(m, rho0, t_grid, opt, true);
}

std::vector<MatrixXc> conditional_evolve(const Model& m, const MatrixXc& rho0, const std::vector<double>& t_grid,
                                         EvolveOptions opt) {
  return evolve_density(m, rho0, t_grid, opt, false);
}

TrajectorySample postselect(const SystemState& s, const CqedSpace& space, int trajectory) {
  const MatrixXc S = space.s_basis();
  const Vector4c v = S.adjoint() * s.psi;
  const double total = s.psi.squaredNorm();
  const double kept = v.squaredNorm();
  if (!(kept > 1e-14 * total) || total == 0.0) throw Error(Errc::empty_support, "state has no weight in S");
  TrajectorySample out;
  out.t = s.t;
  out.trajectory = trajectory;
  out.state = v / std::sqrt(kept);
  out.discarded = std::max(0.0, (total - kept) / total);
  return out;
}

TrajectorySample postselect(const MatrixXc& rho, double t, const CqedSpace& space, int trajectory) {
  const MatrixXc S = space.s_basis();
  const Matrix4c rs = S.adjoint() * rho * S;
  const double total = rho.trace().real();
  const double kept = rs.trace().real();
  if (!(kept > 1e-14 * std::abs(total)) || total == 0.0) throw Error(Errc::empty_support, "state has no weight in S");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rs + rs.adjoint()));
  Vector4c v = es.eigenvectors().col(3);
  int j;
  v.cwiseAbs().maxCoeff(&j);
  v *= std::abs(v(j)) / v(j);
  TrajectorySample out;
  out.t = t;
  out.trajectory = trajectory;
  out.state = v;
  out.discarded = std::max(0.0, (total - kept) / total);
  return out;
}

}  // namespace ehs
