#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehs/geometry.hpp"
#include "ehs/spectral.hpp"
#include "ehs/types.hpp"

namespace ehs {

typedef Eigen::MatrixXcd MatrixXc;
typedef Eigen::VectorXcd VectorXc;

enum class DissipatorModel {
  literal,  // a†a exactly as written, mixes |1+> and |1->
  secular,  // jump operator split by Bohr frequency of the undriven Hamiltonian
};

// Parameters of the four-level effective model (basis |fg0>, |1+>, |gf0>, |1->).
struct EffectiveParams {
  double Xi = 0.0;
  double Lambda1 = 0.0, Lambda2 = 0.0;
  double phi1 = 0.0, phi2 = 0.0;
};

struct CqedConfig {
  std::array<double, 2> omega_e{30.0, 30.0};
  std::array<double, 2> omega_f{52.0, 51.0};
  double omega_r = 30.0;
  double g_r = 0.2;
  // drives m = 0,1 act on Q1 (|fg0> -> |1+>, |1->), m = 2,3 on Q2 (|gf0> -> |1+>, |1->)
  std::array<double, 4> lambda{};
  std::array<double, 4> xi{};
  std::array<double, 4> phi{};
  double kappa = 0.0;
  double Xi = 0.0;
  int fock_cutoff = 3;
  // Λ1, Λ2, φ1, φ2 of the effective model; drives are derived from them when auto_drives is set
  double Lambda1 = 0.0025, Lambda2 = 0.0025;
  double phase1 = 0.0, phase2 = 0.0;
  bool auto_drives = true;
  DissipatorModel dissipator = DissipatorModel::secular;

  EffectiveParams effective() const { return {Xi, Lambda1, Lambda2, phase1, phase2}; }
};

// Throws InvalidArgument on impossible values; returns soft warnings (e.g. λ > g_r/10).
std::vector<std::string> validate_config(const CqedConfig& cfg);

// q = (Λ2 cosφ2, Λ1 cosφ1, Λ1 sinφ1, Ξ, Λ2 sinφ2)
Vector5d effective_q(const EffectiveParams& p);
EffectiveParams params_from_spherical(double R, const Angles& a);

// ---- tensor space {g,e,f} ⊗ {g,e,f} ⊗ Fock(cutoff) -------------------------

struct CqedSpace {
  int n_fock = 3;
  int dim() const { return 9 * n_fock; }
  int index(int q1, int q2, int n) const { return (q1 * 3 + q2) * n_fock + n; }
  VectorXc basis(int q1, int q2, int n) const;

  MatrixXc a() const;
  MatrixXc lower(int qutrit) const;  // |g><e| + √2 |e><f| on the chosen qutrit
  MatrixXc number(int qutrit, int level) const;
  MatrixXc excitation() const;       // Σ (n_e + 2 n_f) + a†a
  MatrixXc top_fock_projector() const;

  // ideal S states in order |fg0>, |1+>, |gf0>, |1->; columns are orthonormal
  MatrixXc s_basis() const;
  VectorXc gg0() const { return basis(0, 0, 0); }
};

// Qutrit-resonator Hamiltonian without drives.
MatrixXc undriven_hamiltonian(const CqedConfig& cfg);
// Lab-frame Hamiltonian including the four drives; Hermitian.
MatrixXc build_full_hamiltonian(const CqedConfig& cfg, double t);
// Same dynamics in the frame rotating at omega_r times the excitation number.
MatrixXc rotating_full_hamiltonian(const CqedConfig& cfg, double t);

struct DressedStates {
  std::array<double, 5> energy;  // |fg0>, |1+>, |gf0>, |1->, |gg0>
  MatrixXc vectors;              // columns in the same order
  std::array<int, 5> excitation;
};
DressedStates dressed_states(const CqedConfig& cfg);

// Fills lambda, xi and phi from the effective parameters using the dressed spectrum.
CqedConfig configure_drives(CqedConfig cfg);

Matrix4c effective_hamiltonian(double Xi, double Lambda1, double Lambda2, double phi1, double phi2);
inline Matrix4c effective_hamiltonian(const EffectiveParams& p) {
  return effective_hamiltonian(p.Xi, p.Lambda1, p.Lambda2, p.phi1, p.phi2);
}

// Jump operators (rate folded in) of the resonator loss.
std::vector<MatrixXc> jump_operators(const CqedConfig& cfg, DissipatorModel model);
// Effective model embedded in the tensor space minus (i/2) Σ L†L; literal gives H_I − (i/2)κ a†a.
MatrixXc nh_hamiltonian(const CqedConfig& cfg, DissipatorModel model = DissipatorModel::literal);

struct MappingReport {
  Vector5d q = Vector5d::Zero();
  double kappa_eff = 0.0;
  cd shift = 0.0;
  double residual = 0.0;          // secular projection
  double kappa_eff_literal = 0.0;
  double residual_literal = 0.0;  // every dissipator term kept
  double h_norm = 0.0;
  double loop_mismatch = 0.0;     // violation of ξ0 − ξ1 = ξ2 − ξ3
  Matrix4c projected = Matrix4c::Zero();
};
// Rotating-wave reduction of the full driven model onto S followed by a fit to
// q·Γ + iκ_eff Γ4 + c I.
MappingReport validate_mapping(const CqedConfig& cfg, bool throw_on_failure = true);

// ---- dynamics -----------------------------------------------------------------

struct Model {
  CqedSpace space;
  std::function<MatrixXc(double)> h;  // Hermitian part (time dependent for the full model)
  std::vector<MatrixXc> jumps;
};
Model effective_model(const CqedConfig& cfg, DissipatorModel model);
Model full_model(const CqedConfig& cfg, DissipatorModel model);

// Amplitudes of a rotating-frame full-model state on the dressed S states, moved to the
// static frame of validate_mapping so they evolve under the fitted 4x4 generator.
// cfg must already carry its drives (configure_drives).
Vector4c effective_frame_amplitudes(const CqedConfig& cfg, const DressedStates& d, const VectorXc& psi, double t);

struct EvolveOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double leakage_tol = 1e-4;
};

struct SystemState {
  VectorXc psi;
  double t = 0.0;
};

std::vector<SystemState> no_jump_evolve(const Model& m, const VectorXc& psi0, const std::vector<double>& t_grid,
                                        const EvolveOptions& opt = {});
std::vector<MatrixXc> lindblad_evolve(const Model& m, const MatrixXc& rho0, const std::vector<double>& t_grid,
                                      EvolveOptions opt = {1e-8, 1e-11, 1e-4});
// Unnormalised no-jump density, dρ/dt = −i(H_NH ρ − ρ H_NH†); oracle for no_jump_evolve.
std::vector<MatrixXc> conditional_evolve(const Model& m, const MatrixXc& rho0, const std::vector<double>& t_grid,
                                         EvolveOptions opt = {1e-8, 1e-11, 1e-4});

struct TrajectorySample {
  double t = 0.0;
  int trajectory = 0;
  Vector4c state = Vector4c::Zero();  // in the |fg0>, |1+>, |gf0>, |1-> basis, unit norm
  double discarded = 0.0;             // weight outside S before renormalisation
};

TrajectorySample postselect(const SystemState& s, const CqedSpace& space, int trajectory = 0);
// Density-matrix version: projects onto S and keeps the dominant eigenvector.
TrajectorySample postselect(const MatrixXc& rho, double t, const CqedSpace& space, int trajectory = 0);

// ---- fitting and the measurement protocol -------------------------------------

struct FitResult {
  std::array<cd, 2> energies{};  // (upper, lower), common shift removed
  cd shift = 0.0;
  BandFrame lower, upper;
  Matrix4c generator = Matrix4c::Zero();  // fitted H up to the removed shift
  double residual = 0.0;
  double condition = 0.0;  // ratio of the two smallest singular values of the pencil system
  int pairs = 0;
};

// Sample times t_j geometric over [0.05, 3]·2π/|gap|, each paired with t_j + δ.
std::vector<double> fit_times(double gap, int n, double& delta);

FitResult fit_eigenstates(const std::vector<TrajectorySample>& samples, double delta);

// tr(Qa Qb)/2 with Q the orthogonal projectors onto the column spaces.
double subspace_fidelity(const Frame4x2& a, const Frame4x2& b);

struct ProtocolOptions {
  QuadratureGrid grid{12, 12, 8, 8, 1e-3};
  int samples = 10;
  int threads = 0;
};

struct ProtocolResult {
  ChernResult chern;
  double kappa_eff = 0.0;
  double mean_fidelity = 0.0;
  double min_fidelity = 1.0;
  long fits = 0;
};

// Lower-band projector reconstructed from simulated postselected samples at one
// point of the manifold; R is in units of the measured κ_eff.
struct PointFit {
  FitResult fit;
  Matrix4c projector;
  double fidelity;
};
PointFit protocol_point(const CqedConfig& base, double kappa_eff, double R, const Angles& a, int samples);

ProtocolResult protocol_chern(const CqedConfig& base, double R_over_kappa, const ProtocolOptions& opt = {});

}  // namespace ehs
