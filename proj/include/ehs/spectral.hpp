#pragma once

#include <array>
#include <utility>
#include <vector>

#include "ehs/types.hpp"

namespace ehs {

// Two-dimensional eigen-subspace with biorthogonal bases: left^† right = I.
struct BandFrame {
  Frame4x2 right = Frame4x2::Zero();
  Frame4x2 left = Frame4x2::Zero();

  Matrix4c projector() const { return right * left.adjoint(); }
};

// e_minus is the lower band according to lower_branch(); e_plus is its partner.
struct EigenSystem {
  cd e_plus, e_minus;
  BandFrame plus, minus;
};

struct EpReport {
  double gap = 0.0;
  double coalescence = 0.0;
  bool is_ep = false;
};

struct BranchTrack {
  std::vector<std::array<cd, 2>> energies;  // per step, branches labelled at step 0
  bool swapped = false;                     // closing permutation is the swap
};

struct ClosedFormVectors {
  cd e_plus, e_minus;  // ± principal square root
  cd n_plus, n_minus;  // biorthogonal normalisation, N^2 = <ψ̃_raw|ψ_raw>
  BandFrame plus, minus;  // columns ordered (α, β)
};

// Continuous choice of the lower band for a ± pair measured from its centre d:
// Re d < 0 when Re d² > 0, otherwise Im d < 0.
bool lower_branch(cd d);

// Principal-root pair (+√E², −√E²).
std::pair<cd, cd> eigenvalues_closed_form(double R, double kappa, double theta1);
// Lower-band energy of q·Γ + iκΓ4 selected by lower_branch().
cd lower_energy(const Vector5d& q, double kappa);

// Riesz projector onto the band with energy eps for the model family (H² = eps² I).
Matrix4c band_projector(const Matrix4c& H, cd eps);
// Closed-form lower-band projector of q·Γ + iκΓ4.
Matrix4c lower_projector(const Vector5d& q, double kappa);

// Biorthogonal frame spanning the range of a rank-2 (possibly oblique) projector.
BandFrame frame_from_projector(const Matrix4c& P);

// Two pair-averaged energies of a doubly degenerate 4x4 matrix, ordered (upper, lower).
std::array<cd, 2> pair_energies(const Matrix4c& H);

EigenSystem eigensystem(const Matrix4c& H, double tol = 1e-7, const BandFrame* reference = nullptr);

ClosedFormVectors right_eigenvectors_closed_form(const ParameterPoint& p);

EpReport detect_ep(const ParameterPoint& p, double tol = 1e-6);

BranchTrack track_branches(const std::vector<ParameterPoint>& loop);

// Closed sampling of the Möbius family over θ1 ∈ [0, 2π·cycles], first = last.
std::vector<ParameterPoint> moebius_loop(double R, double delta, double kappa, int steps_per_cycle,
                                         int cycles = 1);

// Polar (unitary) factor of a 2x2 matrix; throws SingularOverlap below tol.
Matrix2c polar_unitary(const Matrix2c& m, double tol = 1e-10);
// Rotates f inside its subspace so that ref.left^† f.right becomes Hermitian positive.
void align_frame(BandFrame& f, const BandFrame& ref, double tol = 1e-10);
// Rescales left and right so that both have equal Frobenius norm.
void balance_frame(BandFrame& f);

struct PlaneSpec {
  std::vector<int> axes;                 // subset of {0,1,2,4} (q1,q2,q3,q5), size 2 or 3
  Vector5d base = Vector5d::Zero();      // fixed coordinates
  double lo = -2.0, hi = 2.0;
  int n = 41;
};

struct SpectrumRow {
  Vector5d q;
  cd e_plus, e_minus;
  double gap;
};

std::vector<SpectrumRow> spectrum_scan(const PlaneSpec& plane, double kappa, int threads = 0);

}  // namespace ehs
