#pragma once

#include <functional>
#include <vector>

#include "ehs/geometry.hpp"
#include "ehs/types.hpp"

namespace ehs {

enum class LoopKind {
  theta2_slice,  // θ1 = π/2, φ2 = 0, φ1: 0 → 2π at fixed (R, θ2)
  moebius,       // q = (x/√2, x/√2, 0, R cosθ1, 0), x = R sinθ1 + Δ, θ1: 0 → 2π·cycles
};

struct LoopSpec {
  LoopKind kind = LoopKind::theta2_slice;
  double R = 2.0;
  double kappa = 1.0;
  double theta2 = 0.0;
  double delta = 0.0;
  int cycles = 1;
  int steps = 256;  // initial RK4 step count, doubled until converged
};

struct HolonomyResult {
  Matrix2c u = Matrix2c::Identity();
  cd w = 0.0;
  cd det_u = 1.0;
  int step_count = 0;
};

struct HolonomyOptions {
  double tol = 1e-8;
  int max_steps = 1 << 20;
};

typedef std::function<Matrix2c(double)> Connection1d;

// Classical RK4 for dU/ds = i A(s) U with U(s0) = I and a fixed number of steps.
Matrix2c transport_rk4(const Connection1d& A, double s0, double s1, int steps);
// Step-halving driver around transport_rk4.
HolonomyResult path_ordered_exponential(const Connection1d& A, double s0, double s1, int steps,
                                        const HolonomyOptions& opt = {});
// log2 of successive step-halving error ratios, i.e. the observed order of accuracy.
double observed_order(const Connection1d& A, double s0, double s1, int steps);

// Lower-band frame on the θ2 slice with unit Hermitian norm, ordered (α, −β).
BandFrame slice_frame(double R, double kappa, double theta2, double phi1);
// Hermitian normalisation N² of the slice eigenvectors scaled as (−(E+iκ)/R, ...).
double slice_norm2(double R, double kappa);

Matrix2c connection_slice_closed_form(double theta2, double phi1, double N2);
Matrix2c holonomy_closed_form(double theta2, double N2);
cd wilson_closed_form(double theta2, double N2);

// Transport connection along a loop, A = +i L^† dR/ds (biorthogonal) or +i R^+ dR/ds.
Connection1d loop_connection(const LoopSpec& loop, ConnectionKind kind);
ConnectionKind default_connection_kind(LoopKind kind);
HolonomyResult holonomy(const LoopSpec& loop, const HolonomyOptions& opt = {});

struct WilsonRow {
  double theta2;
  cd w;
  cd w_closed_form;
  Matrix2c u;
};
std::vector<WilsonRow> wilson_scan(double R, double kappa, const std::vector<double>& theta2_grid, int threads = 0);

struct MinWilsonRow {
  double R;
  double min_re_w;
  double theta2_at_min;
};
std::vector<MinWilsonRow> min_wilson_vs_radius(double kappa, const std::vector<double>& R_grid, int n_theta2 = 101,
                                               int threads = 0);

cd moebius_wilson(double R, double delta, double kappa, int steps_per_cycle = 512);

// Bisection on the sign of Re W over [lo, hi] down to width tol.
double locate_moebius_transition(double R, double kappa, double lo, double hi, double tol = 1e-3);

struct TransportSeries {
  std::vector<double> phi;
  std::vector<double> sx, sy, sz, s2;
};
TransportSeries transport_expectations(double R, double kappa, double theta2, int initial_index, int samples = 401);

}  // namespace ehs
