#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ehs/spectral.hpp"
#include "ehs/types.hpp"

namespace ehs {

// Coordinates on the 4D angular manifold at fixed R: (θ1, θ2, φ1, φ2).
typedef std::array<double, 4> Angles;
enum class Direction { theta1 = 0, theta2 = 1, phi1 = 2, phi2 = 3 };

enum class ConnectionKind {
  biorthogonal,  // -i L^† ∂R
  hermitian,     // -i R^+ ∂R with R^+ the Moore-Penrose inverse
};

// Smooth section of the lower band. Implementations must be gauge-smooth in the
// angles; finite differences are taken directly on the returned frames.
typedef std::function<BandFrame(const Angles&)> FrameField;
// Lower-band projector as a function of the angles.
typedef std::function<Matrix4c(const Angles&)> ProjectorField;

ParameterPoint point_at(double R, double kappa, const Angles& a);

// Closed-form lower-band frame (smooth away from sinθ1 = 0 and the EHS).
FrameField closed_form_lower_field(double R, double kappa);
// Numeric eigensystem at every point, rotated onto the closed-form frame to fix the gauge.
FrameField numeric_lower_field(double R, double kappa);
ProjectorField model_lower_projector(double R, double kappa);

// One-parameter version used for loops: A = -i L^† dR/ds (or R^+ for hermitian).
Matrix2c connection_1d(const std::function<BandFrame(double)>& field, double s, double h, ConnectionKind kind);

Matrix2c berry_connection(const FrameField& field, const Angles& a, Direction dir, double h = 1e-4,
                          ConnectionKind kind = ConnectionKind::biorthogonal);

// F_{μν} = ∂μ Aν − ∂ν Aμ + i[Aμ, Aν].
Matrix2c berry_curvature(const FrameField& field, const Angles& a, Direction mu, Direction nu, double h = 1e-4,
                         ConnectionKind kind = ConnectionKind::biorthogonal);

typedef std::array<std::array<Matrix2c, 4>, 4> CurvatureSet;
CurvatureSet curvature_set(const FrameField& field, const Angles& a, double h = 1e-4,
                           ConnectionKind kind = ConnectionKind::biorthogonal);

// ε^{μνλξ} tr(F_{μν} F_{λξ}) / 32π², explicit sum over all 24 permutations.
cd chern_density_levi_civita(const CurvatureSet& F);
// tr(F∧F) / (2!(2π)²) written as the three independent index pairings.
cd chern_density_wedge(const CurvatureSet& F);

// Same density evaluated from the band projector only (gauge free):
// F_{μν} = -i L^† [∂μP, ∂νP] R in the locally parallel gauge.
cd chern_integrand_complex(const ProjectorField& P, const Angles& a, double h = 1e-4);
double chern_integrand(double R, double kappa, const Angles& a, double h = 1e-4);

struct QuadratureGrid {
  int n_theta1 = 24, n_theta2 = 24, n_phi1 = 24, n_phi2 = 24;
  double fd_step = 1e-4;

  void validate() const;
  QuadratureGrid doubled() const;
  std::array<double, 4> spacing() const;
  Angles node(int i1, int i2, int i3, int i4) const;
};

struct IntegrandSample {
  Angles a;
  double value;
};

struct ChernResult {
  double c2 = 0.0;
  double c2_imag = 0.0;
  double defect = 0.0;  // |c2 − round(c2)|
  int refinements = 0;
  QuadratureGrid grid;
  std::vector<IntegrandSample> samples;
};

struct ChernOptions {
  int max_refinements = 0;
  double defect_target = 0.02;
  double fail_defect = 0.05;
  bool keep_samples = false;
  int threads = 0;
};

// Midpoint-rule integral of a projector density over θ1∈[0,π], θ2∈[0,π/2], φ1,φ2∈[0,2π].
ChernResult integrate_chern(const ProjectorField& P, const QuadratureGrid& grid, const ChernOptions& opt = {});
ChernResult second_chern(double R, double kappa, const QuadratureGrid& grid, const ChernOptions& opt = {});

// Frames on a 4D tensor grid, flattened row-major (last axis fastest).
struct FrameGrid {
  std::array<int, 4> dims{1, 1, 1, 1};
  std::vector<BandFrame> frames;

  std::size_t index(const std::array<int, 4>& i) const {
    return ((static_cast<std::size_t>(i[0]) * dims[1] + i[1]) * dims[2] + i[2]) * dims[3] + i[3];
  }
  BandFrame& at(const std::array<int, 4>& i) { return frames[index(i)]; }
  const BandFrame& at(const std::array<int, 4>& i) const { return frames[index(i)]; }
};

// Discrete parallel transport: sweeps the grid with sweep_order[3] as the fastest
// axis and aligns every frame to its predecessor by the polar factor of the overlap.
FrameGrid gauge_fix(FrameGrid grid, const std::array<int, 4>& sweep_order = {0, 1, 2, 3});
FrameGrid gauge_fix(const std::vector<EigenSystem>& systems, const std::array<int, 4>& dims,
                    const std::array<int, 4>& sweep_order = {0, 1, 2, 3});

// Curvature at an interior grid point from central differences of the gauge-fixed frames.
CurvatureSet grid_curvature(const FrameGrid& grid, const std::array<double, 4>& spacing,
                            const std::array<int, 4>& idx);

}  // namespace ehs
