#include "ehs/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"
#include "ehs/parallel.hpp"

namespace ehs {

ParameterPoint point_at(double R, double kappa, const Angles& a) {
  return ParameterPoint::from_spherical(Spherical{R, a[0], a[1], a[2], a[3]}, kappa);
}

FrameField closed_form_lower_field(double R, double kappa) {
  return [R, kappa](const Angles& a) {
    const ClosedFormVectors cf = right_eigenvectors_closed_form(point_at(R, kappa, a));
    return lower_branch(cf.e_plus) ? cf.plus : cf.minus;
  };
}

FrameField numeric_lower_field(double R, double kappa) {
  return [R, kappa](const Angles& a) {
    const ParameterPoint p = point_at(R, kappa, a);
    const ClosedFormVectors cf = right_eigenvectors_closed_form(p);
    const BandFrame ref = lower_branch(cf.e_plus) ? cf.plus : cf.minus;
    return eigensystem(build_hamiltonian(p), 1e-7, &ref).minus;
  };
}

ProjectorField model_lower_projector(double R, double kappa) {
  return [R, kappa](const Angles& a) { return lower_projector(point_at(R, kappa, a).q, kappa); };
}

Matrix2c connection_1d(const std::function<BandFrame(double)>& field, double s, double h, ConnectionKind kind) {
  const BandFrame f0 = field(s);
  if (f0.left.norm() * f0.right.norm() > 1e8)
    throw Error(Errc::on_ehs, "biorthogonal normalisation diverges (exceptional point)");
  const Frame4x2 dR = (field(s + h).right - field(s - h).right) / (2.0 * h);
  if (kind == ConnectionKind::biorthogonal) {
    if ((f0.left.adjoint() * f0.right - Matrix2c::Identity()).norm() > 1e-8)
      throw Error(Errc::frame_mismatch, "frame is not biorthonormal");
    return -I * (f0.left.adjoint() * dR);
  }
  const Matrix2c gram = f0.right.adjoint() * f0.right;
  return -I * (gram.inverse() * (f0.right.adjoint() * dR));
}

Matrix2c berry_connection(const FrameField& field, const Angles& a, Direction dir, double h, ConnectionKind kind) {
  const int d = static_cast<int>(dir);
  return connection_1d(
      [&](double s) {
        Angles b = a;
        b[d] = s;
        return field(b);
      },
      a[d], h, kind);
}

Matrix2c berry_curvature(const FrameField& field, const Angles& a, Direction mu, Direction nu, double h,
                         ConnectionKind kind) {
  if (mu == nu) return Matrix2c::Zero();
  const int m = static_cast<int>(mu), n = static_cast<int>(nu);
  auto shifted = [&](int d, double s) {
    Angles b = a;
    b[d] += s;
    return b;
  };
  const Matrix2c dmAn = (berry_connection(field, shifted(m, h), nu, h, kind) -
                         berry_connection(field, shifted(m, -h), nu, h, kind)) / (2.0 * h);
  const Matrix2c dnAm = (berry_connection(field, shifted(n, h), mu, h, kind) -
                         berry_connection(field, shifted(n, -h), mu, h, kind)) / (2.0 * h);
  const Matrix2c Am = berry_connection(field, a, mu, h, kind);
  const Matrix2c An = berry_connection(field, a, nu, h, kind);
  return dmAn - dnAm + I * (Am * An - An * Am);
}

CurvatureSet curvature_set(const FrameField& field, const Angles& a, double h, ConnectionKind kind) {
  CurvatureSet F;
  for (int m = 0; m < 4; ++m) {
    F[m][m] = Matrix2c::Zero();
    for (int n = m + 1; n < 4; ++n) {
      F[m][n] = berry_curvature(field, a, static_cast<Direction>(m), static_cast<Direction>(n), h, kind);
      F[n][m] = -F[m][n];
    }
  }
  return F;
}

cd chern_density_levi_civita(const CurvatureSet& F) {
  std::array<int, 4> p{0, 1, 2, 3};
  cd sum = 0.0;
  do {
    int inversions = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (p[i] > p[j]) ++inversions;
    const double sign = inversions % 2 ? -1.0 : 1.0;
    sum += sign * (F[p[0]][p[1]] * F[p[2]][p[3]]).trace();
  } while (std::next_permutation(p.begin(), p.end()));
  return sum / (32.0 * pi * pi);
}

cd chern_density_wedge(const CurvatureSet& F) {
  const cd s = (F[0][1] * F[2][3]).trace() - (F[0][2] * F[1][3]).trace() + (F[0][3] * F[1][2]).trace();
  return s / (4.0 * pi * pi);
}

cd chern_integrand_complex(const ProjectorField& P, const Angles& a, double h) {
  const Matrix4c p0 = P(a);
  std::array<Matrix4c, 4> dP;
  for (int d = 0; d < 4; ++d) {
    Angles up = a, dn = a;
    up[d] += h;
    dn[d] -= h;
    dP[d] = (P(up) - P(dn)) / (2.0 * h);
  }
  auto C = [&](int m, int n) -> Matrix4c { return dP[m] * dP[n] - dP[n] * dP[m]; };
  const Matrix4c pc01 = p0 * C(0, 1), pc23 = p0 * C(2, 3);
  const Matrix4c pc02 = p0 * C(0, 2), pc13 = p0 * C(1, 3);
  const Matrix4c pc03 = p0 * C(0, 3), pc12 = p0 * C(1, 2);
  const cd s = (pc01 * pc23).trace() - (pc02 * pc13).trace() + (pc03 * pc12).trace();
  return -s / (4.0 * pi * pi);
}

double chern_integrand(double R, double kappa, const Angles& a, double h) {
  const ParameterPoint p = point_at(R, kappa, a);
  if (2.0 * std::abs(lower_energy(p.q, kappa)) < 1e-6)
    throw Error(Errc::on_ehs, "integrand evaluated on the exceptional hypersphere");
  return chern_integrand_complex(model_lower_projector(R, kappa), a, h).real();
}

void QuadratureGrid::validate() const {
  if (n_theta1 < 8 || n_theta2 < 8 || n_phi1 < 8 || n_phi2 < 8)
    throw Error(Errc::invalid_argument, "quadrature counts must be >= 8");
  const auto sp = spacing();
  const double smallest = *std::min_element(sp.begin(), sp.end());
  if (!(fd_step > 0.0) || fd_step >= 0.5 * smallest)
    throw Error(Errc::invalid_argument, "fd_step must be positive and below half the grid spacing");
}

QuadratureGrid QuadratureGrid::doubled() const {
  QuadratureGrid g = *this;
  g.n_theta1 *= 2;
  g.n_theta2 *= 2;
  g.n_phi1 *= 2;
  g.n_phi2 *= 2;
  return g;
}

std::array<double, 4> QuadratureGrid::spacing() const {
  return {pi / n_theta1, 0.5 * pi / n_theta2, 2.0 * pi / n_phi1, 2.0 * pi / n_phi2};
}

Angles QuadratureGrid::node(int i1, int i2, int i3, int i4) const {
  const auto sp = spacing();
  return {(i1 + 0.5) * sp[0], (i2 + 0.5) * sp[1], (i3 + 0.5) * sp[2], (i4 + 0.5) * sp[3]};
}

namespace {

ChernResult integrate_once(const ProjectorField& P, const QuadratureGrid& g, const ChernOptions& opt) {
  g.validate();
  const auto sp = g.spacing();
  const double w = sp[0] * sp[1] * sp[2] * sp[3];
  const std::size_t per_slice = static_cast<std::size_t>(g.n_theta2) * g.n_phi1 * g.n_phi2;
  std::vector<cd> slice(g.n_theta1);
  std::vector<IntegrandSample> samples(opt.keep_samples ? per_slice * g.n_theta1 : 0);
  parallel_for(static_cast<std::size_t>(g.n_theta1), opt.threads, [&](std::size_t i1) {
    cd acc = 0.0;
    std::size_t k = 0;
    for (int i2 = 0; i2 < g.n_theta2; ++i2)
      for (int i3 = 0; i3 < g.n_phi1; ++i3)
        for (int i4 = 0; i4 < g.n_phi2; ++i4, ++k) {
          const Angles a = g.node(static_cast<int>(i1), i2, i3, i4);
          const cd v = chern_integrand_complex(P, a, g.fd_step);
          acc += v;
          if (opt.keep_samples) samples[i1 * per_slice + k] = IntegrandSample{a, v.real()};
        }
    slice[i1] = acc;
  });
  cd total = 0.0;
  for (const cd& s : slice) total += s;
  total *= w;
  ChernResult r;
  r.c2 = total.real();
  r.c2_imag = total.imag();
  r.defect = std::abs(r.c2 - std::round(r.c2));
  r.grid = g;
  r.samples = std::move(samples);
  return r;
}

}  // namespace

ChernResult integrate_chern(const ProjectorField& P, const QuadratureGrid& grid, const ChernOptions& opt) {
  QuadratureGrid g = grid;
  ChernResult r = integrate_once(P, g, opt);
  int level = 0;
  while (r.defect > opt.defect_target && level < opt.max_refinements) {
    g = g.doubled();
    ++level;
    r = integrate_once(P, g, opt);
  }
  r.refinements = level;
  if (r.defect > opt.fail_defect)
    throw Error(Errc::not_converged, "quantisation defect " + std::to_string(r.defect) + " after " +
                                         std::to_string(level) + " refinements");
  return r;
}

ChernResult second_chern(double R, double kappa, const QuadratureGrid& grid, const ChernOptions& opt) {
  if (std::abs(R - kappa) < 1e-3) throw Error(Errc::transition_point, "R is within 1e-3 of kappa");
  return integrate_chern(model_lower_projector(R, kappa), grid, opt);
}

FrameGrid gauge_fix(FrameGrid grid, const std::array<int, 4>& order) {
  const auto& dims = grid.dims;
  if (grid.frames.size() != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] * dims[3])
    throw Error(Errc::invalid_argument, "frame count does not match grid dimensions");
  std::array<int, 4> idx{};
  for (idx[order[0]] = 0; idx[order[0]] < dims[order[0]]; ++idx[order[0]])
    for (idx[order[1]] = 0; idx[order[1]] < dims[order[1]]; ++idx[order[1]])
      for (idx[order[2]] = 0; idx[order[2]] < dims[order[2]]; ++idx[order[2]])
        for (idx[order[3]] = 0; idx[order[3]] < dims[order[3]]; ++idx[order[3]]) {
          for (int k = 3; k >= 0; --k) {
            const int ax = order[k];
            if (idx[ax] == 0) continue;
            std::array<int, 4> prev = idx;
            --prev[ax];
            align_frame(grid.at(idx), grid.at(prev), 1e-8);
            break;
          }
        }
  return grid;
}

FrameGrid gauge_fix(const std::vector<EigenSystem>& systems, const std::array<int, 4>& dims,
                    const std::array<int, 4>& order) {
  FrameGrid g;
  g.dims = dims;
  g.frames.reserve(systems.size());
  for (const auto& s : systems) g.frames.push_back(s.minus);
  return gauge_fix(std::move(g), order);
}

CurvatureSet grid_curvature(const FrameGrid& grid, const std::array<double, 4>& h, const std::array<int, 4>& idx) {
  for (int d = 0; d < 4; ++d)
    if (idx[d] < 1 || idx[d] + 1 >= grid.dims[d])
      throw Error(Errc::invalid_argument, "grid_curvature needs an interior point");
  auto shift = [](std::array<int, 4> i, int d, int s) {
    i[d] += s;
    return i;
  };
  auto A = [&](const std::array<int, 4>& j, int m) -> Matrix2c {
    const Frame4x2 dR = (grid.at(shift(j, m, 1)).right - grid.at(shift(j, m, -1)).right) / (2.0 * h[m]);
    return -I * (grid.at(j).left.adjoint() * dR);
  };
  CurvatureSet F;
  for (int m = 0; m < 4; ++m) {
    F[m][m] = Matrix2c::Zero();
    for (int n = m + 1; n < 4; ++n) {
      const Matrix2c dmAn = (A(shift(idx, m, 1), n) - A(shift(idx, m, -1), n)) / (2.0 * h[m]);
      const Matrix2c dnAm = (A(shift(idx, n, 1), m) - A(shift(idx, n, -1), m)) / (2.0 * h[n]);
      const Matrix2c Am = A(idx, m), An = A(idx, n);
      F[m][n] = dmAn - dnAm + I * (Am * An - An * Am);
      F[n][m] = -F[m][n];
    }
  }
  return F;
}

}  // namespace ehs
