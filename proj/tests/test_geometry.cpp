#include "doctest.h"

#include <random>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"
#include "ehs/geometry.hpp"

using namespace ehs;

namespace {

Angles random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {0.2 + 2.7 * u(rng), 0.1 + 1.3 * u(rng), 2.0 * pi * u(rng), 2.0 * pi * u(rng)};
}

// Analytic φ1 derivative of the closed-form lower frame: only q2 - iq3 = R s1 c2 e^{-iφ1} depends on φ1.
Matrix2c analytic_a_phi1(double R, double kappa, const Angles& a) {
  const ParameterPoint p = point_at(R, kappa, a);
  const ClosedFormVectors cf = right_eigenvectors_closed_form(p);
  const bool plus_is_lower = lower_branch(cf.e_plus);
  const BandFrame f = plus_is_lower ? cf.plus : cf.minus;
  const cd e = plus_is_lower ? cf.e_plus : cf.e_minus;
  const cd n = plus_is_lower ? cf.n_plus : cf.n_minus;
  const Vector5d& q = p.q;
  const double rho = std::sqrt(q(0) * q(0) + q(1) * q(1) + q(2) * q(2) + q(4) * q(4));
  const cd amp = e - q(3) - I * kappa;
  const cd u23(q(1), -q(2));
  Frame4x2 dR = Frame4x2::Zero();
  dR(1, 0) = amp * (-I * u23) / rho / n;
  dR(3, 1) = amp * std::conj(-I * u23) / rho / n;
  return -I * (f.left.adjoint() * dR);
}

// A smooth 2x2 gauge transformation over the angles.
Matrix2c gauge(const Angles& a) {
  Matrix2c g;
  g << std::exp(I * (0.3 * a[0] + std::sin(a[2]))), 0.2 * std::cos(a[1] + a[3]),
      -0.1 * std::sin(a[0] - a[2]), std::exp(-I * (0.5 * a[3])) * (1.2 + 0.1 * std::cos(a[1]));
  return g;
}

FrameField gauged(const FrameField& f) {
  return [f](const Angles& a) {
    BandFrame b = f(a);
    const Matrix2c g = gauge(a);
    b.right = b.right * g;
    b.left = b.left * g.inverse().adjoint();
    return b;
  };
}

}  // namespace

TEST_CASE("finite-difference connection matches the analytic derivative") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const Angles a = random_angles(rng);
    const Matrix2c fd = berry_connection(closed_form_lower_field(2.0, 1.0), a, Direction::phi1, 1e-4);
    const Matrix2c an = analytic_a_phi1(2.0, 1.0, a);
    CHECK((fd - an).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("Hermitian limit and non-Abelian witness") {
  std::mt19937_64 rng(22);
  for (double kappa : {0.0, 1.0}) {
    double comm = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Angles a = random_angles(rng);
      const FrameField f = closed_form_lower_field(2.0, kappa);
      const Matrix2c at2 = berry_connection(f, a, Direction::theta2);
      const Matrix2c ap1 = berry_connection(f, a, Direction::phi1);
      if (kappa == 0.0) {
        CHECK((at2 - at2.adjoint()).norm() < 1e-8);
        CHECK((ap1 - ap1.adjoint()).norm() < 1e-8);
      }
      comm = std::max(comm, (at2 * ap1 - ap1 * at2).norm());
    }
    CHECK(comm > 1e-3);
  }
}

TEST_CASE("connection transforms covariantly") {
  const Angles a{1.1, 0.6, 0.4, 2.0};
  const FrameField f = closed_form_lower_field(2.0, 1.0);
  const FrameField fg = gauged(f);
  for (int d = 0; d < 4; ++d) {
    const Direction dir = static_cast<Direction>(d);
    const Matrix2c A = berry_connection(f, a, dir);
    const Matrix2c Ag = berry_connection(fg, a, dir);
    Angles up = a, dn = a;
    up[d] += 1e-5;
    dn[d] -= 1e-5;
    const Matrix2c dg = (gauge(up) - gauge(dn)) / 2e-5;
    const Matrix2c g = gauge(a);
    const Matrix2c want = g.inverse() * A * g - I * g.inverse() * dg;
    CHECK((Ag - want).norm() < 1e-6);
  }
}

TEST_CASE("curvature antisymmetry, gauge invariance and the two density forms") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 5; ++k) {
    const Angles a = random_angles(rng);
    const FrameField f = closed_form_lower_field(2.0, 1.0);
    const CurvatureSet F = curvature_set(f, a);
    const CurvatureSet Fg = curvature_set(gauged(f), a);
    for (int m = 0; m < 4; ++m) {
      CHECK(F[m][m].norm() == 0.0);
      for (int n = 0; n < 4; ++n) {
        CHECK((F[m][n] + F[n][m]).norm() == 0.0);
        for (int l = 0; l < 4; ++l)
          for (int x = 0; x < 4; ++x)
            CHECK(std::abs((F[m][n] * F[l][x]).trace() - (Fg[m][n] * Fg[l][x]).trace()) < 1e-6);
      }
    }
    const cd lc = chern_density_levi_civita(F);
    const cd wd = chern_density_wedge(F);
    CHECK(std::abs(lc - wd) < 1e-8);
    // gauge-free projector route vs the connection route
    const cd pj = chern_integrand_complex(model_lower_projector(2.0, 1.0), a, 1e-4);
    CHECK(std::abs(pj - lc) < 1e-5 * std::max(1.0, std::abs(lc)));
    CHECK(std::abs(chern_integrand(2.0, 1.0, a) - pj.real()) < 1e-12);
  }
  // pole of the coordinates
  CHECK(std::abs(chern_integrand(2.0, 1.0, {1e-3, 0.5, 0.3, 0.2})) < 1e-2);
}

TEST_CASE("connection errors") {
  const FrameField bad = [](const Angles& a) {
    BandFrame b = closed_form_lower_field(2.0, 1.0)(a);
    b.left *= 1.5;
    return b;
  };
  try {
    berry_connection(bad, {1.0, 0.5, 0.2, 0.1}, Direction::phi1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::frame_mismatch);
  }
  CHECK_THROWS_AS(chern_integrand(1.0, 1.0, {pi / 2, 0.3, 0.2, 0.1}), Error);
}

TEST_CASE("second Chern number") {
  const QuadratureGrid g;
  const ChernResult r2 = second_chern(2.0, 1.0, g);
  CHECK(r2.c2 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(r2.c2_imag) < 1e-6);
  CHECK(std::abs(second_chern(0.5, 1.0, g).c2) < 0.02);
  CHECK(std::abs(second_chern(4.0, 1.0, g).c2 - 1.0) < 0.02);
  CHECK(std::abs(second_chern(0.25, 1.0, g).c2) < 0.02);
  CHECK(std::abs(second_chern(1.0, 0.0, g).c2 - 1.0) < 0.02);
  try {
    second_chern(1.0005, 1.0, g);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::transition_point);
  }
  QuadratureGrid bad = g;
  bad.n_phi1 = 4;
  CHECK_THROWS_AS(second_chern(2.0, 1.0, bad), Error);
  // [0, π] in θ2 would double count; the grid nodes stay inside [0, π/2]
  CHECK(g.node(0, g.n_theta2 - 1, 0, 0)[1] < pi / 2);
}

TEST_CASE("Hermitian monopole by brute-force connection integration") {
  // Independent route: closed-form frames, finite-difference connection and
  // curvature, Levi-Civita contraction, coarse midpoint sum.
  const int n = 10;
  const FrameField f = closed_form_lower_field(1.0, 0.0);
  const double h1 = pi / n, h2 = 0.5 * pi / n, h3 = 2.0 * pi / n;
  cd sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const Angles a{(i + 0.5) * h1, (j + 0.5) * h2, (k + 0.5) * h3, (l + 0.5) * h3};
          sum += chern_density_levi_civita(curvature_set(f, a, 1e-4));
        }
  sum *= h1 * h2 * h3 * h3;
  CHECK(std::abs(sum.real() - 1.0) < 0.02);
}

TEST_CASE("gauge fixing on a grid") {
  // constant Hamiltonian: all frames end up equal
  const Vector5d q = (Vector5d() << 0.3, -0.2, 0.5, 0.4, 0.1).finished();
  const EigenSystem s0 = eigensystem(build_hamiltonian(q, 1.0));
  std::vector<EigenSystem> constant(16, s0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (auto& s : constant) {
    Matrix2c w;
    const double t = u(rng), p = u(rng);
    w << std::cos(t), -std::sin(t) * std::exp(I * p), std::sin(t), std::cos(t) * std::exp(I * p);
    s.minus.right = s.minus.right * w;
    s.minus.left = s.minus.left * w;
  }
  const FrameGrid fixed = gauge_fix(constant, {2, 2, 2, 2});
  for (const auto& f : fixed.frames) CHECK((f.right - fixed.frames[0].right).norm() < 1e-10);
  const FrameGrid again = gauge_fix(fixed);
  for (std::size_t k = 0; k < fixed.frames.size(); ++k)
    CHECK((again.frames[k].right - fixed.frames[k].right).norm() < 1e-12);

  // small grid around a generic point, scrambled gauges, two sweep orders
  const Angles c{1.0, 0.6, 0.8, 1.9};
  const double h = 2e-3;
  std::vector<EigenSystem> sys;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const Angles a{c[0] + (i - 1) * h, c[1] + (j - 1) * h, c[2] + (k - 1) * h, c[3] + (l - 1) * h};
          EigenSystem s = eigensystem(build_hamiltonian(point_at(2.0, 1.0, a)));
          Matrix2c w;
          const double t = u(rng), p = u(rng);
          w << std::cos(t), -std::sin(t) * std::exp(I * p), std::sin(t), std::cos(t) * std::exp(I * p);
          s.minus.right = s.minus.right * w;
          s.minus.left = s.minus.left * w;
          sys.push_back(s);
        }
  const std::array<double, 4> sp{h, h, h, h};
  const cd d1 = chern_density_levi_civita(grid_curvature(gauge_fix(sys, {3, 3, 3, 3}, {0, 1, 2, 3}), sp, {1, 1, 1, 1}));
  const cd d2 = chern_density_levi_civita(grid_curvature(gauge_fix(sys, {3, 3, 3, 3}, {3, 1, 0, 2}), sp, {1, 1, 1, 1}));
  const double ref = chern_integrand(2.0, 1.0, c, 1e-4);
  CHECK(std::abs(d1 - d2) < 1e-6 * std::max(1.0, std::abs(ref)));
  CHECK(std::abs(d1.real() - ref) < 1e-4 * std::max(1.0, std::abs(ref)));
}
