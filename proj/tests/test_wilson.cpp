#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"
#include "ehs/wilson.hpp"

using namespace ehs;

TEST_CASE("RK4 transport of a constant connection is the matrix exponential") {
  Matrix2c a;
  a << 0.3, cd(0.1, -0.2), cd(0.1, 0.2), -0.7;
  const Connection1d A = [a](double) { return a; };
  const Matrix2c want = static_cast<Matrix2c>(I * 2.0 * a).exp();
  CHECK((transport_rk4(A, 0.0, 2.0, 400) - want).norm() < 1e-10);
  const HolonomyResult h = path_ordered_exponential(A, 0.0, 2.0, 8);
  CHECK((h.u - want).norm() < 1e-8);
  CHECK(std::abs(h.w - want.trace()) < 1e-8);
}

TEST_CASE("observed order of the integrator is four") {
  const Connection1d A = [](double s) {
    Matrix2c a;
    a << std::cos(s), std::exp(I * 2.0 * s), std::exp(-I * 2.0 * s), std::sin(3.0 * s);
    return a;
  };
  const double p = observed_order(A, 0.0, 2.0 * pi, 64);
  CHECK(p > 3.5);
  CHECK(p < 4.5);
}

TEST_CASE("slice frame diagonalises the slice Hamiltonian") {
  for (double t2 : {0.0, 0.4, 1.2}) {
    const double R = 2.0, kappa = 1.0, phi1 = 0.7;
    const Matrix4c H = build_hamiltonian(spherical_to_cartesian(R, pi / 2, t2, phi1, 0.0), kappa);
    const BandFrame f = slice_frame(R, kappa, t2, phi1);
    const cd e = lower_energy(spherical_to_cartesian(R, pi / 2, t2, phi1, 0.0), kappa);
    CHECK((H * f.right - e * f.right).norm() < 1e-12);
    CHECK((f.right.adjoint() * f.right - Matrix2c::Identity()).norm() < 1e-12);
  }
  CHECK(slice_norm2(2.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("numeric slice connection matches the closed form") {
  const double N2 = slice_norm2(2.0, 1.0);
  LoopSpec loop;
  for (double t2 : {0.0, 0.3, pi / 4, 1.4}) {
    loop.theta2 = t2;
    const Connection1d A = loop_connection(loop, ConnectionKind::hermitian);
    for (double p : {0.0, 1.0, 4.0}) CHECK((A(p) - connection_slice_closed_form(t2, p, N2)).norm() < 1e-8);
  }
}

TEST_CASE("slice Wilson loop") {
  std::vector<double> grid;
  for (int k = 0; k < 50; ++k) grid.push_back(0.5 * pi * k / 49.0);
  const auto rows = wilson_scan(2.0, 1.0, grid);
  const double N2 = slice_norm2(2.0, 1.0);
  for (const auto& r : rows) {
    CHECK((r.u - holonomy_closed_form(r.theta2, N2)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((r.u.adjoint() * r.u - Matrix2c::Identity()).norm() < 1e-6);
  }
  CHECK(std::abs(rows.front().w - cd(-2.0)) < 1e-3);
  CHECK(std::abs(rows.back().w - cd(2.0)) < 1e-3);
  CHECK_THROWS_AS(wilson_scan(1.0, 1.0, grid), Error);
}

TEST_CASE("minimal Wilson loop versus radius") {
  const auto rows = min_wilson_vs_radius(1.0, {0.5, 1.5, 2.0, 4.0}, 41);
  CHECK(rows[0].min_re_w > -1.0);
  for (int k = 1; k < 4; ++k) CHECK(rows[k].min_re_w == doctest::Approx(-2.0).epsilon(0.005));
}

TEST_CASE("Möbius loop") {
  CHECK(std::abs(moebius_wilson(1.0, 0.5, 1.0) - cd(-2.0)) < 0.01);
  CHECK(std::abs(moebius_wilson(1.0, 3.0, 1.0) - cd(2.0)) < 0.01);
  CHECK(track_branches(moebius_loop(1.0, 0.5, 1.0, 2048)).swapped);
  CHECK(!track_branches(moebius_loop(1.0, 3.0, 1.0, 2048)).swapped);
  CHECK(std::abs(locate_moebius_transition(1.0, 1.0, 1.5, 2.5) - 2.0) < 1e-3);
}

TEST_CASE("transport expectations") {
  const TransportSeries flat = transport_expectations(2.0, 1.0, 0.0, 0);
  const TransportSeries mid = transport_expectations(2.0, 1.0, pi / 4, 0);
  for (double s : flat.s2) CHECK(std::abs(s - 1.0) < 1e-6);
  // at θ2 = 0 the connection is diagonal: σz is conserved
  for (double s : flat.sz) CHECK(std::abs(s - 1.0) < 1e-6);
  // at θ2 = π/4 the off-diagonal part rotates the pseudospin
  double min_sz = 1.0;
  for (double s : mid.sz) min_sz = std::min(min_sz, s);
  CHECK(min_sz < 0.5);
  CHECK(mid.phi.size() == 401);
  CHECK_THROWS_AS(transport_expectations(0.5, 1.0, 0.0, 0), Error);
  CHECK_THROWS_AS(transport_expectations(2.0, 1.0, 0.0, 2), Error);
}

TEST_CASE("loop validation") {
  LoopSpec loop;
  loop.steps = 16;
  CHECK_THROWS_AS(holonomy(loop), Error);
}
