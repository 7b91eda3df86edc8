#include "doctest.h"

#include <random>

#include <Eigen/Eigenvalues>

#include "ehs/clifford.hpp"
#include "ehs/error.hpp"
#include "ehs/spectral.hpp"

using namespace ehs;

namespace {

ParameterPoint random_point(std::mt19937_64& rng, double kappa) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Spherical s{0.1 + 3.9 * u(rng), pi * u(rng), 2.0 * pi * u(rng), 2.0 * pi * u(rng), 2.0 * pi * u(rng)};
  return ParameterPoint::from_spherical(s, kappa);
}

}  // namespace

TEST_CASE("closed-form eigenvalues") {
  auto e = eigenvalues_closed_form(1.0, 1.0, pi / 2);
  CHECK(std::abs(e.first) < 1e-7);
  e = eigenvalues_closed_form(2.0, 1.0, pi / 2);
  CHECK(e.first.real() == doctest::Approx(std::sqrt(3.0)));
  CHECK(std::abs(e.first.imag()) < 1e-15);
  e = eigenvalues_closed_form(0.5, 1.0, pi / 2);
  CHECK(std::abs(e.first.real()) < 1e-15);
  CHECK(std::abs(e.first.imag()) == doctest::Approx(std::sqrt(0.75)));
  CHECK(e.second == -e.first);
}

TEST_CASE("lower branch rule") {
  CHECK(lower_branch(cd(-1.0, 0.3)));
  CHECK_FALSE(lower_branch(cd(1.0, -0.3)));
  CHECK(lower_branch(cd(0.0, -1.0)));   // Re d² < 0: decided by Im
  CHECK_FALSE(lower_branch(cd(0.0, 1.0)));
}

TEST_CASE("numeric eigenvalues match the closed form on random points") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const ParameterPoint p = random_point(rng, 1.0);
    Eigen::ComplexEigenSolver<Matrix4c> es(build_hamiltonian(p), false);
    const auto e = eigenvalues_closed_form(p.spherical->R, 1.0, p.spherical->theta1);
    for (int i = 0; i < 4; ++i) {
      const cd v = es.eigenvalues()(i);
      const double d = std::min(std::abs(v - e.first), std::abs(v - e.second));
      CHECK(d < 1e-9);
    }
  }
}

TEST_CASE("eigensystem is biorthogonal and complete") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const ParameterPoint p = random_point(rng, k % 2 ? 1.0 : 0.0);
    const Matrix4c H = build_hamiltonian(p);
    EigenSystem s;
    try {
      s = eigensystem(H);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ep_too_close);
      continue;
    }
    CHECK(std::abs(s.e_plus + s.e_minus) < 1e-9);
    CHECK((H * s.minus.right - s.e_minus * s.minus.right).norm() < 1e-9);
    CHECK((H * s.plus.right - s.e_plus * s.plus.right).norm() < 1e-9);
    CHECK((s.minus.left.adjoint() * s.minus.right - Matrix2c::Identity()).norm() < 1e-9);
    CHECK((s.plus.left.adjoint() * s.minus.right).norm() < 1e-9);
    CHECK((s.minus.projector() + s.plus.projector() - Matrix4c::Identity()).norm() < 1e-8);
    // left vectors are left eigenvectors
    CHECK((s.minus.left.adjoint() * H - s.e_minus * s.minus.left.adjoint()).norm() < 1e-9);
    // lower band follows the branch rule
    CHECK(lower_branch(s.e_minus));
    CHECK(std::abs(s.e_minus - lower_energy(p.q, p.kappa)) < 1e-9);
  }
}

TEST_CASE("eigensystem trivial cases and errors") {
  const auto& g = dirac_basis().gamma;
  EigenSystem s = eigensystem(g[3]);
  CHECK(std::abs(s.e_plus - 1.0) < 1e-14);
  CHECK(std::abs(s.e_minus + 1.0) < 1e-14);
  // lower band of Γ4 is spanned by e2, e4
  Matrix4c P = Matrix4c::Zero();
  P(1, 1) = P(3, 3) = 1.0;
  CHECK((s.minus.projector() - P).norm() < 1e-14);
  s = eigensystem(I * g[3]);
  CHECK(std::abs(s.e_plus - I) < 1e-14);
  CHECK(std::abs(s.e_minus + I) < 1e-14);

  Vector5d q = Vector5d::Zero();
  q(0) = 1.0;
  CHECK_THROWS_AS(eigensystem(build_hamiltonian(q, 1.0)), Error);
  Matrix4c generic = Matrix4c::Zero();
  generic.diagonal() << 1.0, 2.0, 3.0, 4.0;
  try {
    eigensystem(generic);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_degenerate);
  }
}

TEST_CASE("numeric projector matches the closed form vectors") {
  const ParameterPoint p = ParameterPoint::from_spherical({2.0, pi / 4, pi / 5, 0.3, 1.1}, 1.0);
  const Matrix4c H = build_hamiltonian(p);
  const EigenSystem s = eigensystem(H);
  const ClosedFormVectors c = right_eigenvectors_closed_form(p);
  CHECK((s.minus.projector() - c.minus.projector()).norm() < 1e-10);
  CHECK((s.plus.projector() - c.plus.projector()).norm() < 1e-10);
  CHECK((s.minus.projector() - lower_projector(p.q, p.kappa)).norm() < 1e-10);
}

TEST_CASE("closed-form vectors: residuals, pairing and the theta2 = 0 pattern") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 1000; ++k) {
    const ParameterPoint p = random_point(rng, 1.0);
    ClosedFormVectors c;
    try {
      c = right_eigenvectors_closed_form(p);
    } catch (const Error&) {
      continue;
    }
    const Matrix4c H = build_hamiltonian(p);
    CHECK((H * c.plus.right - c.e_plus * c.plus.right).norm() < 1e-10);
    CHECK((H * c.minus.right - c.e_minus * c.minus.right).norm() < 1e-10);
    CHECK((c.plus.left.adjoint() * c.plus.right - Matrix2c::Identity()).norm() < 1e-9);
    CHECK((c.plus.left.adjoint() * c.minus.right).norm() < 1e-9);
    // N² = 2E(E − q4 − iκ) with the same branch as E
    const cd a = c.e_plus - p.q(3) - I * p.kappa;
    CHECK(std::abs(c.n_plus * c.n_plus - 2.0 * c.e_plus * a) < 1e-9 * std::max(1.0, std::abs(c.n_plus * c.n_plus)));
  }
  const ParameterPoint p = ParameterPoint::from_spherical({2.0, 0.7, 0.0, 0.0, 0.0}, 1.0);
  const ClosedFormVectors c = right_eigenvectors_closed_form(p);
  // α column: third entry vanishes identically, fourth carries q1 - iq5 = 0 at θ2 = 0
  CHECK(std::abs(c.plus.right(2, 0)) == 0.0);
  CHECK(std::abs(c.plus.right(3, 0)) < 1e-15);
  CHECK_THROWS_AS(right_eigenvectors_closed_form(ParameterPoint::from_spherical({2.0, 0.0, 0.3, 0.1, 0.2}, 1.0)),
                  Error);
}

TEST_CASE("exceptional point detection") {
  Vector5d q = Vector5d::Zero();
  q(0) = 1.0;
  CHECK(detect_ep(ParameterPoint::cartesian(q, 1.0)).is_ep);
  q = Vector5d::Zero();
  q(3) = 1.0;
  CHECK_FALSE(detect_ep(ParameterPoint::cartesian(q, 1.0)).is_ep);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Vector5d v;
    for (int i = 0; i < 5; ++i) v(i) = n(rng);
    v(3) = 0.0;
    v.normalize();
    const EpReport r = detect_ep(ParameterPoint::cartesian(v, 1.0));
    CHECK(r.gap < 1e-7);
    CHECK(r.coalescence < 1e-6);
    CHECK(r.is_ep);
    const EpReport off = detect_ep(ParameterPoint::cartesian(1.5 * v, 1.0));
    CHECK_FALSE(off.is_ep);
  }
}

TEST_CASE("branch tracking on the Möbius family") {
  CHECK(track_branches(moebius_loop(1.0, 0.5, 1.0, 2048)).swapped);
  CHECK_FALSE(track_branches(moebius_loop(1.0, 3.0, 1.0, 2048)).swapped);
  // two cycles close the permutation
  CHECK_FALSE(track_branches(moebius_loop(1.0, 0.5, 1.0, 2048, 2)).swapped);
  std::vector<ParameterPoint> constant(10, ParameterPoint::cartesian(Vector5d::Constant(0.3), 1.0));
  CHECK_FALSE(track_branches(constant).swapped);
  try {
    track_branches(moebius_loop(1.0, 0.5, 1.0, 4));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ambiguous_continuation);
  }
}

TEST_CASE("frame alignment") {
  const ParameterPoint p = ParameterPoint::from_spherical({2.0, 1.0, 0.4, 0.2, 0.9}, 1.0);
  const EigenSystem s = eigensystem(build_hamiltonian(p));
  BandFrame f = s.minus;
  Matrix2c g;
  g << std::exp(I * 0.3), 0.2, -0.1, std::exp(-I * 0.7) * 1.3;
  f.right = f.right * g;
  f.left = f.left * g.inverse().adjoint();
  align_frame(f, s.minus);
  const Matrix2c o = s.minus.left.adjoint() * f.right;
  CHECK((o - o.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(0.5 * (o + o.adjoint()));
  CHECK(es.eigenvalues()(0) > 0.0);
  CHECK((f.projector() - s.minus.projector()).norm() < 1e-12);
}

TEST_CASE("spectrum scans") {
  PlaneSpec plane;
  plane.axes = {0, 1};
  plane.n = 81;
  const auto rows = spectrum_scan(plane, 1.0, 1);
  const double h = (plane.hi - plane.lo) / (plane.n - 1);
  // the gap closes on the unit ring only
  for (const auto& r : rows) {
    const double rho = std::hypot(r.q(0), r.q(1));
    if (r.gap < 1e-3) CHECK(std::abs(rho - 1.0) < h);
    if (std::abs(rho - 1.0) > 2 * h) CHECK(r.gap > 1e-3);
  }
  const auto rows2 = spectrum_scan(plane, 1.0, 3);
  bool same = true;
  for (std::size_t k = 0; k < rows.size(); ++k) same = same && rows[k].e_minus == rows2[k].e_minus;
  CHECK(same);

  plane.axes = {0, 1, 2};
  plane.n = 21;
  for (const auto& r : spectrum_scan(plane, 0.0))
    if (r.gap < 1e-12) CHECK(r.q.norm() < 1e-12);
}
