#include "ehs/clifford.hpp"

#include <cmath>

namespace ehs {

ParameterPoint ParameterPoint::cartesian(const Vector5d& q, double kappa) {
  ParameterPoint p;
  p.q = q;
  p.kappa = kappa;
  return p;
}

ParameterPoint ParameterPoint::from_spherical(const Spherical& s, double kappa) {
  ParameterPoint p;
  p.q = spherical_to_cartesian(s);
  p.kappa = kappa;
  p.spherical = s;
  return p;
}

namespace {

DiracBasis make_basis() {
  DiracBasis b;
  const cd o = 1.0, z = 0.0, i = I;
  b.gamma[0] << z, z, z, -o,
                z, z, o, z,
                z, o, z, z,
                -o, z, z, z;
  b.gamma[1] << z, o, z, z,
                o, z, z, z,
                z, z, z, o,
                z, z, o, z;
  b.gamma[2] << z, i, z, z,
                -i, z, z, z,
                z, z, z, -i,
                z, z, i, z;
  b.gamma[3] << o, z, z, z,
                z, -o, z, z,
                z, z, o, z,
                z, z, z, -o;
  b.gamma[4] << z, z, z, -i,
                z, z, i, z,
                z, -i, z, z,
                i, z, z, z;
  return b;
}

}  // namespace

const DiracBasis& dirac_basis() {
  static const DiracBasis basis = make_basis();
  return basis;
}

Vector5d spherical_to_cartesian(double R, double theta1, double theta2, double phi1, double phi2) {
  const double s1 = std::sin(theta1), c1 = std::cos(theta1);
  const double s2 = std::sin(theta2), c2 = std::cos(theta2);
  Vector5d q;
  q << R * s1 * s2 * std::cos(phi2),
       R * s1 * c2 * std::cos(phi1),
       R * s1 * c2 * std::sin(phi1),
       R * c1,
       R * s1 * s2 * std::sin(phi2);
  return q;
}

Matrix4c build_hamiltonian(const Vector5d& q, double kappa) {
  const auto& g = dirac_basis().gamma;
  Matrix4c h = Matrix4c::Zero();
  for (int k = 0; k < 5; ++k) h += q(k) * g[k];
  h += I * kappa * g[3];
  return h;
}

Matrix4c build_hamiltonian(const ParameterPoint& p) { return build_hamiltonian(p.q, p.kappa); }

Vector5d moebius_q(double R, double delta, double theta1) {
  const double x = (R * std::sin(theta1) + delta) / std::sqrt(2.0);
  Vector5d q;
  q << x, x, 0.0, R * std::cos(theta1), 0.0;
  return q;
}

// Written out entry-wise rather than through build_hamiltonian so the two
// constructions can be checked against each other.
Matrix4c build_moebius_hamiltonian(double R, double delta, double theta1, double kappa) {
  const double x = (R * std::sin(theta1) + delta) / std::sqrt(2.0);
  const cd d = R * std::cos(theta1) + I * kappa;
  const cd z = 0.0;
  Matrix4c h;
  h << d, x, z, -x,
       x, -d, x, z,
       z, x, d, x,
       -x, z, x, -d;
  return h;
}

}  // namespace ehs
