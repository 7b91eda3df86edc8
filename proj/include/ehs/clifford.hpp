#pragma once

#include <array>

#include "ehs/types.hpp"

namespace ehs {

struct DiracBasis {
  std::array<Matrix4c, 5> gamma;  // gamma[0] is Γ1
};

const DiracBasis& dirac_basis();

Vector5d spherical_to_cartesian(double R, double theta1, double theta2, double phi1, double phi2);
inline Vector5d spherical_to_cartesian(const Spherical& s) {
  return spherical_to_cartesian(s.R, s.theta1, s.theta2, s.phi1, s.phi2);
}

// q·Γ + iκΓ4
Matrix4c build_hamiltonian(const ParameterPoint& p);
Matrix4c build_hamiltonian(const Vector5d& q, double kappa);

// Parameters of the Möbius family: q = (x/√2, x/√2, 0, R cosθ1, 0), x = R sinθ1 + Δ.
Vector5d moebius_q(double R, double delta, double theta1);
Matrix4c build_moebius_hamiltonian(double R, double delta, double theta1, double kappa);

}  // namespace ehs
