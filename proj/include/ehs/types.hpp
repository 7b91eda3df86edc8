#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace ehs {

typedef std::complex<double> cd;
typedef Eigen::Matrix<cd, 4, 4> Matrix4c;
typedef Eigen::Matrix<cd, 4, 1> Vector4c;
typedef Eigen::Matrix<cd, 2, 2> Matrix2c;
typedef Eigen::Matrix<cd, 2, 1> Vector2c;
typedef Eigen::Matrix<cd, 4, 2> Frame4x2;
typedef Eigen::Matrix<double, 5, 1> Vector5d;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cd I{0.0, 1.0};

struct Spherical {
  double R = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

// Cartesian q is authoritative; the spherical tuple is optional metadata.
struct ParameterPoint {
  Vector5d q = Vector5d::Zero();
  double kappa = 0.0;
  std::optional<Spherical> spherical;

  static ParameterPoint cartesian(const Vector5d& q, double kappa);
  static ParameterPoint from_spherical(const Spherical& s, double kappa);
};

}  // namespace ehs
