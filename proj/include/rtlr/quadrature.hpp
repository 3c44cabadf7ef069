#pragma once

#include <Eigen/Core>

#include "rtlr/linalg.hpp"

namespace rtlr {

/// Legendre polynomial P_n and its derivative, by three-term recurrence.
double legendre_value(int n, double x);
double legendre_derivative(int n, double x);

/// n-point Gauss-Legendre rule on [-1, 1]; weights sum to 2.
/// Nodes are Newton-refined roots of P_n (residual below 1e-15) and are
/// mirrored about the origin so the rule is symmetric to machine precision.
struct GaussLegendre {
  Vector nodes;
  Vector weights;
};
GaussLegendre gauss_legendre(int n);

/// Product Chebyshev-Legendre quadrature on the unit sphere with weights
/// normalized to sum to one.  Direction j = j_theta * n_omega_z + j_z pairs
/// the azimuthal node theta_{j_theta} = (2 j_theta + 1) pi / n_theta with the
/// polar Gauss-Legendre node z_{j_z}:
///   Omega_j = (cos(theta) sqrt(1 - z^2), sin(theta) sqrt(1 - z^2), z).
struct AngularQuadrature {
  int n_theta = 0;
  int n_omega_z = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3> directions;  // row j = Omega_j
  Vector weights;

  int size() const { return static_cast<int>(weights.size()); }
  double omega_x(int j) const { return directions(j, 0); }
  double omega_y(int j) const { return directions(j, 1); }
  double omega_z(int j) const { return directions(j, 2); }
};

AngularQuadrature build_cl_quadrature(int n_theta, int n_omega_z);

}  // namespace rtlr
