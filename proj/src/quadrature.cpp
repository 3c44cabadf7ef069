#include "rtlr/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace rtlr {

double legendre_value(int n, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    double pk = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = pk;
  }
  return p;
}

double legendre_derivative(int n, double x) {
  if (n == 0) return 0.0;
  // (1-x^2) P_n' = n (P_{n-1} - x P_n); endpoints by the closed form.
  if (std::abs(1.0 - x * x) < 1e-14) {
    double sign = (x > 0.0 || n % 2 == 1) ? 1.0 : -1.0;
    return sign * 0.5 * n * (n + 1.0);
  }
  return n * (legendre_value(n - 1, x) - x * legendre_value(n, x)) / (1.0 - x * x);
}

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess for the i-th root (descending in x).
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p = legendre_value(n, x);
      double dp = legendre_derivative(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(p) < 1e-15 && std::abs(dx) < 1e-15) break;
    }
    double dp = legendre_derivative(n, x);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
  return rule;
}

AngularQuadrature build_cl_quadrature(int n_theta, int n_omega_z) {
  if (n_theta < 1 || n_omega_z < 1)
    throw std::invalid_argument("build_cl_quadrature: node counts must be positive");

  GaussLegendre gl = gauss_legendre(n_omega_z);

  AngularQuadrature quad;
  quad.n_theta = n_theta;
  quad.n_omega_z = n_omega_z;
  const int n = n_theta * n_omega_z;
  quad.directions.resize(n, 3);
  quad.weights.resize(n);

  const double w_theta = 1.0 / n_theta;
  for (int j1 = 0; j1 < n_theta; ++j1) {
    double theta = (2.0 * j1 + 1.0) * M_PI / n_theta;
    double c = std::cos(theta), s = std::sin(theta);
    for (int j2 = 0; j2 < n_omega_z; ++j2) {
      double z = gl.nodes[j2];
      double rho = std::sqrt(1.0 - z * z);
      int j = j1 * n_omega_z + j2;
      quad.directions(j, 0) = c * rho;
      quad.directions(j, 1) = s * rho;
      quad.directions(j, 2) = z;
      quad.weights[j] = w_theta * (0.5 * gl.weights[j2]);
    }
  }
  return quad;
}

}  // namespace rtlr
