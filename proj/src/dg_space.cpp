#include "rtlr/dg_space.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "rtlr/quadrature.hpp"

namespace rtlr {

SpatialMesh make_mesh(double x_min, double x_max, double y_min, double y_max,
                      int nx, int ny) {
  if (!(x_min < x_max) || !(y_min < y_max))
    throw std::invalid_argument("make_mesh: empty domain");
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("make_mesh: cell counts must be positive");
  return SpatialMesh{x_min, x_max, y_min, y_max, nx, ny};
}

double DGSpace::basis_1d_x(int m, int a, double x) const {
  double h = mesh.dx();
  double xi = 2.0 * (x - mesh.x_center(a)) / h;
  return std::sqrt((2.0 * m + 1.0) / h) * legendre_value(m, xi);
}

double DGSpace::basis_1d_y(int m, int b, double y) const {
  double h = mesh.dy();
  double eta = 2.0 * (y - mesh.y_center(b)) / h;
  return std::sqrt((2.0 * m + 1.0) / h) * legendre_value(m, eta);
}

double DGSpace::basis_value(int cell, int tensor, double x, double y) const {
  auto [a, b] = mesh.cell_coords(cell);
  int mx = tensor % (degree + 1);
  int my = tensor / (degree + 1);
  return basis_1d_x(mx, a, x) * basis_1d_y(my, b, y);
}

double DGSpace::cell_mean(const Vector& coeffs, int cell) const {
  // The constant basis function has value 1/sqrt(dx*dy).
  return coeffs[dof_index(cell, 0)] / std::sqrt(mesh.dx() * mesh.dy());
}

DGSpace build_dg_space(const SpatialMesh& mesh, int degree) {
  if (degree < 0) throw std::invalid_argument("build_dg_space: negative degree");
  DGSpace space;
  space.mesh = mesh;
  space.degree = degree;
  space.asymptotic_preserving = degree >= 1;
  if (degree == 0)
    std::cerr << "warning: K = 0 DG space does not preserve the diffusion limit\n";
  return space;
}

}  // namespace rtlr
