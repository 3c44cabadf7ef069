#pragma once

#include <functional>
#include <utility>

#include "rtlr/linalg.hpp"

namespace rtlr {

using ScalarField = std::function<double(double, double)>;

/// Uniform Cartesian mesh of an axis-aligned rectangle.
/// Cells are indexed (a, b) with a along x and b along y; the flat index is
/// b * nx + a.
struct SpatialMesh {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  int nx = 1, ny = 1;

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  int cell_count() const { return nx * ny; }
  int cell_index(int a, int b) const { return b * nx + a; }
  std::pair<int, int> cell_coords(int c) const { return {c % nx, c / nx}; }
  double x_left(int a) const { return x_min + a * dx(); }
  double y_bottom(int b) const { return y_min + b * dy(); }
  double x_center(int a) const { return x_min + (a + 0.5) * dx(); }
  double y_center(int b) const { return y_min + (b + 0.5) * dy(); }
};

SpatialMesh make_mesh(double x_min, double x_max, double y_min, double y_max,
                      int nx, int ny);

/// Discontinuous tensor-product Legendre space of degree K on a Cartesian
/// mesh.  The per-cell basis is orthonormal (cell mass matrix = identity);
/// DOFs are numbered cell-major with tensor index t = my * (K+1) + mx.
struct DGSpace {
  SpatialMesh mesh;
  int degree = 1;
  // K = 0 is accepted for debugging but does not preserve the diffusion
  // limit on under-resolved meshes.
  bool asymptotic_preserving = true;

  int dofs_per_cell() const { return (degree + 1) * (degree + 1); }
  int size() const { return mesh.cell_count() * dofs_per_cell(); }
  int dof_index(int cell, int tensor) const { return cell * dofs_per_cell() + tensor; }
  int tensor_index(int mx, int my) const { return my * (degree + 1) + mx; }

  /// Orthonormal 1D factor sqrt((2m+1)/h) P_m(xi) evaluated at physical x
  /// inside cell column a (analogous in y).
  double basis_1d_x(int m, int a, double x) const;
  double basis_1d_y(int m, int b, double y) const;
  double basis_value(int cell, int tensor, double x, double y) const;

  /// Cell average of a DG coefficient vector restricted to `cell`.
  double cell_mean(const Vector& coeffs, int cell) const;
};

DGSpace build_dg_space(const SpatialMesh& mesh, int degree);

}  // namespace rtlr
