#include "rtlr/sweep.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace rtlr {

Vector sweep(const DiscreteOperators& ops, const AngularQuadrature& quad,
             int angle, const Vector& rhs) {
  if (angle < 0 || angle >= quad.size())
    throw std::invalid_argument("sweep: angle index out of range");
  const SpatialMesh& mesh = ops.space.mesh;
  const int s = ops.space.dofs_per_cell();
  if (rhs.size() != ops.space.size())
    throw std::invalid_argument("sweep: rhs size mismatch");

  const double omx = quad.omega_x(angle);
  const double omy = quad.omega_y(angle);
  const bool x_up = omx >= 0.0;  // sweep towards +x
  const bool y_up = omy >= 0.0;

  const Matrix& ax = x_up ? ops.ax_minus : ops.ax_plus;
  const Matrix& ay = y_up ? ops.ay_minus : ops.ay_plus;
  const Matrix& bx = x_up ? ops.bx_minus : ops.bx_plus;
  const Matrix& by = y_up ? ops.by_minus : ops.by_plus;
  const int x_step = x_up ? 1 : -1;
  const int y_step = y_up ? 1 : -1;

  Vector psi(rhs.size());
  Matrix block(s, s);
  Vector local(s);
  Eigen::PartialPivLU<Matrix> lu(s);

  int b = y_up ? 0 : mesh.ny - 1;
  for (int jb = 0; jb < mesh.ny; ++jb, b += y_step) {
    int a = x_up ? 0 : mesh.nx - 1;
    for (int ja = 0; ja < mesh.nx; ++ja, a += x_step) {
      const int c = mesh.cell_index(a, b);
      local = rhs.segment(c * s, s);
      const int an = a - x_step;  // upwind neighbours, already solved
      const int bn = b - y_step;
      if (an >= 0 && an < mesh.nx)
        local.noalias() -= omx * (bx * psi.segment(mesh.cell_index(an, b) * s, s));
      if (bn >= 0 && bn < mesh.ny)
        local.noalias() -= omy * (by * psi.segment(mesh.cell_index(a, bn) * s, s));

      block = omx * ax + omy * ay + ops.sigma_t_blocks[c];
      lu.compute(block);
      double dmin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
      if (!(dmin > 1e-14 * block.cwiseAbs().maxCoeff()))
        throw std::runtime_error("sweep: singular local block");
      psi.segment(c * s, s) = lu.solve(local);
    }
  }
  return psi;
}

}  // namespace rtlr
