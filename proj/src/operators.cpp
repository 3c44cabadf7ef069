#include "rtlr/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace rtlr {

namespace {

// Exact integral of phi_m' phi_n over one cell:
//   sqrt((2m+1)(2n+1))/h * int_{-1}^{1} P_m' P_n dxi,
// where the reference integral is 2 when m > n and m - n is odd, else 0.
Matrix derivative_matrix_1d(int degree, double h) {
  int n = degree + 1;
  Matrix d = Matrix::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l)
      if (m > l && (m - l) % 2 == 1)
        d(m, l) = 2.0 * std::sqrt((2.0 * m + 1.0) * (2.0 * l + 1.0)) / h;
  return d;
}

// Interior traces of the orthonormal 1D factors at the cell edges.
Vector trace_right_1d(int degree, double h) {
  Vector t(degree + 1);
  for (int m = 0; m <= degree; ++m) t[m] = std::sqrt((2.0 * m + 1.0) / h);
  return t;
}

Vector trace_left_1d(int degree, double h) {
  Vector t = trace_right_1d(degree, h);
  for (int m = 0; m <= degree; ++m)
    if (m % 2 == 1) t[m] = -t[m];
  return t;
}

struct StreamingBlocks {
  Matrix a_minus, a_plus;  // diagonal blocks of D_*^-/D_*^+
  Matrix b_minus, b_plus;  // upwind neighbour couplings
};

// One-dimensional building blocks of the upwind streaming matrices:
//   D^-: diag = -V + trR trR^T,  sub-diagonal  = -trL trR^T
//   D^+: diag = -V - trL trL^T,  super-diagonal = +trR trL^T
// (V the derivative-on-test matrix; outflow faces at both domain boundaries
// are included, inflow enters through the boundary vector).
StreamingBlocks streaming_blocks_1d(int degree, double h) {
  Matrix v = derivative_matrix_1d(degree, h);
  Vector tr = trace_right_1d(degree, h);
  Vector tl = trace_left_1d(degree, h);
  StreamingBlocks blk;
  blk.a_minus = -v + tr * tr.transpose();
  blk.a_plus = -v - tl * tl.transpose();
  blk.b_minus = -tl * tr.transpose();
  blk.b_plus = tr * tl.transpose();
  return blk;
}

// Tensorize an (mx, lx) block into the full (K+1)^2 cell block, pairing it
// with the identity in the other coordinate.
Matrix tensor_with_identity_x(const Matrix& bx, int degree) {
  int n = degree + 1, s = n * n;
  Matrix out = Matrix::Zero(s, s);
  for (int my = 0; my < n; ++my)
    for (int mx = 0; mx < n; ++mx)
      for (int lx = 0; lx < n; ++lx)
        out(my * n + mx, my * n + lx) = bx(mx, lx);
  return out;
}

Matrix tensor_with_identity_y(const Matrix& by, int degree) {
  int n = degree + 1, s = n * n;
  Matrix out = Matrix::Zero(s, s);
  for (int mx = 0; mx < n; ++mx)
    for (int my = 0; my < n; ++my)
      for (int ly = 0; ly < n; ++ly)
        out(my * n + mx, ly * n + mx) = by(my, ly);
  return out;
}

void append_block(std::vector<Triplet>& trips, int row0, int col0, const Matrix& blk) {
  for (int i = 0; i < blk.rows(); ++i)
    for (int j = 0; j < blk.cols(); ++j)
      if (blk(i, j) != 0.0) trips.emplace_back(row0 + i, col0 + j, blk(i, j));
}

}  // namespace

DiscreteOperators assemble_operators(const DGSpace& space,
                                     const ScalarField& sigma_s_field,
                                     const ScalarField& sigma_a_field) {
  const SpatialMesh& mesh = space.mesh;
  const int k = space.degree;
  const int n1 = k + 1;
  const int s = space.dofs_per_cell();
  const int n = space.size();
  const double dx = mesh.dx(), dy = mesh.dy();

  DiscreteOperators ops;
  ops.space = space;

  // Streaming blocks from the 1D pieces.
  StreamingBlocks bx = streaming_blocks_1d(k, dx);
  StreamingBlocks by = streaming_blocks_1d(k, dy);
  ops.ax_minus = tensor_with_identity_x(bx.a_minus, k);
  ops.ax_plus = tensor_with_identity_x(bx.a_plus, k);
  ops.bx_minus = tensor_with_identity_x(bx.b_minus, k);
  ops.bx_plus = tensor_with_identity_x(bx.b_plus, k);
  ops.ay_minus = tensor_with_identity_y(by.a_minus, k);
  ops.ay_plus = tensor_with_identity_y(by.a_plus, k);
  ops.by_minus = tensor_with_identity_y(by.b_minus, k);
  ops.by_plus = tensor_with_identity_y(by.b_plus, k);

  std::vector<Triplet> txm, txp, tym, typ;
  for (int b = 0; b < mesh.ny; ++b) {
    for (int a = 0; a < mesh.nx; ++a) {
      int c = mesh.cell_index(a, b);
      int r0 = c * s;
      append_block(txm, r0, r0, ops.ax_minus);
      append_block(txp, r0, r0, ops.ax_plus);
      append_block(tym, r0, r0, ops.ay_minus);
      append_block(typ, r0, r0, ops.ay_plus);
      if (a > 0) append_block(txm, r0, mesh.cell_index(a - 1, b) * s, ops.bx_minus);
      if (a + 1 < mesh.nx) append_block(txp, r0, mesh.cell_index(a + 1, b) * s, ops.bx_plus);
      if (b > 0) append_block(tym, r0, mesh.cell_index(a, b - 1) * s, ops.by_minus);
      if (b + 1 < mesh.ny) append_block(typ, r0, mesh.cell_index(a, b + 1) * s, ops.by_plus);
    }
  }
  ops.d_x_minus.resize(n, n);
  ops.d_x_plus.resize(n, n);
  ops.d_y_minus.resize(n, n);
  ops.d_y_plus.resize(n, n);
  ops.d_x_minus.setFromTriplets(txm.begin(), txm.end());
  ops.d_x_plus.setFromTriplets(txp.begin(), txp.end());
  ops.d_y_minus.setFromTriplets(tym.begin(), tym.end());
  ops.d_y_plus.setFromTriplets(typ.begin(), typ.end());

  // Cross-section blocks by (K+2)^2 Gauss quadrature per cell.
  const int nq = k + 2;
  GaussLegendre gl = gauss_legendre(nq);
  // 1D basis values at the quadrature nodes (reference, includes 1/sqrt(h)).
  Matrix bxv(n1, nq), byv(n1, nq);
  for (int m = 0; m < n1; ++m)
    for (int g = 0; g < nq; ++g) {
      bxv(m, g) = std::sqrt((2.0 * m + 1.0) / dx) * legendre_value(m, gl.nodes[g]);
      byv(m, g) = std::sqrt((2.0 * m + 1.0) / dy) * legendre_value(m, gl.nodes[g]);
    }

  std::vector<Triplet> ts, tt, ta;
  ops.sigma_t_blocks.resize(mesh.cell_count());
  Matrix bs(s, s), babs(s, s);
  Vector eta(s);
  for (int b = 0; b < mesh.ny; ++b) {
    for (int a = 0; a < mesh.nx; ++a) {
      int c = mesh.cell_index(a, b);
      bs.setZero();
      babs.setZero();
      for (int gy = 0; gy < nq; ++gy) {
        double y = mesh.y_center(b) + 0.5 * dy * gl.nodes[gy];
        for (int gx = 0; gx < nq; ++gx) {
          double x = mesh.x_center(a) + 0.5 * dx * gl.nodes[gx];
          double ss = sigma_s_field(x, y);
          double sa = sigma_a_field(x, y);
          if (ss < 0.0 || sa < 0.0)
            throw std::invalid_argument("assemble_operators: negative cross section");
          double w = gl.weights[gx] * gl.weights[gy] * 0.25 * dx * dy;
          for (int my = 0; my < n1; ++my)
            for (int mx = 0; mx < n1; ++mx)
              eta[my * n1 + mx] = bxv(mx, gx) * byv(my, gy);
          bs.noalias() += (w * ss) * (eta * eta.transpose());
          babs.noalias() += (w * sa) * (eta * eta.transpose());
        }
      }
      int r0 = c * s;
      append_block(ts, r0, r0, bs);
      append_block(ta, r0, r0, babs);
      Matrix bt = bs + babs;
      append_block(tt, r0, r0, bt);
      ops.sigma_t_blocks[c] = bt;
    }
  }
  ops.sigma_s.resize(n, n);
  ops.sigma_t.resize(n, n);
  ops.sigma_a.resize(n, n);
  ops.sigma_s.setFromTriplets(ts.begin(), ts.end());
  ops.sigma_t.setFromTriplets(tt.begin(), tt.end());
  ops.sigma_a.setFromTriplets(ta.begin(), ta.end());
  return ops;
}

Vector project_source(const DGSpace& space, const ScalarField& g) {
  const SpatialMesh& mesh = space.mesh;
  const int k = space.degree;
  const int n1 = k + 1;
  const int s = space.dofs_per_cell();
  const int nq = k + 2;
  const double dx = mesh.dx(), dy = mesh.dy();
  GaussLegendre gl = gauss_legendre(nq);

  Matrix bxv(n1, nq), byv(n1, nq);
  for (int m = 0; m < n1; ++m)
    for (int gq = 0; gq < nq; ++gq) {
      bxv(m, gq) = std::sqrt((2.0 * m + 1.0) / dx) * legendre_value(m, gl.nodes[gq]);
      byv(m, gq) = std::sqrt((2.0 * m + 1.0) / dy) * legendre_value(m, gl.nodes[gq]);
    }

  Vector out = Vector::Zero(space.size());
  for (int b = 0; b < mesh.ny; ++b) {
    for (int a = 0; a < mesh.nx; ++a) {
      int c = mesh.cell_index(a, b);
      for (int gy = 0; gy < nq; ++gy) {
        double y = mesh.y_center(b) + 0.5 * dy * gl.nodes[gy];
        for (int gx = 0; gx < nq; ++gx) {
          double x = mesh.x_center(a) + 0.5 * dx * gl.nodes[gx];
          double w = gl.weights[gx] * gl.weights[gy] * 0.25 * dx * dy * g(x, y);
          if (w == 0.0) continue;
          for (int my = 0; my < n1; ++my)
            for (int mx = 0; mx < n1; ++mx)
              out[c * s + my * n1 + mx] += w * bxv(mx, gx) * byv(my, gy);
        }
      }
    }
  }
  return out;
}

Vector boundary_vector(const DGSpace& space, const AngularQuadrature& quad,
                       const ScalarField& g, int angle) {
  if (angle < 0 || angle >= quad.size())
    throw std::invalid_argument("boundary_vector: angle index out of range");
  const SpatialMesh& mesh = space.mesh;
  const int k = space.degree;
  const int n1 = k + 1;
  const int s = space.dofs_per_cell();
  const int nq = k + 2;
  const double dx = mesh.dx(), dy = mesh.dy();
  const double omx = quad.omega_x(angle), omy = quad.omega_y(angle);
  GaussLegendre gl = gauss_legendre(nq);
  Vector trx_l = trace_left_1d(k, dx), trx_r = trace_right_1d(k, dx);
  Vector try_l = trace_left_1d(k, dy), try_r = trace_right_1d(k, dy);

  Vector out = Vector::Zero(space.size());

  // Vertical domain edges: integrate over y within each boundary cell.
  auto add_x_edge = [&](int a, double x_edge, const Vector& trx, double coeff) {
    for (int b = 0; b < mesh.ny; ++b) {
      int c = mesh.cell_index(a, b);
      for (int gq = 0; gq < nq; ++gq) {
        double y = mesh.y_center(b) + 0.5 * dy * gl.nodes[gq];
        double w = coeff * gl.weights[gq] * 0.5 * dy * g(x_edge, y);
        if (w == 0.0) continue;
        for (int my = 0; my < n1; ++my) {
          double by = space.basis_1d_y(my, b, y);
          for (int mx = 0; mx < n1; ++mx)
            out[c * s + my * n1 + mx] += w * trx[mx] * by;
        }
      }
    }
  };
  auto add_y_edge = [&](int b, double y_edge, const Vector& tryv, double coeff) {
    for (int a = 0; a < mesh.nx; ++a) {
      int c = mesh.cell_index(a, b);
      for (int gq = 0; gq < nq; ++gq) {
        double x = mesh.x_center(a) + 0.5 * dx * gl.nodes[gq];
        double w = coeff * gl.weights[gq] * 0.5 * dx * g(x, y_edge);
        if (w == 0.0) continue;
        for (int mx = 0; mx < n1; ++mx) {
          double bx = space.basis_1d_x(mx, a, x);
          for (int my = 0; my < n1; ++my)
            out[c * s + my * n1 + mx] += w * tryv[my] * bx;
        }
      }
    }
  };

  if (omx > 0.0) add_x_edge(0, mesh.x_min, trx_l, omx);
  if (omx < 0.0) add_x_edge(mesh.nx - 1, mesh.x_max, trx_r, -omx);
  if (omy > 0.0) add_y_edge(0, mesh.y_min, try_l, omy);
  if (omy < 0.0) add_y_edge(mesh.ny - 1, mesh.y_max, try_r, -omy);
  return out;
}

Vector StreamingOperator::apply(const Vector& v) const {
  Vector out = ops->sigma_t * v;
  if (omega_x != 0.0) out.noalias() += omega_x * (*dx * v);
  if (omega_y != 0.0) out.noalias() += omega_y * (*dy * v);
  return out;
}

SparseMatrix StreamingOperator::materialize() const {
  SparseMatrix m = ops->sigma_t;
  if (omega_x != 0.0) m = m + SparseMatrix(omega_x * *dx);
  if (omega_y != 0.0) m = m + SparseMatrix(omega_y * *dy);
  return m;
}

StreamingOperator upwind_combination(const DiscreteOperators& ops,
                                     const AngularQuadrature& quad, int angle) {
  if (angle < 0 || angle >= quad.size())
    throw std::invalid_argument("upwind_combination: angle index out of range");
  StreamingOperator op;
  op.ops = &ops;
  op.omega_x = quad.omega_x(angle);
  op.omega_y = quad.omega_y(angle);
  op.dx = op.omega_x >= 0.0 ? &ops.d_x_minus : &ops.d_x_plus;
  op.dy = op.omega_y >= 0.0 ? &ops.d_y_minus : &ops.d_y_plus;
  return op;
}

}  // namespace rtlr
