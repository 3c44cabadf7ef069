#include "rtlr/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rtlr/quadrature.hpp"

namespace rtlr {

namespace {

// int phi_m' phi_l' over one cell, by Gauss quadrature on the reference
// interval (exact: the integrand has degree 2K - 2).
Matrix stiffness_matrix_1d(int degree, double h) {
  int n = degree + 1;
  GaussLegendre gl = gauss_legendre(degree + 2);
  Matrix st = Matrix::Zero(n, n);
  for (int g = 0; g < gl.nodes.size(); ++g) {
    Vector dphi(n);
    for (int m = 0; m < n; ++m)
      dphi[m] = std::sqrt((2.0 * m + 1.0) / h) * legendre_derivative(m, gl.nodes[g]) * 2.0 / h;
    st.noalias() += (0.5 * h * gl.weights[g]) * (dphi * dphi.transpose());
  }
  return st;
}

Vector edge_values(int degree, double h, bool right) {
  Vector v(degree + 1);
  for (int m = 0; m <= degree; ++m) {
    double p = right ? 1.0 : ((m % 2 == 0) ? 1.0 : -1.0);
    v[m] = std::sqrt((2.0 * m + 1.0) / h) * p;
  }
  return v;
}

// d/dx of the 1D factor at the cell edge; P_m'(-1) = (-1)^(m-1) m(m+1)/2.
Vector edge_derivatives(int degree, double h, bool right) {
  Vector v(degree + 1);
  for (int m = 0; m <= degree; ++m) {
    double dp = 0.5 * m * (m + 1.0);
    if (!right && m % 2 == 0) dp = -dp;
    v[m] = std::sqrt((2.0 * m + 1.0) / h) * dp * 2.0 / h;
  }
  return v;
}

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

// One-sided SIP face block in 1D coefficients: test trace/derivative
// (vt, gt, jump sign st) against trial (vu, gu, su), consistency fluxes
// already weighted by the side diffusivities.
Matrix sip_face_block_1d(const Vector& vt, const Vector& gt, double st,
                         const Vector& vu, const Vector& gu, double su,
                         double gamma) {
  int n = vt.size();
  Matrix e(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      e(k, l) = -gu[l] * st * vt[k] - gt[k] * su * vu[l] + gamma * st * su * vt[k] * vu[l];
  return e;
}

}  // namespace

DiffusionSystem::DiffusionSystem(const DGSpace& space, const DiscreteOperators& ops) {
  const SpatialMesh& mesh = space.mesh;
  const int k = space.degree;
  const int s = space.dofs_per_cell();
  const int n = space.size();
  const double dx = mesh.dx(), dy = mesh.dy();
  const double pen = 4.0 * std::max(k * (k + 1), 1);

  // Cell-average sigma_t from the assembled blocks: the (0,0) entry is the
  // moment of sigma_t against the squared constant basis function.
  std::vector<double> d_cell(mesh.cell_count());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    double sig = ops.sigma_t_blocks[c](0, 0);
    if (!(sig > 0.0))
      throw std::runtime_error("build_diffusion: sigma_t must be positive");
    d_cell[c] = 1.0 / (3.0 * sig);
  }

  Matrix stx = stiffness_matrix_1d(k, dx);
  Matrix sty = stiffness_matrix_1d(k, dy);
  Matrix vol_stiff = tensor_with_identity_x(stx, k) + tensor_with_identity_y(sty, k);

  Vector vxl = edge_values(k, dx, false), vxr = edge_values(k, dx, true);
  Vector gxl = edge_derivatives(k, dx, false), gxr = edge_derivatives(k, dx, true);
  Vector vyl = edge_values(k, dy, false), vyr = edge_values(k, dy, true);
  Vector gyl = edge_derivatives(k, dy, false), gyr = edge_derivatives(k, dy, true);

  std::vector<Triplet> trips;

  // Volume diffusion + absorption.
  for (int c = 0; c < mesh.cell_count(); ++c) {
    Matrix blk = d_cell[c] * vol_stiff;
    append_block(trips, c * s, c * s, blk);
  }

  // x-directed faces (normal +x from left to right cell).
  for (int b = 0; b < mesh.ny; ++b) {
    for (int af = 0; af <= mesh.nx; ++af) {
      bool has_l = af > 0, has_r = af < mesh.nx;
      int cl = has_l ? mesh.cell_index(af - 1, b) : -1;
      int cr = has_r ? mesh.cell_index(af, b) : -1;
      if (has_l && has_r) {
        double dl = d_cell[cl], dr = d_cell[cr];
        double wsum = dl + dr;
        double wl = dr / wsum, wr = dl / wsum;
        double dharm = 2.0 * dl * dr / wsum;
        double gamma = pen * dharm / dx;
        Vector fl = wl * dl * gxr, fr = wr * dr * gxl;
        append_block(trips, cl * s, cl * s,
                     tensor_with_identity_x(sip_face_block_1d(vxr, fl, 1, vxr, fl, 1, gamma), k));
        append_block(trips, cl * s, cr * s,
                     tensor_with_identity_x(sip_face_block_1d(vxr, fl, 1, vxl, fr, -1, gamma), k));
        append_block(trips, cr * s, cl * s,
                     tensor_with_identity_x(sip_face_block_1d(vxl, fr, -1, vxr, fl, 1, gamma), k));
        append_block(trips, cr * s, cr * s,
                     tensor_with_identity_x(sip_face_block_1d(vxl, fr, -1, vxl, fr, -1, gamma), k));
      } else {
        // Dirichlet boundary face; outward normal flips the sign of the
        // derivative trace on the left edge of the domain.
        int c = has_l ? cl : cr;
        const Vector& v = has_l ? vxr : vxl;
        Vector g = has_l ? (d_cell[c] * gxr).eval() : (-d_cell[c] * gxl).eval();
        double gamma = pen * d_cell[c] / dx;
        append_block(trips, c * s, c * s,
                     tensor_with_identity_x(sip_face_block_1d(v, g, 1, v, g, 1, gamma), k));
      }
    }
  }

  // y-directed faces.
  for (int a = 0; a < mesh.nx; ++a) {
    for (int bf = 0; bf <= mesh.ny; ++bf) {
      bool has_b = bf > 0, has_t = bf < mesh.ny;
      int cb = has_b ? mesh.cell_index(a, bf - 1) : -1;
      int ct = has_t ? mesh.cell_index(a, bf) : -1;
      if (has_b && has_t) {
        double db = d_cell[cb], dt = d_cell[ct];
        double wsum = db + dt;
        double wb = dt / wsum, wt = db / wsum;
        double dharm = 2.0 * db * dt / wsum;
        double gamma = pen * dharm / dy;
        Vector fb = wb * db * gyr, ft = wt * dt * gyl;
        append_block(trips, cb * s, cb * s,
                     tensor_with_identity_y(sip_face_block_1d(vyr, fb, 1, vyr, fb, 1, gamma), k));
        append_block(trips, cb * s, ct * s,
                     tensor_with_identity_y(sip_face_block_1d(vyr, fb, 1, vyl, ft, -1, gamma), k));
        append_block(trips, ct * s, cb * s,
                     tensor_with_identity_y(sip_face_block_1d(vyl, ft, -1, vyr, fb, 1, gamma), k));
        append_block(trips, ct * s, ct * s,
                     tensor_with_identity_y(sip_face_block_1d(vyl, ft, -1, vyl, ft, -1, gamma), k));
      } else {
        int c = has_b ? cb : ct;
        const Vector& v = has_b ? vyr : vyl;
        Vector g = has_b ? (d_cell[c] * gyr).eval() : (-d_cell[c] * gyl).eval();
        double gamma = pen * d_cell[c] / dy;
        append_block(trips, c * s, c * s,
                     tensor_with_identity_y(sip_face_block_1d(v, g, 1, v, g, 1, gamma), k));
      }
    }
  }

  a_diff_.resize(n, n);
  a_diff_.setFromTriplets(trips.begin(), trips.end());
  a_diff_ = a_diff_ + SparseMatrix(ops.sigma_a);

  sigma_s_ = ops.sigma_s;

  Eigen::SparseMatrix<double> col_major(a_diff_);
  factorization_.compute(col_major);
  if (factorization_.info() != Eigen::Success)
    throw std::runtime_error("build_diffusion: factorization failed (matrix not positive definite)");
}

Vector DiffusionSystem::solve(const Vector& rhs) const {
  Vector x = factorization_.solve(rhs);
  if (factorization_.info() != Eigen::Success)
    throw std::runtime_error("diffusion solve failed");
  return x;
}

Vector DiffusionSystem::correct(const Vector& phi_star, const Vector& phi_prev) const {
  Vector rhs = sigma_s_ * (phi_star - phi_prev);
  return solve(rhs);
}

}  // namespace rtlr
