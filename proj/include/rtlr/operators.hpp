#pragma once

#include <vector>

#include "rtlr/dg_space.hpp"
#include "rtlr/quadrature.hpp"

namespace rtlr {

/// Discrete operators of the S_N upwind DG system
///   (D_j + Sigma_t) psi_j = Sigma_s phi + G + g_j^bc,
/// with D_j the quadrant-selected combination of the one-sided streaming
/// matrices.  All matrices are N_x by N_x in CSR form.  The dense per-cell
/// blocks duplicate the sparse data in the layout the transport sweep wants:
/// on a uniform mesh the streaming blocks are cell independent, so only the
/// total-cross-section blocks are stored per cell.
struct DiscreteOperators {
  DGSpace space;

  SparseMatrix d_x_minus, d_x_plus, d_y_minus, d_y_plus;
  SparseMatrix sigma_s, sigma_t, sigma_a;

  // Streaming diagonal blocks: a*_minus pairs with d_*_minus (used when the
  // direction component is >= 0) and a*_plus with d_*_plus.
  Matrix ax_minus, ax_plus, ay_minus, ay_plus;
  // Couplings to the upwind neighbour: bx_minus(k,l) multiplies the solved
  // cell at a-1 when sweeping in +x, bx_plus the cell at a+1 when sweeping
  // in -x (same for y).
  Matrix bx_minus, bx_plus, by_minus, by_plus;
  // sigma_t restricted to each cell, in cell order.
  std::vector<Matrix> sigma_t_blocks;
};

/// Assembles all seven matrices plus the sweep blocks.  Cross sections are
/// evaluated at (K+2)^2 Gauss points per cell and must be nonnegative there;
/// discontinuities are assumed to lie on cell boundaries.
DiscreteOperators assemble_operators(const DGSpace& space,
                                     const ScalarField& sigma_s,
                                     const ScalarField& sigma_a);

/// L2 projection of a source density onto the DG space ((K+2)^2-point Gauss
/// quadrature per cell).
Vector project_source(const DGSpace& space, const ScalarField& g);

/// Inflow boundary contribution to the right-hand side for direction j:
/// each inflow edge adds |Omega . n| times the edge moment of the boundary
/// datum against the interior trace of the test function.
Vector boundary_vector(const DGSpace& space, const AngularQuadrature& quad,
                       const ScalarField& g, int angle);

/// Lazy view of D_j + Sigma_t for one direction; no allocation beyond the
/// result of apply().
struct StreamingOperator {
  const DiscreteOperators* ops = nullptr;
  double omega_x = 0, omega_y = 0;
  const SparseMatrix* dx = nullptr;  // quadrant-selected one-sided matrix
  const SparseMatrix* dy = nullptr;

  Vector apply(const Vector& v) const;
  SparseMatrix materialize() const;
};

StreamingOperator upwind_combination(const DiscreteOperators& ops,
                                     const AngularQuadrature& quad, int angle);

}  // namespace rtlr
