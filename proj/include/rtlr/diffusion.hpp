#pragma once

#include <Eigen/SparseCholesky>

#include "rtlr/operators.hpp"

namespace rtlr {

/// Symmetric interior-penalty DG discretization of the diffusion correction
///   -div(D grad u) + sigma_a u = rhs,   D = 1/(3 sigma_t),
/// on the transport mesh and space, with homogeneous Dirichlet boundary
/// imposed weakly.  D is taken cell-wise constant from the cell average of
/// sigma_t; face fluxes use diffusivity-weighted averages and the penalty is
/// 4 K(K+1) D_f / h with D_f the harmonic mean across the face.  The matrix
/// is SPD and factorized once (LDLT), then reused for every correction.
class DiffusionSystem {
 public:
  DiffusionSystem(const DGSpace& space, const DiscreteOperators& ops);

  const SparseMatrix& matrix() const { return a_diff_; }
  Vector solve(const Vector& rhs) const;
  /// Correction delta_phi with A delta_phi = Sigma_s (phi_star - phi_prev).
  Vector correct(const Vector& phi_star, const Vector& phi_prev) const;

 private:
  SparseMatrix a_diff_;
  SparseMatrix sigma_s_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factorization_;
};

inline DiffusionSystem build_diffusion(const DGSpace& space,
                                       const DiscreteOperators& ops) {
  return DiffusionSystem(space, ops);
}

inline Vector dsa_correct(const DiffusionSystem& sys, const Vector& phi_star,
                          const Vector& phi_prev) {
  return sys.correct(phi_star, phi_prev);
}

}  // namespace rtlr
