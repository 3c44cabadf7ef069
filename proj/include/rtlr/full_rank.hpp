#pragma once

#include "rtlr/diffusion.hpp"
#include "rtlr/operators.hpp"
#include "rtlr/report.hpp"

namespace rtlr {

/// Per-angle inflow right-hand-side vectors; empty when the boundary datum
/// is identically zero.
struct BoundaryData {
  bool any = false;
  std::vector<Vector> per_angle;
  const Vector* get(int angle) const { return any ? &per_angle[angle] : nullptr; }
};

BoundaryData build_boundary_data(const DGSpace& space, const AngularQuadrature& quad,
                                 const ScalarField& g);

struct SIStepResult {
  Matrix psi;       // N_x x N_Omega, column j = psi_j
  Vector phi_star;  // Psi w
};

/// One source-iteration step: sweeps every angle against the frozen
/// right-hand side Sigma_s phi_prev + G + g_j^bc and accumulates the scalar
/// flux in fixed angle order.
SIStepResult si_step(const DiscreteOperators& ops, const AngularQuadrature& quad,
                     const BoundaryData& bc, const Vector& source,
                     const Vector& phi_prev);

struct FullRankOptions {
  double eps_si_sa = 1e-6;
  int max_iterations = 500;
  bool use_dsa = true;    // false: plain source iteration
  bool store_psi = true;  // false: stream angles, keep only the scalar flux
};

/// Full-rank SI-DSA driver: SI step, infinity-norm stopping test before the
/// correction, DSA otherwise.  Starts from a zero scalar flux.
SolveReport solve_full_rank(const DiscreteOperators& ops, const AngularQuadrature& quad,
                            const BoundaryData& bc, const Vector& source,
                            const DiffusionSystem* dsa, const FullRankOptions& opts);

}  // namespace rtlr
