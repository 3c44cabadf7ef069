#pragma once

#include "rtlr/operators.hpp"

namespace rtlr {

/// Solves (D_j + Sigma_t) psi = rhs for one direction by a single block
/// Gauss-Seidel pass over cells in the upwind order: the system is block
/// lower triangular in that ordering, so one pass is a direct solve.
/// The right-hand side must already contain scattering source, external
/// source and inflow boundary data.
/// Throws if a local s x s block is singular (negative sigma_t or a broken
/// quadrant rule would cause this).
Vector sweep(const DiscreteOperators& ops, const AngularQuadrature& quad,
             int angle, const Vector& rhs);

}  // namespace rtlr
