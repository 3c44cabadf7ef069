#include "rtlr/full_rank.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "rtlr/sweep.hpp"

namespace rtlr {

BoundaryData build_boundary_data(const DGSpace& space, const AngularQuadrature& quad,
                                 const ScalarField& g) {
  BoundaryData bc;
  // Probe the boundary datum on the edge quadrature points first; the common
  // zero-inflow case then costs nothing.
  const SpatialMesh& mesh = space.mesh;
  const int nq = space.degree + 2;
  GaussLegendre gl = gauss_legendre(nq);
  double max_abs = 0.0;
  for (int b = 0; b < mesh.ny; ++b)
    for (int gq = 0; gq < nq; ++gq) {
      double y = mesh.y_center(b) + 0.5 * mesh.dy() * gl.nodes[gq];
      max_abs = std::max(max_abs, std::abs(g(mesh.x_min, y)));
      max_abs = std::max(max_abs, std::abs(g(mesh.x_max, y)));
    }
  for (int a = 0; a < mesh.nx; ++a)
    for (int gq = 0; gq < nq; ++gq) {
      double x = mesh.x_center(a) + 0.5 * mesh.dx() * gl.nodes[gq];
      max_abs = std::max(max_abs, std::abs(g(x, mesh.y_min)));
      max_abs = std::max(max_abs, std::abs(g(x, mesh.y_max)));
    }
  if (max_abs == 0.0) return bc;

  bc.any = true;
  bc.per_angle.resize(quad.size());
  for (int j = 0; j < quad.size(); ++j)
    bc.per_angle[j] = boundary_vector(space, quad, g, j);
  return bc;
}

SIStepResult si_step(const DiscreteOperators& ops, const AngularQuadrature& quad,
                     const BoundaryData& bc, const Vector& source,
                     const Vector& phi_prev) {
  const int n = ops.space.size();
  const int n_omega = quad.size();
  Vector rhs_core = ops.sigma_s * phi_prev + source;

  SIStepResult out;
  out.psi.resize(n, n_omega);
  Vector rhs(n);
  for (int j = 0; j < n_omega; ++j) {
    rhs = rhs_core;
    if (const Vector* g = bc.get(j)) rhs += *g;
    out.psi.col(j) = sweep(ops, quad, j, rhs);
  }
  out.phi_star = out.psi * quad.weights;
  return out;
}

SolveReport solve_full_rank(const DiscreteOperators& ops, const AngularQuadrature& quad,
                            const BoundaryData& bc, const Vector& source,
                            const DiffusionSystem* dsa, const FullRankOptions& opts) {
  if (opts.use_dsa && dsa == nullptr)
    throw std::invalid_argument("solve_full_rank: DSA requested but no diffusion system");

  const int n = ops.space.size();
  const int n_omega = quad.size();

  SolveReport report;
  report.method = "full";
  report.psi_dofs = static_cast<long long>(n) * n_omega;

  auto t0 = std::chrono::steady_clock::now();

  Vector phi = Vector::Zero(n);
  Vector phi_star;
  Matrix psi;
  Vector rhs_core(n), rhs(n);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    rhs_core = ops.sigma_s * phi + source;
    if (opts.store_psi) {
      if (psi.size() == 0) psi.resize(n, n_omega);
      for (int j = 0; j < n_omega; ++j) {
        rhs = rhs_core;
        if (const Vector* g = bc.get(j)) rhs += *g;
        psi.col(j) = sweep(ops, quad, j, rhs);
      }
      phi_star = psi * quad.weights;
    } else {
      phi_star = Vector::Zero(n);
      for (int j = 0; j < n_omega; ++j) {
        rhs = rhs_core;
        if (const Vector* g = bc.get(j)) rhs += *g;
        phi_star.noalias() += quad.weights[j] * sweep(ops, quad, j, rhs);
      }
    }

    OuterRecord rec;
    rec.diff_two_norm = (phi_star - phi).norm();
    rec.diff_inf_norm = (phi_star - phi).lpNorm<Eigen::Infinity>();
    report.history.push_back(rec);
    report.iterations = it;

    if (rec.diff_inf_norm <= opts.eps_si_sa) {
      report.converged = true;
      phi = phi_star;
      break;
    }
    if (opts.use_dsa)
      phi = phi_star + dsa->correct(phi_star, phi);
    else
      phi = phi_star;
  }
  if (!report.converged) phi = phi_star;

  auto t1 = std::chrono::steady_clock::now();
  report.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.phi = phi;
  if (opts.store_psi) report.psi = std::move(psi);
  return report;
}

}  // namespace rtlr
