#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rtlr/diffusion.hpp"
#include "rtlr/full_rank.hpp"
#include "rtlr/operators.hpp"
#include "rtlr/report.hpp"

namespace rtlr {

/// Seedable generator for the angular subsampling.  The raw stream is
/// std::mt19937_64, whose output sequence is fixed by the standard, and
/// bounded draws use masked rejection, so identical seeds give identical
/// samples on every platform.
class SubsampleRng {
 public:
  explicit SubsampleRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t draw_below(std::uint64_t n);
  /// First `count` entries of a partial Fisher-Yates shuffle of `pool`.
  std::vector<int> sample_without_replacement(std::vector<int> pool, int count);

 private:
  std::mt19937_64 engine_;
};

struct LowRankParams {
  int p = 1;              // snapshots added per inner iteration
  int q = 8;              // random candidates scored per inner iteration
  double eps_res = 1e-7;  // residual gate on the candidate set
  double eps_diff = 1e-7; // scalar-flux change gate
  double eps_svd = 1e-8;  // discarded-tail fraction of the final SVD
  double eps_mgs = 1e-10; // orthogonality-loss trigger for reorthogonalization
};

/// Orthonormal spatial basis grown one batch of transport-sweep snapshots at
/// a time (MGS with selective reorthogonalization), together with the
/// coefficient record of every snapshot and the Galerkin projections of the
/// four one-sided streaming matrices and Sigma_t.
class LowRankBasis {
 public:
  LowRankBasis(const DiscreteOperators& ops, const AngularQuadrature& quad,
               const BoundaryData& bc, Vector rhs_core);

  int rank() const { return rank_; }
  int snapshot_count() const { return n_snap_; }
  const std::vector<int>& sampled_angles() const { return sampled_; }
  Eigen::Ref<const Matrix> basis() const { return x_.leftCols(rank_); }
  Eigen::Ref<const Matrix> coefficient_record() const {
    return rec_.topLeftCorner(rank_, n_snap_);
  }
  const Vector& full_rhs_core() const { return rhs_core_; }

  /// Appends sweep snapshots for `angles`.  Returns true when the
  /// orthogonality check |X(:,0) . X(:,end)| > eps_mgs forced a full QR
  /// rebuild.  A snapshot whose orthogonal remainder is below
  /// drop_tol * ||psi|| keeps its coefficient column but adds no basis
  /// vector.
  bool mgs_ro_update(const Matrix& snapshots, const std::vector<int>& angles,
                     double eps_mgs, double drop_tol = 1e-12);

  /// Border-extends the projected operators for the columns added by the
  /// last update; a reorthogonalization invalidates the hierarchical
  /// structure, so everything is reprojected directly instead.
  void update_projections(bool reorthogonalized);

  /// X^T (D_j + Sigma_t) X from the stored projections.
  Matrix reduced_streaming(int angle) const;
  Vector reduced_rhs(int angle) const;
  /// Solves the reduced system; throws if it is singular.
  Vector galerkin_solve(int angle) const;
  /// Full-space residual  rhs_j - (D_j + Sigma_t) X c.
  Vector residual(int angle, const Vector& c) const;
  double residual_norm(int angle, const Vector& c) const { return residual(angle, c).norm(); }
  /// Residual norm given the already-expanded reduced solution y = X c.
  double residual_in_full_space(int angle, const Vector& y) const;

  Eigen::Ref<const Matrix> projected_dx_minus() const { return pdxm_.topLeftCorner(rank_, rank_); }
  Eigen::Ref<const Matrix> projected_dx_plus() const { return pdxp_.topLeftCorner(rank_, rank_); }
  Eigen::Ref<const Matrix> projected_dy_minus() const { return pdym_.topLeftCorner(rank_, rank_); }
  Eigen::Ref<const Matrix> projected_dy_plus() const { return pdyp_.topLeftCorner(rank_, rank_); }
  Eigen::Ref<const Matrix> projected_sigma_t() const { return pst_.topLeftCorner(rank_, rank_); }

 private:
  void ensure_capacity(int rank_needed, int snaps_needed);

  const DiscreteOperators* ops_;
  const AngularQuadrature* quad_;
  const BoundaryData* bc_;
  Vector rhs_core_;  // Sigma_s phi_prev + G

  Matrix x_;    // basis columns (capacity grows geometrically)
  Matrix rec_;  // coefficient record, column i = snapshot i in the basis
  Matrix pdxm_, pdxp_, pdym_, pdyp_, pst_;
  Vector prhs_;  // X^T rhs_core
  std::vector<int> sampled_;
  int rank_ = 0;
  int n_snap_ = 0;
  int prev_rank_ = 0;  // rank before the last update (border start)
};

struct SubsampleOutcome {
  std::vector<int> selected;  // top-p candidates by residual norm
  double max_residual = 0.0;
  std::vector<int> candidates;
  std::vector<Vector> candidate_solutions;  // reduced solutions, same order
  std::vector<double> residual_norms;
};

/// Draws min(q, #unsampled) distinct unsampled angles, scores their reduced
/// solutions by the full-space residual and selects the p largest.
SubsampleOutcome greedy_subsample(const LowRankBasis& basis,
                                  const std::vector<char>& sampled_mask,
                                  int p, int q, SubsampleRng& rng);

/// Smallest rank whose discarded singular-value tail satisfies
/// sum_{i > r} s_i <= eps * sum_i s_i (at least one).
int truncation_rank(const Vector& singular_values, double eps_svd);

LowRankFactors truncate_factors(const Matrix& coefficients,
                                Eigen::Ref<const Matrix> basis, double eps_svd);

struct InnerLoopResult {
  Vector phi_star;
  Matrix coefficients;  // C (rank x N_Omega) at convergence
  Matrix basis;         // X (N_x x rank) at convergence
  int iterations = 0;
  int rank = 0;
  int sampled_count = 0;
  int reorthogonalizations = 0;
  int verification_rejections = 0;  // accepts vetoed by the full residual check
  bool exhausted_all_angles = false;  // fell back to a full-rank step
  std::vector<int> sampled_order;
};

/// Rank-adaptive low-rank source-iteration step (inner loop): sweep p
/// sampled angles, grow the basis, greedily subsample candidates, and stop
/// on the two-stage residual / scalar-flux test.
InnerLoopResult low_rank_si(const DiscreteOperators& ops, const AngularQuadrature& quad,
                            const BoundaryData& bc, const Vector& source,
                            const Vector& phi_prev, const LowRankParams& params,
                            SubsampleRng& rng);

struct LowRankOptions {
  LowRankParams inner;
  double eps_si_sa = 1e-6;
  int max_iterations = 500;
  bool use_dsa = true;
  std::uint64_t seed = 0;
  bool build_factors = true;  // factorize the angular flux of the last step
};

/// Outer low-rank SI-DSA driver (zero initial scalar flux).
SolveReport solve_low_rank(const DiscreteOperators& ops, const AngularQuadrature& quad,
                           const BoundaryData& bc, const Vector& source,
                           const DiffusionSystem* dsa, const LowRankOptions& opts);

}  // namespace rtlr
