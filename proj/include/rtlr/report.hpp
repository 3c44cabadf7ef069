#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtlr/linalg.hpp"

namespace rtlr {

/// Rank-r factorization of the angular flux matrix, Psi ~ X S V^T.
struct LowRankFactors {
  Matrix X;  // N_x x r, orthonormal columns
  Vector S;  // singular values, nonincreasing
  Matrix V;  // N_Omega x r, orthonormal columns
  int rank() const { return static_cast<int>(S.size()); }
};

struct OuterRecord {
  double diff_two_norm = 0.0;  // ||phi^(n) - phi^(n-1)||_2
  double diff_inf_norm = 0.0;
  // Low-rank extras (absent for the full-rank driver).
  int rank = -1;               // truncated rank r' of this iteration
  double oversampling = 0.0;   // (r_k - r') / r'
  int inner_iterations = 0;
  int sampled_count = 0;
  bool fullrank_fallback = false;
};

struct SolveReport {
  std::string method;  // "full" or "lowrank"
  Vector phi;
  bool converged = false;
  int iterations = 0;
  double solve_seconds = 0.0;
  long long psi_dofs = 0;  // full: N_x * N_Omega; low-rank: r' (N_x + N_Omega)
  std::vector<OuterRecord> history;
  std::optional<Matrix> psi;               // angular flux, full-rank runs
  std::optional<LowRankFactors> factors;   // low-rank runs
  std::vector<std::vector<int>> sampled_log;  // sweep order per outer iteration
};

/// Metrics comparing a full-rank and a low-rank run of the same problem.
struct RunComparison {
  double speedup = 0.0;            // full time / low-rank time
  double compression_ratio = 0.0;  // low-rank DOFs / full DOFs
  double phi_diff_two_norm = 0.0;
  double psi_diff_two_norm = 0.0;  // Frobenius, reconstructed column-wise
  bool has_psi_diff = false;
};

}  // namespace rtlr
