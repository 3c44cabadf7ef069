#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtlr/low_rank.hpp"
#include "rtlr/problem.hpp"
#include "rtlr/report.hpp"

namespace rtlr {

struct RunResult {
  ProblemConfig config;
  std::string run_id;
  double assembly_seconds = 0.0;
  std::optional<SolveReport> full;
  std::optional<SolveReport> low;
  std::optional<RunComparison> comparison;

  bool all_converged() const {
    return (!full || full->converged) && (!low || low->converged);
  }
};

/// Runs the drivers requested by config.mode against one shared assembly and
/// compares them when both ran.
RunResult run(const ProblemConfig& config);

/// Executes the drivers against an existing assembly (the assembly is reused
/// across seeds in batch mode).
RunResult run_assembled(const ProblemConfig& config, const AssembledProblem& prob);

/// Frobenius norm of Psi_full - X S V^T, reconstructed in column blocks so
/// the low-rank flux is never materialized.
double psi_difference(const Matrix& psi_full, const LowRankFactors& factors);

RunComparison compare_runs(const SolveReport& full, const SolveReport& low,
                           int n_x, int n_omega);

/// Writes metrics.csv, history.csv and the flux grid files into out_dir.
/// Floats carry 17 significant digits.  With log_export, additionally writes
/// flux files clamped to 1e-16 for log-scale plotting (stored data is never
/// clamped).
void write_outputs(const std::vector<RunResult>& results, const std::string& out_dir,
                   bool log_export = false);

}  // namespace rtlr
