#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rtlr/harness.hpp"

namespace rtlr {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

FullRankOptions full_options(const SolverParams& s) {
  FullRankOptions o;
  o.eps_si_sa = s.eps_si_sa;
  o.max_iterations = s.max_iterations;
  o.use_dsa = s.use_dsa;
  o.store_psi = s.store_psi;
  return o;
}

LowRankOptions low_options(const SolverParams& s) {
  LowRankOptions o;
  o.inner.p = s.p;
  o.inner.q = s.q;
  o.inner.eps_res = s.eps_res;
  o.inner.eps_diff = s.eps_diff;
  o.inner.eps_svd = s.eps_svd;
  o.inner.eps_mgs = s.eps_mgs;
  o.eps_si_sa = s.eps_si_sa;
  o.max_iterations = s.max_iterations;
  o.use_dsa = s.use_dsa;
  o.seed = s.seed;
  o.build_factors = s.build_factors;
  return o;
}

}  // namespace

double psi_difference(const Matrix& psi_full, const LowRankFactors& factors) {
  const int n_omega = static_cast<int>(psi_full.cols());
  const int block = 128;
  double acc = 0.0;
  Matrix scaled = factors.S.asDiagonal() * factors.V.transpose();  // r x N_Omega
  for (int j0 = 0; j0 < n_omega; j0 += block) {
    int nb = std::min(block, n_omega - j0);
    Matrix rec = factors.X * scaled.middleCols(j0, nb);
    acc += (psi_full.middleCols(j0, nb) - rec).squaredNorm();
  }
  return std::sqrt(acc);
}

RunComparison compare_runs(const SolveReport& full, const SolveReport& low,
                           int n_x, int n_omega) {
  if (full.phi.size() != low.phi.size() || full.phi.size() != n_x)
    throw std::invalid_argument("compare_runs: reports come from different discretizations");
  RunComparison cmp;
  cmp.speedup = low.solve_seconds > 0.0 ? full.solve_seconds / low.solve_seconds : 0.0;
  cmp.compression_ratio =
      static_cast<double>(low.psi_dofs) / (static_cast<double>(n_x) * n_omega);
  cmp.phi_diff_two_norm = (low.phi - full.phi).norm();
  if (full.psi && low.factors) {
    cmp.psi_diff_two_norm = psi_difference(*full.psi, *low.factors);
    cmp.has_psi_diff = true;
  }
  return cmp;
}

RunResult run_assembled(const ProblemConfig& config, const AssembledProblem& prob) {
  RunResult result;
  result.config = config;
  result.assembly_seconds = prob.assembly_seconds;
  std::string preset = config.preset.empty() ? "custom" : config.preset;
  result.run_id = preset + "-seed" + std::to_string(config.solver.seed);

  const DiffusionSystem* dsa = prob.dsa.get();
  if (config.mode == RunMode::Full || config.mode == RunMode::Both)
    result.full = solve_full_rank(prob.ops, prob.quad, prob.bc, prob.source, dsa,
                                  full_options(config.solver));
  if (config.mode == RunMode::LowRank || config.mode == RunMode::Both)
    result.low = solve_low_rank(prob.ops, prob.quad, prob.bc, prob.source, dsa,
                                low_options(config.solver));
  if (result.full && result.low)
    result.comparison =
        compare_runs(*result.full, *result.low, prob.space.size(), prob.quad.size());
  return result;
}

RunResult run(const ProblemConfig& config) {
  AssembledProblem prob = assemble_problem(config);
  return run_assembled(config, prob);
}

namespace {

void write_flux_file(const std::string& path, const DGSpace& space, const Vector& phi,
                     bool clamp_for_log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  const SpatialMesh& mesh = space.mesh;
  for (int b = 0; b < mesh.ny; ++b)
    for (int a = 0; a < mesh.nx; ++a) {
      double v = space.cell_mean(phi, mesh.cell_index(a, b));
      if (clamp_for_log) v = std::max(v, 1e-16);
      os << fmt(mesh.x_center(a)) << " " << fmt(mesh.y_center(b)) << " " << fmt(v) << "\n";
    }
}

}  // namespace

void write_outputs(const std::vector<RunResult>& results, const std::string& out_dir,
                   bool log_export) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream os(out_dir + "/metrics.csv");
    if (!os) throw std::runtime_error("cannot write metrics.csv in '" + out_dir + "'");
    os << "run_id,preset,mode,seed,fr_iterations,lr_iterations,rank,"
          "compression_ratio,oversampling_ratio,phi_diff_two_norm,psi_diff_two_norm,"
          "fr_converged,lr_converged,speedup,fr_solve_seconds,lr_solve_seconds,"
          "assembly_seconds\n";
    for (const RunResult& r : results) {
      const char* mode = r.full && r.low ? "both" : (r.full ? "full" : "lowrank");
      os << r.run_id << "," << (r.config.preset.empty() ? "custom" : r.config.preset)
         << "," << mode << "," << r.config.solver.seed << ",";
      os << (r.full ? std::to_string(r.full->iterations) : std::string()) << ",";
      os << (r.low ? std::to_string(r.low->iterations) : std::string()) << ",";
      if (r.low && r.low->factors) os << r.low->factors->rank();
      else if (r.low && !r.low->history.empty()) os << r.low->history.back().rank;
      os << ",";
      if (r.comparison) os << fmt(r.comparison->compression_ratio);
      os << ",";
      if (r.low && !r.low->history.empty()) os << fmt(r.low->history.back().oversampling);
      os << ",";
      if (r.comparison) os << fmt(r.comparison->phi_diff_two_norm);
      os << ",";
      if (r.comparison && r.comparison->has_psi_diff) os << fmt(r.comparison->psi_diff_two_norm);
      os << ",";
      os << (r.full ? (r.full->converged ? "1" : "0") : "") << ",";
      os << (r.low ? (r.low->converged ? "1" : "0") : "") << ",";
      if (r.comparison) os << fmt(r.comparison->speedup);
      os << ",";
      if (r.full) os << fmt(r.full->solve_seconds);
      os << ",";
      if (r.low) os << fmt(r.low->solve_seconds);
      os << "," << fmt(r.assembly_seconds) << "\n";
    }
  }

  {
    std::ofstream os(out_dir + "/history.csv");
    if (!os) throw std::runtime_error("cannot write history.csv in '" + out_dir + "'");
    os << "run_id,method,iteration,diff_two_norm,diff_inf_norm,rank,oversampling\n";
    for (const RunResult& r : results) {
      for (const SolveReport* rep : {r.full ? &*r.full : nullptr, r.low ? &*r.low : nullptr}) {
        if (!rep) continue;
        for (std::size_t i = 0; i < rep->history.size(); ++i) {
          const OuterRecord& h = rep->history[i];
          os << r.run_id << "," << rep->method << "," << (i + 1) << ","
             << fmt(h.diff_two_norm) << "," << fmt(h.diff_inf_norm) << ",";
          if (h.rank >= 0) os << h.rank << "," << fmt(h.oversampling);
          else os << ",";
          os << "\n";
        }
      }
    }
  }

  const bool single = results.size() == 1;
  for (const RunResult& r : results) {
    DGSpace space = build_dg_space(
        make_mesh(r.config.x_min, r.config.x_max, r.config.y_min, r.config.y_max,
                  r.config.nx, r.config.ny),
        r.config.degree);
    std::string suffix = single ? "" : "_" + r.run_id;
    if (r.full) {
      write_flux_file(out_dir + "/flux_fr" + suffix + ".txt", space, r.full->phi, false);
      if (log_export)
        write_flux_file(out_dir + "/flux_fr_log" + suffix + ".txt", space, r.full->phi, true);
    }
    if (r.low) {
      write_flux_file(out_dir + "/flux_lr" + suffix + ".txt", space, r.low->phi, false);
      if (log_export)
        write_flux_file(out_dir + "/flux_lr_log" + suffix + ".txt", space, r.low->phi, true);
    }
  }
}

}  // namespace rtlr
