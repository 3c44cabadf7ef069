#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rtlr/harness.hpp"

namespace py = pybind11;
using namespace rtlr;

namespace {

py::dict report_to_dict(const SolveReport& rep) {
  py::dict d;
  d["method"] = rep.method;
  d["phi"] = rep.phi;
  d["converged"] = rep.converged;
  d["iterations"] = rep.iterations;
  d["solve_seconds"] = rep.solve_seconds;
  d["psi_dofs"] = rep.psi_dofs;
  py::list diff2, diffinf, ranks, oversampling;
  for (const OuterRecord& h : rep.history) {
    diff2.append(h.diff_two_norm);
    diffinf.append(h.diff_inf_norm);
    if (h.rank >= 0) {
      ranks.append(h.rank);
      oversampling.append(h.oversampling);
    }
  }
  d["diff_two_norm"] = diff2;
  d["diff_inf_norm"] = diffinf;
  d["rank_history"] = ranks;
  d["oversampling_history"] = oversampling;
  if (rep.factors) {
    py::dict f;
    f["X"] = rep.factors->X;
    f["S"] = rep.factors->S;
    f["V"] = rep.factors->V;
    d["factors"] = f;
  }
  if (!rep.sampled_log.empty()) d["sampled_log"] = rep.sampled_log;
  return d;
}

py::dict result_to_dict(const RunResult& r) {
  py::dict d;
  d["run_id"] = r.run_id;
  d["assembly_seconds"] = r.assembly_seconds;
  if (r.full) d["full"] = report_to_dict(*r.full);
  if (r.low) d["lowrank"] = report_to_dict(*r.low);
  if (r.comparison) {
    py::dict c;
    c["speedup"] = r.comparison->speedup;
    c["compression_ratio"] = r.comparison->compression_ratio;
    c["phi_diff_two_norm"] = r.comparison->phi_diff_two_norm;
    if (r.comparison->has_psi_diff)
      c["psi_diff_two_norm"] = r.comparison->psi_diff_two_norm;
    d["comparison"] = c;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(pyrtlr, m) {
  m.doc() = "Steady-state radiative transfer: full-rank and rank-adaptive "
            "low-rank SI-DSA solvers";

  py::class_<AngularQuadrature>(m, "AngularQuadrature")
      .def_readonly("n_theta", &AngularQuadrature::n_theta)
      .def_readonly("n_omega_z", &AngularQuadrature::n_omega_z)
      .def_readonly("directions", &AngularQuadrature::directions)
      .def_readonly("weights", &AngularQuadrature::weights)
      .def("__len__", &AngularQuadrature::size);
  m.def("build_cl_quadrature", &build_cl_quadrature, py::arg("n_theta"),
        py::arg("n_omega_z"));

  py::class_<SolverParams>(m, "SolverParams")
      .def_readwrite("eps_si_sa", &SolverParams::eps_si_sa)
      .def_readwrite("eps_res", &SolverParams::eps_res)
      .def_readwrite("eps_diff", &SolverParams::eps_diff)
      .def_readwrite("eps_svd", &SolverParams::eps_svd)
      .def_readwrite("eps_mgs", &SolverParams::eps_mgs)
      .def_readwrite("p", &SolverParams::p)
      .def_readwrite("q", &SolverParams::q)
      .def_readwrite("seed", &SolverParams::seed)
      .def_readwrite("max_iterations", &SolverParams::max_iterations)
      .def_readwrite("use_dsa", &SolverParams::use_dsa)
      .def_readwrite("store_psi", &SolverParams::store_psi)
      .def_readwrite("build_factors", &SolverParams::build_factors);

  py::enum_<RunMode>(m, "RunMode")
      .value("Full", RunMode::Full)
      .value("LowRank", RunMode::LowRank)
      .value("Both", RunMode::Both);

  py::class_<ProblemConfig>(m, "ProblemConfig")
      .def(py::init<>())
      .def_readwrite("preset", &ProblemConfig::preset)
      .def_readwrite("nx", &ProblemConfig::nx)
      .def_readwrite("ny", &ProblemConfig::ny)
      .def_readwrite("n_theta", &ProblemConfig::n_theta)
      .def_readwrite("n_omega_z", &ProblemConfig::n_omega_z)
      .def_readwrite("degree", &ProblemConfig::degree)
      .def_readwrite("solver", &ProblemConfig::solver)
      .def_readwrite("mode", &ProblemConfig::mode)
      .def("serialize", &serialize_config);

  m.def("make_preset", &make_preset, py::arg("name"), py::arg("full_resolution") = false);
  m.def("parse_config", &parse_config_text, py::arg("text"));
  m.def("preset_catalog", &preset_catalog);
  m.def(
      "run",
      [](const ProblemConfig& config) { return result_to_dict(run(config)); },
      py::arg("config"),
      "Run the configured solvers; returns reports and comparison metrics.");
  m.def(
      "write_outputs",
      [](const ProblemConfig& config, const std::string& out_dir, bool log_export) {
        write_outputs({run(config)}, out_dir, log_export);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("log_export") = false);
}
