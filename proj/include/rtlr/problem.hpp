#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtlr/diffusion.hpp"
#include "rtlr/full_rank.hpp"
#include "rtlr/operators.hpp"

namespace rtlr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Serializable scalar field over the domain (cross sections, source,
/// boundary datum).
struct FieldSpec {
  enum class Kind { Constant, Gaussian, Box, RadialTransition, LatticeMask };

  Kind kind = Kind::Constant;
  double value = 0.0;    // Constant value; Gaussian amplitude; inside value
  double outside = 0.0;  // Box / LatticeMask outside value
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // Box bounds
  double decay = 100.0;                   // Gaussian: value * exp(-decay r^2)
  double center_x = 0.0, center_y = 0.0;

  double eval(double x, double y) const;
  ScalarField function() const;
  bool is_zero() const { return kind == Kind::Constant && value == 0.0; }

  static FieldSpec constant(double v);
  static FieldSpec gaussian(double amplitude, double decay, double cx, double cy);
  static FieldSpec box(double inside, double outside, double x0, double x1,
                       double y0, double y1);
  /// sigma_s(r) = 99.9 r^4 (r^2 - 2)^2 + 0.1 for r <= 1, 100 outside:
  /// a smooth transition from a transport-dominated center to a
  /// scattering-dominated exterior.
  static FieldSpec radial_transition();
  /// `value` on the absorber blocks of the 5x5 lattice layout, `outside`
  /// elsewhere.
  static FieldSpec lattice_mask(double inside, double outside);
};

/// Absorber blocks of the lattice problem as unit cells (i, j) of [0,5]^2.
const std::vector<std::pair<int, int>>& lattice_absorber_cells();

enum class RunMode { Full, LowRank, Both };

struct SolverParams {
  double eps_si_sa = 1e-6;
  double eps_res = 1e-7;
  double eps_diff = 1e-7;
  double eps_svd = 1e-8;
  double eps_mgs = 1e-10;
  int p = 1;
  int q = 8;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  bool use_dsa = true;
  bool store_psi = true;
  bool build_factors = true;
};

struct ProblemConfig {
  std::string preset;  // informational
  double x_min = -1, x_max = 1, y_min = -1, y_max = 1;
  int nx = 32, ny = 32;
  int n_theta = 16, n_omega_z = 8;
  int degree = 1;
  FieldSpec sigma_s = FieldSpec::constant(1.0);
  FieldSpec sigma_a = FieldSpec::constant(0.0);
  FieldSpec source = FieldSpec::constant(0.0);
  FieldSpec boundary = FieldSpec::constant(0.0);
  SolverParams solver;
  RunMode mode = RunMode::Both;
};

void validate_config(const ProblemConfig& config);

/// Benchmark presets.  `name` is one of
///   homogeneous | homogeneous(sigma_s, L) | variable_scattering |
///   pin_cell | lattice
/// Desk-scale resolutions are the default; `full_resolution` selects the
/// reference 80x80 meshes (for homogeneous, resolution comes from L).
ProblemConfig make_preset(const std::string& name, bool full_resolution = false);
std::vector<std::pair<std::string, std::string>> preset_catalog();

std::string serialize_config(const ProblemConfig& config);
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig load_config_file(const std::string& path);

/// Everything both drivers share, assembled once.
struct AssembledProblem {
  DGSpace space;
  AngularQuadrature quad;
  DiscreteOperators ops;
  Vector source;
  BoundaryData bc;
  std::unique_ptr<DiffusionSystem> dsa;  // present iff solver.use_dsa
  double assembly_seconds = 0.0;
};

AssembledProblem assemble_problem(const ProblemConfig& config);

}  // namespace rtlr
