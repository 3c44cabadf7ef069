#include "rtlr/problem.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace rtlr {

double FieldSpec::eval(double x, double y) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Gaussian: {
      double rx = x - center_x, ry = y - center_y;
      return value * std::exp(-decay * (rx * rx + ry * ry));
    }
    case Kind::Box:
      return (x >= x0 && x <= x1 && y >= y0 && y <= y1) ? value : outside;
    case Kind::RadialTransition: {
      double r2 = x * x + y * y;
      if (r2 > 1.0) return 100.0;
      double t = r2 - 2.0;
      return 99.9 * r2 * r2 * t * t + 0.1;
    }
    case Kind::LatticeMask: {
      for (auto [i, j] : lattice_absorber_cells())
        if (x >= i && x <= i + 1 && y >= j && y <= j + 1) return value;
      return outside;
    }
  }
  return 0.0;
}

ScalarField FieldSpec::function() const {
  FieldSpec copy = *this;
  return [copy](double x, double y) { return copy.eval(x, y); };
}

FieldSpec FieldSpec::constant(double v) {
  FieldSpec f;
  f.kind = Kind::Constant;
  f.value = v;
  return f;
}

FieldSpec FieldSpec::gaussian(double amplitude, double decay, double cx, double cy) {
  FieldSpec f;
  f.kind = Kind::Gaussian;
  f.value = amplitude;
  f.decay = decay;
  f.center_x = cx;
  f.center_y = cy;
  return f;
}

FieldSpec FieldSpec::box(double inside, double outside, double x0, double x1,
                         double y0, double y1) {
  FieldSpec f;
  f.kind = Kind::Box;
  f.value = inside;
  f.outside = outside;
  f.x0 = x0;
  f.x1 = x1;
  f.y0 = y0;
  f.y1 = y1;
  return f;
}

FieldSpec FieldSpec::radial_transition() {
  FieldSpec f;
  f.kind = Kind::RadialTransition;
  return f;
}

FieldSpec FieldSpec::lattice_mask(double inside, double outside) {
  FieldSpec f;
  f.kind = Kind::LatticeMask;
  f.value = inside;
  f.outside = outside;
  return f;
}

const std::vector<std::pair<int, int>>& lattice_absorber_cells() {
  // Checkerboard of unit absorber cells around the central source cell
  // [2,3]^2 of the [0,5]^2 domain.
  static const std::vector<std::pair<int, int>> cells = {
      {1, 1}, {3, 1}, {1, 3}, {3, 3}, {2, 0}, {0, 2}, {4, 2}, {2, 4}};
  return cells;
}

void validate_config(const ProblemConfig& c) {
  if (!(c.x_min < c.x_max) || !(c.y_min < c.y_max))
    throw ConfigError("config: empty domain");
  if (c.nx < 1 || c.ny < 1) throw ConfigError("config: cell counts must be positive");
  if (c.n_theta < 1 || c.n_omega_z < 1)
    throw ConfigError("config: quadrature orders must be positive");
  if (c.degree < 0) throw ConfigError("config: negative polynomial degree");
  const SolverParams& s = c.solver;
  for (double tol : {s.eps_si_sa, s.eps_res, s.eps_diff, s.eps_svd, s.eps_mgs})
    if (!(tol > 0.0)) throw ConfigError("config: tolerances must be positive");
  if (s.p < 1 || s.q < s.p) throw ConfigError("config: need 1 <= p <= q");
  if (s.max_iterations < 1) throw ConfigError("config: max_iterations must be positive");
}

namespace {

ProblemConfig homogeneous_preset(double sigma_s, int level) {
  if (level < 1) throw ConfigError("homogeneous preset: level must be >= 1");
  ProblemConfig c;
  char name[64];
  std::snprintf(name, sizeof name, "homogeneous(%g,%d)", sigma_s, level);
  c.preset = name;
  c.x_min = -1;
  c.x_max = 1;
  c.y_min = -1;
  c.y_max = 1;
  c.nx = c.ny = 16 * level;
  c.n_theta = 8 * level;
  c.n_omega_z = 4 * level;
  c.sigma_s = FieldSpec::constant(sigma_s);
  c.sigma_a = FieldSpec::constant(0.0);
  c.source = FieldSpec::gaussian(1.0, 100.0, 0.0, 0.0);
  return c;
}

}  // namespace

ProblemConfig make_preset(const std::string& name, bool full_resolution) {
  std::string base = name;
  std::string args;
  auto lp = name.find('(');
  if (lp != std::string::npos) {
    auto rp = name.rfind(')');
    if (rp == std::string::npos || rp < lp)
      throw ConfigError("preset: unbalanced parentheses in '" + name + "'");
    base = name.substr(0, lp);
    args = name.substr(lp + 1, rp - lp - 1);
  }

  if (base == "homogeneous") {
    double sigma = 100.0;
    int level = 2;
    if (!args.empty()) {
      char extra = 0;
      if (std::sscanf(args.c_str(), " %lf , %d %c", &sigma, &level, &extra) != 2)
        throw ConfigError("preset: expected homogeneous(sigma_s, L)");
    }
    return homogeneous_preset(sigma, level);
  }
  if (base == "variable_scattering") {
    ProblemConfig c;
    c.preset = "variable_scattering";
    c.x_min = -1;
    c.x_max = 1;
    c.y_min = -1;
    c.y_max = 1;
    c.nx = c.ny = full_resolution ? 80 : 40;
    c.n_theta = full_resolution ? 40 : 16;
    c.n_omega_z = full_resolution ? 20 : 8;
    c.sigma_s = FieldSpec::radial_transition();
    c.sigma_a = FieldSpec::constant(0.0);
    c.source = FieldSpec::gaussian(1.0, 100.0, 0.0, 0.0);
    return c;
  }
  if (base == "pin_cell") {
    ProblemConfig c;
    c.preset = "pin_cell";
    c.x_min = -1;
    c.x_max = 1;
    c.y_min = -1;
    c.y_max = 1;
    c.nx = c.ny = full_resolution ? 80 : 40;
    c.n_theta = full_resolution ? 32 : 16;
    c.n_omega_z = full_resolution ? 16 : 8;
    c.sigma_s = FieldSpec::box(0.1, 100.0, -0.5, 0.5, -0.5, 0.5);
    c.sigma_a = FieldSpec::constant(0.0);
    c.source = FieldSpec::gaussian(1.0, 100.0, 0.0, 0.0);
    return c;
  }
  if (base == "lattice") {
    ProblemConfig c;
    c.preset = "lattice";
    c.x_min = 0;
    c.x_max = 5;
    c.y_min = 0;
    c.y_max = 5;
    c.nx = c.ny = full_resolution ? 80 : 40;
    c.n_theta = full_resolution ? 32 : 16;
    c.n_omega_z = full_resolution ? 16 : 8;
    c.sigma_a = FieldSpec::lattice_mask(100.0, 0.0);
    c.sigma_s = FieldSpec::lattice_mask(0.0, 1.0);
    c.source = FieldSpec::box(1.0, 0.0, 2.0, 3.0, 2.0, 3.0);
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::pair<std::string, std::string>> preset_catalog() {
  return {
      {"homogeneous(sigma_s,L)",
       "[-1,1]^2, 16Lx16L cells, CL(8L,4L); constant scattering, Gaussian source"},
      {"variable_scattering",
       "[-1,1]^2, smooth 0.1..100 scattering ramp; 40x40 CL(16,8), full: 80x80 CL(40,20)"},
      {"pin_cell",
       "[-1,1]^2, 0.1 inside |x|,|y|<=0.5 else 100; 40x40 CL(16,8), full: 80x80 CL(32,16)"},
      {"lattice",
       "[0,5]^2 absorber checkerboard, unit source in [2,3]^2; 40x40 CL(16,8), full: 80x80 CL(32,16)"},
  };
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(FieldSpec::Kind k) {
  switch (k) {
    case FieldSpec::Kind::Constant: return "constant";
    case FieldSpec::Kind::Gaussian: return "gaussian";
    case FieldSpec::Kind::Box: return "box";
    case FieldSpec::Kind::RadialTransition: return "radial_transition";
    case FieldSpec::Kind::LatticeMask: return "lattice_mask";
  }
  return "constant";
}

FieldSpec::Kind kind_from_name(const std::string& s) {
  if (s == "constant") return FieldSpec::Kind::Constant;
  if (s == "gaussian") return FieldSpec::Kind::Gaussian;
  if (s == "box") return FieldSpec::Kind::Box;
  if (s == "radial_transition") return FieldSpec::Kind::RadialTransition;
  if (s == "lattice_mask") return FieldSpec::Kind::LatticeMask;
  throw ConfigError("unknown field kind '" + s + "'");
}

void write_field(std::ostream& os, const std::string& prefix, const FieldSpec& f) {
  os << prefix << ".kind = " << kind_name(f.kind) << "\n";
  switch (f.kind) {
    case FieldSpec::Kind::Constant:
      os << prefix << ".value = " << fmt(f.value) << "\n";
      break;
    case FieldSpec::Kind::Gaussian:
      os << prefix << ".value = " << fmt(f.value) << "\n";
      os << prefix << ".decay = " << fmt(f.decay) << "\n";
      os << prefix << ".center_x = " << fmt(f.center_x) << "\n";
      os << prefix << ".center_y = " << fmt(f.center_y) << "\n";
      break;
    case FieldSpec::Kind::Box:
      os << prefix << ".value = " << fmt(f.value) << "\n";
      os << prefix << ".outside = " << fmt(f.outside) << "\n";
      os << prefix << ".x0 = " << fmt(f.x0) << "\n";
      os << prefix << ".x1 = " << fmt(f.x1) << "\n";
      os << prefix << ".y0 = " << fmt(f.y0) << "\n";
      os << prefix << ".y1 = " << fmt(f.y1) << "\n";
      break;
    case FieldSpec::Kind::RadialTransition:
      break;
    case FieldSpec::Kind::LatticeMask:
      os << prefix << ".value = " << fmt(f.value) << "\n";
      os << prefix << ".outside = " << fmt(f.outside) << "\n";
      break;
  }
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Full: return "full";
    case RunMode::LowRank: return "lowrank";
    case RunMode::Both: return "both";
  }
  return "both";
}

RunMode mode_from_name(const std::string& s) {
  if (s == "full") return RunMode::Full;
  if (s == "lowrank") return RunMode::LowRank;
  if (s == "both") return RunMode::Both;
  throw ConfigError("unknown run mode '" + s + "'");
}

}  // namespace

std::string serialize_config(const ProblemConfig& c) {
  std::ostringstream os;
  if (!c.preset.empty()) os << "preset = " << c.preset << "\n";
  os << "domain.x_min = " << fmt(c.x_min) << "\n";
  os << "domain.x_max = " << fmt(c.x_max) << "\n";
  os << "domain.y_min = " << fmt(c.y_min) << "\n";
  os << "domain.y_max = " << fmt(c.y_max) << "\n";
  os << "mesh.nx = " << c.nx << "\n";
  os << "mesh.ny = " << c.ny << "\n";
  os << "quadrature.n_theta = " << c.n_theta << "\n";
  os << "quadrature.n_omega_z = " << c.n_omega_z << "\n";
  os << "space.degree = " << c.degree << "\n";
  write_field(os, "sigma_s", c.sigma_s);
  write_field(os, "sigma_a", c.sigma_a);
  write_field(os, "source", c.source);
  write_field(os, "boundary", c.boundary);
  const SolverParams& s = c.solver;
  os << "solver.eps_si_sa = " << fmt(s.eps_si_sa) << "\n";
  os << "solver.eps_res = " << fmt(s.eps_res) << "\n";
  os << "solver.eps_diff = " << fmt(s.eps_diff) << "\n";
  os << "solver.eps_svd = " << fmt(s.eps_svd) << "\n";
  os << "solver.eps_mgs = " << fmt(s.eps_mgs) << "\n";
  os << "solver.p = " << s.p << "\n";
  os << "solver.q = " << s.q << "\n";
  os << "solver.seed = " << s.seed << "\n";
  os << "solver.max_iterations = " << s.max_iterations << "\n";
  os << "solver.use_dsa = " << (s.use_dsa ? 1 : 0) << "\n";
  os << "solver.store_psi = " << (s.store_psi ? 1 : 0) << "\n";
  os << "solver.build_factors = " << (s.build_factors ? 1 : 0) << "\n";
  os << "run.mode = " << mode_name(c.mode) << "\n";
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number '" + v + "' for " + key);
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer '" + v + "' for " + key);
  }
}

bool apply_field_key(FieldSpec& f, const std::string& field_key, const std::string& value,
                     const std::string& full_key) {
  if (field_key == "kind") f.kind = kind_from_name(value);
  else if (field_key == "value") f.value = parse_double(value, full_key);
  else if (field_key == "outside") f.outside = parse_double(value, full_key);
  else if (field_key == "x0") f.x0 = parse_double(value, full_key);
  else if (field_key == "x1") f.x1 = parse_double(value, full_key);
  else if (field_key == "y0") f.y0 = parse_double(value, full_key);
  else if (field_key == "y1") f.y1 = parse_double(value, full_key);
  else if (field_key == "decay") f.decay = parse_double(value, full_key);
  else if (field_key == "center_x") f.center_x = parse_double(value, full_key);
  else if (field_key == "center_y") f.center_y = parse_double(value, full_key);
  else return false;
  return true;
}

}  // namespace

ProblemConfig parse_config_text(const std::string& text) {
  ProblemConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    if (key == "preset") {
      // A preset line resets every field it covers; later keys override.
      std::string mode_keep = mode_name(c.mode);
      SolverParams solver_keep = c.solver;
      c = make_preset(value);
      c.solver = solver_keep;
      c.mode = mode_from_name(mode_keep);
      continue;
    }
    auto dot = key.find('.');
    std::string section = dot == std::string::npos ? key : key.substr(0, dot);
    std::string rest = dot == std::string::npos ? "" : key.substr(dot + 1);

    if (section == "domain") {
      if (rest == "x_min") c.x_min = parse_double(value, key);
      else if (rest == "x_max") c.x_max = parse_double(value, key);
      else if (rest == "y_min") c.y_min = parse_double(value, key);
      else if (rest == "y_max") c.y_max = parse_double(value, key);
      else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "mesh") {
      if (rest == "nx") c.nx = static_cast<int>(parse_int(value, key));
      else if (rest == "ny") c.ny = static_cast<int>(parse_int(value, key));
      else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "quadrature") {
      if (rest == "n_theta") c.n_theta = static_cast<int>(parse_int(value, key));
      else if (rest == "n_omega_z") c.n_omega_z = static_cast<int>(parse_int(value, key));
      else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "space") {
      if (rest == "degree") c.degree = static_cast<int>(parse_int(value, key));
      else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "sigma_s" || section == "sigma_a" || section == "source" ||
               section == "boundary") {
      FieldSpec& f = section == "sigma_s"   ? c.sigma_s
                     : section == "sigma_a" ? c.sigma_a
                     : section == "source"  ? c.source
                                            : c.boundary;
      if (!apply_field_key(f, rest, value, key))
        throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "solver") {
      SolverParams& s = c.solver;
      if (rest == "eps_si_sa") s.eps_si_sa = parse_double(value, key);
      else if (rest == "eps_res") s.eps_res = parse_double(value, key);
      else if (rest == "eps_diff") s.eps_diff = parse_double(value, key);
      else if (rest == "eps_svd") s.eps_svd = parse_double(value, key);
      else if (rest == "eps_mgs") s.eps_mgs = parse_double(value, key);
      else if (rest == "p") s.p = static_cast<int>(parse_int(value, key));
      else if (rest == "q") s.q = static_cast<int>(parse_int(value, key));
      else if (rest == "seed") s.seed = static_cast<std::uint64_t>(parse_int(value, key));
      else if (rest == "max_iterations") s.max_iterations = static_cast<int>(parse_int(value, key));
      else if (rest == "use_dsa") s.use_dsa = parse_int(value, key) != 0;
      else if (rest == "store_psi") s.store_psi = parse_int(value, key) != 0;
      else if (rest == "build_factors") s.build_factors = parse_int(value, key) != 0;
      else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "run") {
      if (rest == "mode") c.mode = mode_from_name(value);
      else throw ConfigError("config: unknown key '" + key + "'");
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

ProblemConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

AssembledProblem assemble_problem(const ProblemConfig& config) {
  validate_config(config);
  auto t0 = std::chrono::steady_clock::now();

  AssembledProblem prob;
  SpatialMesh mesh = make_mesh(config.x_min, config.x_max, config.y_min, config.y_max,
                               config.nx, config.ny);
  prob.space = build_dg_space(mesh, config.degree);
  prob.quad = build_cl_quadrature(config.n_theta, config.n_omega_z);
  prob.ops = assemble_operators(prob.space, config.sigma_s.function(),
                                config.sigma_a.function());
  prob.source = project_source(prob.space, config.source.function());
  if (config.boundary.is_zero())
    prob.bc = BoundaryData{};
  else
    prob.bc = build_boundary_data(prob.space, prob.quad, config.boundary.function());
  if (config.solver.use_dsa)
    prob.dsa = std::make_unique<DiffusionSystem>(prob.space, prob.ops);

  auto t1 = std::chrono::steady_clock::now();
  prob.assembly_seconds = std::chrono::duration<double>(t1 - t0).count();
  return prob;
}

}  // namespace rtlr
