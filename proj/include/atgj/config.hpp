#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "atgj/cases.hpp"
#include "atgj/errors.hpp"

namespace atgj {

/// Flat sectioned key=value file: '[section]' headers, 'key = value' lines,
/// '#' comments. The manifest written after every run uses the same grammar,
/// so a manifest is a valid config file.
struct IniFile {
  std::vector<std::pair<std::string, std::string>> entries;  // "section.key" -> value

  static IniFile parse(std::istream& is) {
    IniFile f;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw parameter_error("config line " + std::to_string(lineno) + ": unterminated section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw parameter_error("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw parameter_error("config line " + std::to_string(lineno) + ": empty key");
      f.entries.emplace_back(section.empty() ? key : section + "." + key, val);
    }
    return f;
  }
};

/// Where a run's parameters come from: preset defaults, then config file
/// values, then command-line flags, later layers winning.
struct RunConfig {
  std::string preset;
  std::string scale = "desk";
  std::optional<int> mesh_nx, mesh_ny;

  // quadrature override block
  std::optional<std::string> quad_kind;  // "atgj" | "nc"
  std::optional<int> n, ntheta, nc_m;
  std::optional<double> alpha, lambda, theta0, t0, nc_u;
  bool alpha_matched = false;

  // solver block
  std::optional<double> cfl, steady_tol;
  std::optional<long> max_steps, report_every;
  std::optional<std::string> scheme, moments;
  std::optional<int> threads;

  std::string outdir = "out";

  /// File layer. Sections [gas] and [meta] are informational output of the
  /// manifest writer and are ignored on input; every other key must be known.
  void apply_ini(const IniFile& f) {
    for (const auto& [key, val] : f.entries) {
      if (key.rfind("meta.", 0) == 0 || key.rfind("gas.", 0) == 0) continue;
      apply_kv(key, val);
    }
  }

  void apply_kv(const std::string& key, const std::string& val) {
    auto as_int = [&](const std::string& s) {
      try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      throw parameter_error("config: bad integer for " + key);
    };
    auto as_long = [&](const std::string& s) {
      try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      throw parameter_error("config: bad integer for " + key);
    };
    auto as_double = [&](const std::string& s) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      throw parameter_error("config: bad number for " + key);
    };
    auto as_bool = [&](const std::string& s) {
      if (s == "true" || s == "1") return true;
      if (s == "false" || s == "0") return false;
      throw parameter_error("config: bad boolean for " + key);
    };

    if (key == "case.preset") preset = val;
    else if (key == "case.scale") scale = val;
    else if (key == "mesh.nx") mesh_nx = as_int(val);
    else if (key == "mesh.ny") mesh_ny = as_int(val);
    else if (key == "quadrature.kind") quad_kind = val;
    else if (key == "quadrature.n") n = as_int(val);
    else if (key == "quadrature.ntheta") ntheta = as_int(val);
    else if (key == "quadrature.theta0") theta0 = as_double(val);
    else if (key == "quadrature.alpha") alpha = as_double(val);
    else if (key == "quadrature.lambda") lambda = as_double(val);
    else if (key == "quadrature.t0") t0 = as_double(val);
    else if (key == "quadrature.alpha_matched") alpha_matched = as_bool(val);
    else if (key == "quadrature.m") nc_m = as_int(val);
    else if (key == "quadrature.u") nc_u = as_double(val);
    else if (key == "solver.cfl") cfl = as_double(val);
    else if (key == "solver.steady_tol") steady_tol = as_double(val);
    else if (key == "solver.max_steps") max_steps = as_long(val);
    else if (key == "solver.report_every") report_every = as_long(val);
    else if (key == "solver.scheme") scheme = val;
    else if (key == "solver.moments") moments = val;
    else if (key == "solver.threads") threads = as_int(val);
    else if (key == "output.dir") outdir = val;
    else throw parameter_error("config: unknown key '" + key + "'");
  }
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "cavity-kn0.001",          "cavity-kn0.1", "cavity-kn1", "cavity-kn10",
      "cavity-kn0.001-analytic", "cavity-kn0.0001-analytic",   "cylinder-ma5"};
  return names;
}

/// Everything a run needs, resolved from preset + file + flags.
struct CaseSetup {
  std::string preset, scale;
  Mesh2D mesh;
  int nx = 0, ny = 0;
  QuadratureSpec quad;
  GasModel gas;
  Macroscopics init;
  SolverConfig solver;
  bool analytic_compare = false;
  bool is_cylinder = false;
  double T_h = 0.0, T_c = 0.0;
};

inline CaseSetup resolve_case(const RunConfig& rc) {
  CaseSetup s;
  s.preset = rc.preset;
  s.scale = rc.scale;
  if (rc.scale != "desk" && rc.scale != "paper")
    throw parameter_error("scale must be 'desk' or 'paper'");
  const bool desk = rc.scale == "desk";

  auto list = [] {
    std::string all;
    for (const auto& p : preset_names()) all += (all.empty() ? "" : ", ") + p;
    return all;
  };

  if (rc.preset == "cavity-kn0.001" || rc.preset == "cavity-kn0.1" || rc.preset == "cavity-kn1" ||
      rc.preset == "cavity-kn10" || rc.preset == "cavity-kn0.001-analytic" ||
      rc.preset == "cavity-kn0.0001-analytic") {
    CavityCase c;
    if (rc.preset == "cavity-kn0.001") c = table1_case(0.001);
    else if (rc.preset == "cavity-kn0.1") c = table1_case(0.1);
    else if (rc.preset == "cavity-kn1") c = table1_case(1.0);
    else if (rc.preset == "cavity-kn10") c = table1_case(10.0);
    else if (rc.preset == "cavity-kn0.001-analytic") c = cavity_analytic_case(0.001);
    else c = cavity_analytic_case(0.0001);

    s.nx = s.ny = rc.mesh_nx.value_or(desk ? 30 : c.mesh_n);
    if (rc.mesh_ny) s.ny = *rc.mesh_ny;
    s.quad = c.quad;
    s.gas = c.gas();
    s.init = c.init();
    s.analytic_compare = c.analytic_compare;
    s.T_h = c.T_h;
    s.T_c = c.T_c;
    s.solver.max_steps = 200000;
    CavityCase sized = c;
    s.mesh = sized.mesh(s.nx);
    if (s.ny != s.nx) {
      s.mesh = Mesh2D::uniform(s.nx, s.ny, 0.0, 0.0, c.L, c.L);
      s.mesh.west = s.mesh.east = s.mesh.south = BoundaryCondition::diffuse(c.T_c);
      s.mesh.north = BoundaryCondition::diffuse(c.T_h);
    }
  } else if (rc.preset == "cylinder-ma5") {
    CylinderCase c;
    s.is_cylinder = true;
    s.nx = rc.mesh_nx.value_or(desk ? c.nx_desk : c.nx_full);
    s.ny = rc.mesh_ny.value_or(
        rc.mesh_nx ? std::max(4, static_cast<int>(std::lround(*rc.mesh_nx * (double)c.ny_full /
                                                              c.nx_full)))
                   : (desk ? c.ny_desk : c.ny_full));
    s.quad = c.quad();
    s.gas = c.gas();
    s.init = c.freestream();
    s.T_h = s.T_c = c.T_wall;
    s.mesh = c.mesh(s.nx, s.ny);
    s.solver.max_steps = 100000;
    s.solver.cfl = 0.5;  // supersonic start-up
  } else {
    throw parameter_error("unknown preset '" + rc.preset + "' (available: " + list() + ")");
  }

  // quadrature override block
  if (rc.quad_kind) {
    if (*rc.quad_kind == "nc") s.quad.kind = RuleKind::newton_cotes;
    else if (*rc.quad_kind == "atgj") s.quad.kind = RuleKind::arctan_gauss_jacobi;
    else throw parameter_error("quadrature.kind must be 'atgj' or 'nc'");
  }
  if (rc.n) s.quad.n = *rc.n;
  if (rc.ntheta) s.quad.n_theta = *rc.ntheta;
  if (rc.theta0) s.quad.theta0 = *rc.theta0;
  if (rc.lambda) s.quad.lambda = *rc.lambda;
  if (rc.alpha) s.quad.alpha = *rc.alpha;
  if (rc.t0) s.quad.T0 = *rc.t0;
  if (rc.alpha_matched) s.quad.alpha = 0.5 * pi * s.quad.lambda;
  if (rc.nc_m) {
    s.quad.kind = RuleKind::newton_cotes;
    s.quad.nc_points = *rc.nc_m;
  }
  if (rc.nc_u) s.quad.nc_halfwidth = *rc.nc_u;
  if (s.quad.kind == RuleKind::newton_cotes && !rc.nc_u) {
    // default half-width: thermal coverage for the cavity, bulk + thermal for
    // the cylinder
    s.quad.nc_halfwidth =
        (s.is_cylinder ? s.init.ux : 0.0) + 4.0 * std::sqrt(s.gas.T_ref);
  }

  // solver block
  if (rc.cfl) s.solver.cfl = *rc.cfl;
  if (rc.steady_tol) s.solver.steady_tol = *rc.steady_tol;
  if (rc.max_steps) s.solver.max_steps = *rc.max_steps;
  if (rc.report_every) s.solver.report_every = *rc.report_every;
  if (rc.scheme) {
    if (*rc.scheme == "dugks") s.solver.scheme = Scheme::dugks;
    else if (*rc.scheme == "first_order") s.solver.scheme = Scheme::first_order;
    else throw parameter_error("solver.scheme must be 'dugks' or 'first_order'");
  }
  if (rc.moments) {
    if (*rc.moments == "evolved") s.solver.moment_source = MomentSource::evolved;
    else if (*rc.moments == "measured") s.solver.moment_source = MomentSource::measured;
    else throw parameter_error("solver.moments must be 'evolved' or 'measured'");
  }
  if (rc.threads) s.solver.threads = std::max(1, *rc.threads);
  s.solver.validate();
  return s;
}

struct RunMeta {
  long steps = 0;
  double residual = 0.0;
  bool converged = false;
  double wall_time_s = 0.0;
  double mass = 0.0;
  double mass_measured = 0.0;
  std::string status = "ok";
  double oracle_error = -1.0;  // analytic-comparison runs only
};

/// All parameters that affect results, plus an informational [meta] block.
/// The output is itself a parseable config reproducing the run.
inline void write_manifest(std::ostream& os, const CaseSetup& s, const RunMeta& meta) {
  os << "[case]\n";
  os << "preset = " << s.preset << "\n";
  os << "scale = " << s.scale << "\n\n";

  os << "[mesh]\n";
  os << "nx = " << s.nx << "\n";
  os << "ny = " << s.ny << "\n\n";

  os << "[quadrature]\n";
  if (s.quad.kind == RuleKind::newton_cotes) {
    os << "kind = nc\n";
    os << "m = " << s.quad.nc_points << "\n";
    os << "u = " << format_full(s.quad.nc_halfwidth) << "\n\n";
  } else {
    os << "kind = atgj\n";
    os << "n = " << s.quad.n << "\n";
    os << "ntheta = " << s.quad.n_theta << "\n";
    os << "theta0 = " << format_full(s.quad.theta0) << "\n";
    os << "alpha = " << format_full(s.quad.alpha) << "\n";
    os << "lambda = " << format_full(s.quad.lambda) << "\n";
    os << "t0 = " << format_full(s.quad.T0) << "\n\n";
  }

  os << "[gas]\n";
  os << "pr = " << format_full(s.gas.prandtl) << "\n";
  os << "n_dof = " << s.gas.internal_dof << "\n";
  os << "kn = " << format_full(s.gas.knudsen) << "\n";
  os << "omega_v = " << format_full(s.gas.viscosity_exponent) << "\n";
  os << "t_ref = " << format_full(s.gas.T_ref) << "\n";
  os << "rho_ref = " << format_full(s.gas.rho_ref) << "\n";
  os << "l_ref = " << format_full(s.gas.L_ref) << "\n\n";

  os << "[solver]\n";
  os << "cfl = " << format_full(s.solver.cfl) << "\n";
  os << "steady_tol = " << format_full(s.solver.steady_tol) << "\n";
  os << "max_steps = " << s.solver.max_steps << "\n";
  os << "report_every = " << s.solver.report_every << "\n";
  os << "scheme = " << (s.solver.scheme == Scheme::dugks ? "dugks" : "first_order") << "\n";
  os << "moments = "
     << (s.solver.moment_source == MomentSource::evolved ? "evolved" : "measured") << "\n";
  os << "threads = " << s.solver.threads << "\n\n";

  os << "[meta]\n";
  os << "status = " << meta.status << "\n";
  os << "steps = " << meta.steps << "\n";
  os << "residual = " << format_full(meta.residual) << "\n";
  os << "converged = " << (meta.converged ? "true" : "false") << "\n";
  os << "wall_time_s = " << format_full(meta.wall_time_s) << "\n";
  os << "total_mass = " << format_full(meta.mass) << "\n";
  os << "total_mass_measured = " << format_full(meta.mass_measured) << "\n";
  if (meta.oracle_error >= 0.0)
    os << "oracle_error = " << format_full(meta.oracle_error) << "\n";
}

}  // namespace atgj
