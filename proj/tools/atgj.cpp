// Command-line front end: quadrature export, validation suites, benchmark
// runs, and profile re-extraction.
//
// Exit codes: 0 success, 1 usage/parameter error, 2 validation failure,
// 3 solver divergence.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "atgj/cases.hpp"
#include "atgj/config.hpp"
#include "atgj/solver.hpp"
#include "atgj/validation.hpp"

namespace fs = std::filesystem;
using namespace atgj;

namespace {

std::string default_outdir() {
  if (const char* env = std::getenv("ATGJ_OUTPUT_DIR")) return env;
  return "out";
}

struct QuadArgs {
  int n = 8, ntheta = 16;
  double theta0 = 0.0, alpha = 0.0, lambda = 5.0, t0 = 1.0;
  bool alpha_matched = false;
  bool nc = false;
  int m = 101;
  double u = 4.0;
  std::string out = "quad_nodes.csv";
};

int cmd_quad(const QuadArgs& a) {
  VelocitySet vs;
  double analytic = 0.0;
  if (a.nc) {
    vs = newton_cotes_set(a.m, a.u);
    analytic = 4.0 * a.u * a.u;  // plain area: the NC weight function is 1
  } else if (a.alpha <= 0.0 && !a.alpha_matched) {
    throw parameter_error("quad: provide --alpha > 0 or --alpha-matched (or --nc for Simpson)");
  } else {
    WeightParams p{a.alpha_matched ? 0.5 * pi * a.lambda : a.alpha, a.lambda, a.t0};
    vs = build_velocity_set(a.n, a.ntheta, a.theta0, p);
    analytic = analytic_total_weight(p);
  }
  std::ofstream os(a.out);
  if (!os) throw parameter_error("quad: cannot open '" + a.out + "' for writing");
  write_velocity_set_csv(os, vs);
  std::cout << "nodes: " << vs.size() << "\n"
            << "sum w_k: " << format_full(vs.weight_sum()) << "\n"
            << "analytic sum: " << format_full(analytic) << "\n"
            << "max radius: " << format_full(vs.max_radius()) << "\n"
            << "written: " << a.out << "\n";
  return 0;
}

int cmd_validate(const std::string& only, bool fault) {
  auto results = validation::run_all(only, fault);
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, (r.suite + ": " + r.name).size());
  bool all_ok = true;
  for (const auto& r : results) {
    const std::string label = r.suite + ": " + r.name;
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << label
              << std::string(width - label.size() + 2, ' ') << r.detail << "\n";
    all_ok = all_ok && r.passed;
  }
  if (!all_ok) {
    for (const auto& r : results)
      if (!r.passed) std::cout << "validation failed: " << r.suite << ": " << r.name << "\n";
    return 2;
  }
  std::cout << "all " << results.size() << " checks passed\n";
  return 0;
}

double analytic_comparison_error(const DugksSolver& solver, double T_h, double T_c) {
  auto field = MacroField::from_solver(solver);
  double worst = 0.0;
  for (auto axis : {ProfileAxis::vertical, ProfileAxis::horizontal}) {
    auto prof = extract_centerline(field, axis);
    for (std::size_t t = 0; t < prof.s.size(); ++t) {
      const double x = axis == ProfileAxis::vertical ? 0.5 : prof.s[t];
      const double y = axis == ProfileAxis::vertical ? prof.s[t] : 0.5;
      const double ref = laplace_oracle(x, y, T_h, T_c, 400);
      worst = std::max(worst, std::abs(prof.a[t] - ref) / (T_h - T_c));
    }
  }
  return worst;
}

int cmd_run(RunConfig rc, const std::string& config_path, const CLI::App* run_cmd) {
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw parameter_error("run: cannot open config '" + config_path + "'");
    auto ini = IniFile::parse(is);
    RunConfig merged;
    merged.outdir = rc.outdir;
    merged.apply_ini(ini);
    // command line beats file: re-apply every flag the user actually gave
    const auto given = [&](const char* flag) { return run_cmd->count(flag) > 0; };
    if (given("--preset")) merged.preset = rc.preset;
    if (given("--scale")) merged.scale = rc.scale;
    if (given("--outdir")) merged.outdir = rc.outdir;
    if (given("--alpha-matched")) merged.alpha_matched = true;
    auto keep = [](auto& dst, const auto& src) {
      if (src) dst = src;
    };
    keep(merged.mesh_nx, rc.mesh_nx);
    keep(merged.mesh_ny, rc.mesh_ny);
    keep(merged.quad_kind, rc.quad_kind);
    keep(merged.n, rc.n);
    keep(merged.ntheta, rc.ntheta);
    keep(merged.nc_m, rc.nc_m);
    keep(merged.alpha, rc.alpha);
    keep(merged.lambda, rc.lambda);
    keep(merged.theta0, rc.theta0);
    keep(merged.t0, rc.t0);
    keep(merged.nc_u, rc.nc_u);
    keep(merged.cfl, rc.cfl);
    keep(merged.steady_tol, rc.steady_tol);
    keep(merged.max_steps, rc.max_steps);
    keep(merged.report_every, rc.report_every);
    keep(merged.scheme, rc.scheme);
    keep(merged.moments, rc.moments);
    keep(merged.threads, rc.threads);
    rc = merged;
  }
  if (rc.preset.empty())
    throw parameter_error("run: no case selected (use --preset or a config file)");

  auto setup = resolve_case(rc);
  fs::create_directories(rc.outdir);

  auto vs = setup.quad.build();
  DugksSolver solver(setup.mesh, vs, setup.gas, setup.solver);
  solver.initialize(setup.init);

  std::cout << "case " << setup.preset << " (" << setup.scale << "): mesh " << setup.nx << "x"
            << setup.ny << ", " << vs.size() << " velocity nodes, dt "
            << format_full(solver.time_step_size()) << "\n";

  std::ofstream residual_os(rc.outdir + "/residual_history.csv");
  residual_os << "step,time,residual,mass,mass_measured\n";
  auto log_report = [&](const StepReport& r) {
    residual_os << r.step << ',' << format_full(r.time) << ',' << format_full(r.residual) << ','
                << format_full(r.mass) << ',' << format_full(r.mass_measured) << '\n';
    std::cout << "step " << r.step << "  residual " << r.residual << "  mass " << r.mass << "\n";
  };

  RunMeta meta;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto result = solver.run_to_steady(log_report);
    meta.steps = result.steps;
    meta.residual = result.residual;
    meta.converged = result.converged;
  } catch (const divergence_error& e) {
    const std::string ck_path = rc.outdir + "/last_good.checkpoint";
    solver.make_checkpoint().save(ck_path);
    meta.status = "diverged";
    meta.steps = solver.step_count();
    std::ofstream mos(rc.outdir + "/manifest.ini");
    write_manifest(mos, setup, meta);
    std::cerr << "solver divergence at step " << e.step_index << ": " << e.what()
              << "\nlast good checkpoint: " << ck_path << "\n";
    return 3;
  }
  meta.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  meta.mass = solver.total_mass();
  meta.mass_measured = solver.total_mass_measured();

  auto field = MacroField::from_solver(solver);
  {
    std::ofstream os(rc.outdir + "/field.csv");
    write_field_csv(os, field);
  }
  if (setup.is_cylinder) {
    std::ofstream os(rc.outdir + "/profile_upstream.csv");
    write_profile_csv(os, extract_centerline(field, ProfileAxis::upstream));
  } else {
    std::ofstream osv(rc.outdir + "/profile_vertical.csv");
    write_profile_csv(osv, extract_centerline(field, ProfileAxis::vertical));
    std::ofstream osh(rc.outdir + "/profile_horizontal.csv");
    write_profile_csv(osh, extract_centerline(field, ProfileAxis::horizontal));
  }
  if (setup.analytic_compare) {
    meta.oracle_error = analytic_comparison_error(solver, setup.T_h, setup.T_c);
    std::cout << "max centerline temperature error vs analytic oracle: "
              << format_full(meta.oracle_error) << " of (T_h - T_c)\n";
  }
  {
    std::ofstream os(rc.outdir + "/manifest.ini");
    write_manifest(os, setup, meta);
  }
  std::cout << (meta.converged ? "converged" : "step budget exhausted") << " after " << meta.steps
            << " steps, residual " << format_full(meta.residual) << ", wall time "
            << meta.wall_time_s << " s\noutputs in " << rc.outdir << "\n";
  return 0;
}

int cmd_profiles(const std::string& field_path, const std::string& axis,
                 const std::string& out) {
  std::ifstream is(field_path);
  if (!is) throw parameter_error("profiles: cannot open '" + field_path + "'");
  auto field = read_field_csv(is);
  ProfileAxis ax;
  if (axis == "horizontal") ax = ProfileAxis::horizontal;
  else if (axis == "vertical") ax = ProfileAxis::vertical;
  else if (axis == "upstream") ax = ProfileAxis::upstream;
  else throw parameter_error("profiles: axis must be horizontal, vertical or upstream");
  auto prof = extract_centerline(field, ax);
  std::ofstream os(out);
  if (!os) throw parameter_error("profiles: cannot open '" + out + "' for writing");
  write_profile_csv(os, prof);
  std::cout << "wrote " << prof.s.size() << " samples to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arctangent Gauss-Jacobi velocity-space quadrature and 2D Shakhov DVM solver"};
  app.require_subcommand(1);

  // ---- quad ----
  QuadArgs qa;
  auto* quad = app.add_subcommand("quad", "construct a velocity set and export nodes/weights");
  quad->add_option("--n", qa.n, "radial node count");
  quad->add_option("--ntheta", qa.ntheta, "angular node count");
  quad->add_option("--theta0", qa.theta0, "angular offset (radians)");
  quad->add_option("--alpha", qa.alpha, "weight exponent alpha");
  quad->add_option("--lambda", qa.lambda, "weight scale lambda");
  quad->add_option("--t0", qa.t0, "reference temperature T0");
  quad->add_flag("--alpha-matched", qa.alpha_matched, "set alpha = (pi/2) lambda");
  quad->add_flag("--nc", qa.nc, "composite-Simpson tensor rule instead");
  quad->add_option("--m", qa.m, "points per axis (NC)");
  quad->add_option("--u", qa.u, "half-width (NC)");
  quad->add_option("--out", qa.out, "output CSV path");

  // ---- validate ----
  std::string only;
  bool fault = false;
  auto* validate = app.add_subcommand("validate", "run the module invariant suites");
  validate->add_option("--only", only, "restrict to one suite (quadrature|kinetic|solver)");
  auto* fault_opt = validate->add_flag("--inject-fault", fault, "harness self-test hook");
  fault_opt->group("");  // hidden

  // ---- run ----
  RunConfig rc;
  rc.outdir = default_outdir();
  std::string config_path;
  auto* run = app.add_subcommand("run", "run a benchmark case to steadiness");
  run->add_option("--preset", rc.preset, "case preset name");
  run->add_option("--config", config_path, "config file (same grammar as the manifest)");
  run->add_option("--scale", rc.scale, "desk|paper")->check(CLI::IsMember({"desk", "paper"}));
  auto opt_int = [&](CLI::App* cmd, const char* name, std::optional<int>& dst, const char* help) {
    cmd->add_option_function<int>(name, [&dst](const int& v) { dst = v; }, help);
  };
  auto opt_long = [&](CLI::App* cmd, const char* name, std::optional<long>& dst,
                      const char* help) {
    cmd->add_option_function<long>(name, [&dst](const long& v) { dst = v; }, help);
  };
  auto opt_dbl = [&](CLI::App* cmd, const char* name, std::optional<double>& dst,
                     const char* help) {
    cmd->add_option_function<double>(name, [&dst](const double& v) { dst = v; }, help);
  };
  auto opt_str = [&](CLI::App* cmd, const char* name, std::optional<std::string>& dst,
                     const char* help) {
    cmd->add_option_function<std::string>(name, [&dst](const std::string& v) { dst = v; }, help);
  };
  opt_int(run, "--mesh-n", rc.mesh_nx, "override cells per side (cavity) or nx (cylinder)");
  opt_int(run, "--mesh-ny", rc.mesh_ny, "override ny");
  opt_str(run, "--quad-kind", rc.quad_kind, "atgj|nc");
  opt_int(run, "--n", rc.n, "radial node count");
  opt_int(run, "--ntheta", rc.ntheta, "angular node count");
  opt_dbl(run, "--theta0", rc.theta0, "angular offset");
  opt_dbl(run, "--alpha", rc.alpha, "weight exponent");
  opt_dbl(run, "--lambda", rc.lambda, "weight scale");
  opt_dbl(run, "--t0", rc.t0, "reference temperature T0");
  run->add_flag("--alpha-matched", rc.alpha_matched, "set alpha = (pi/2) lambda");
  opt_int(run, "--m", rc.nc_m, "NC points per axis");
  opt_dbl(run, "--u", rc.nc_u, "NC half-width");
  opt_dbl(run, "--cfl", rc.cfl, "CFL number in (0,1]");
  opt_dbl(run, "--steady-tol", rc.steady_tol, "steady-state residual tolerance");
  opt_long(run, "--max-steps", rc.max_steps, "step budget");
  opt_long(run, "--report-every", rc.report_every, "progress report stride");
  opt_str(run, "--scheme", rc.scheme, "dugks|first_order");
  opt_str(run, "--moments", rc.moments, "evolved|measured");
  opt_int(run, "--threads", rc.threads, "thread count (recorded; reductions are fixed-order)");
  run->add_option("--outdir", rc.outdir, "output directory");

  // ---- profiles ----
  std::string field_path, axis = "vertical", prof_out = "profile.csv";
  auto* profiles = app.add_subcommand("profiles", "re-extract lines from a field dump");
  profiles->add_option("--field", field_path, "field.csv produced by run")->required();
  profiles->add_option("--axis", axis, "horizontal|vertical|upstream");
  profiles->add_option("--out", prof_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*quad) return cmd_quad(qa);
    if (*validate) return cmd_validate(only, fault);
    if (*run) return cmd_run(rc, config_path, run);
    if (*profiles) return cmd_profiles(field_path, axis, prof_out);
  } catch (const divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
