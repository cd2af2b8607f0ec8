#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "atgj/solver.hpp"

using namespace atgj;

namespace {

GasModel gas_kn(double kn) {
  GasModel g;
  g.knudsen = kn;
  return g;
}

Mesh2D box_mesh(int n, double wall_T) {
  auto m = Mesh2D::uniform(n, n, 0.0, 0.0, 1.0, 1.0);
  m.west = m.east = m.south = m.north = BoundaryCondition::diffuse(wall_T);
  return m;
}

Mesh2D open_mesh(int n, const Macroscopics& fs) {
  auto m = Mesh2D::uniform(n, n, 0.0, 0.0, 1.0, 1.0);
  m.west = m.east = m.south = m.north = BoundaryCondition::free_stream(fs);
  return m;
}

VelocitySet small_set() { return build_velocity_set(8, 16, 0.0, WeightParams::matched(500.0)); }

// max |change| over interior-cell distribution values (ghosts excluded)
double interior_change(const DugksSolver& s, const std::vector<double>& before) {
  const auto& f = s.field();
  double dmax = 0.0;
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      const int c = f.cid(i + 1, j + 1);
      const double* g = f.g(c);
      const double* b = before.data() + static_cast<std::size_t>(c) * 2 * f.K;
      for (int k = 0; k < 2 * f.K; ++k) dmax = std::max(dmax, std::abs(g[k] - b[k]));
    }
  return dmax;
}

}  // namespace

TEST_CASE("time step size follows the advection bound") {
  // NC set on [-2,2]^2 has max(|xi_x|+|xi_y|) = 4
  auto vs = newton_cotes_set(5, 2.0);
  auto mesh = open_mesh(60, make_state(1, 0, 0, 1));
  SolverConfig cfg;
  cfg.cfl = 0.5;
  DugksSolver s(mesh, vs, gas_kn(1.0), cfg);
  CHECK(std::abs(s.time_step_size() - 1.0 / 480.0) < 1e-18);

  // doubling all node speeds halves dt
  auto vs2 = newton_cotes_set(5, 4.0);
  DugksSolver s2(mesh, vs2, gas_kn(1.0), cfg);
  CHECK(std::abs(s2.time_step_size() - 0.5 * s.time_step_size()) < 1e-18);
}

TEST_CASE("initialize puts every fluid cell at the requested equilibrium") {
  auto vs = small_set();
  auto mesh = box_mesh(6, 1.0);
  mesh.mask_box(0.4, 0.6, 0.4, 0.6);  // one solid cell at the center region
  DugksSolver s(mesh, vs, gas_kn(1.0), SolverConfig{});
  auto init = make_state(1.2, 0.0, 0.0, 1.0);
  s.initialize(init);

  auto m = s.cell_state(0, 0);
  CHECK(m.rho == 1.2);
  CHECK(m.T == 1.0);

  const int fluid = mesh.fluid_count();
  CHECK(fluid < 36);
  CHECK(std::abs(s.total_mass() - 1.2 * fluid / 36.0) < 1e-14);

  CHECK_THROWS_AS(s.initialize(Macroscopics{1.0, 0.0, 0.0, 0.75, 0, 0, -1.0, 1.0}), state_error);
}

TEST_CASE("uniform equilibrium with freestream boundaries is a fixed point") {
  auto fs = make_state(1.0, 0.5, 0.2, 1.0);
  for (auto scheme : {Scheme::dugks, Scheme::first_order}) {
    SolverConfig cfg;
    cfg.scheme = scheme;
    DugksSolver s(open_mesh(8, fs), small_set(), gas_kn(0.1), cfg);
    s.initialize(fs);
    auto before = s.field().dist;
    double res = 0.0;
    for (int n = 0; n < 5; ++n) res = s.advance();
    const double dmax = interior_change(s, before);
    INFO("scheme=" << (scheme == Scheme::dugks ? "dugks" : "first_order"));
    CHECK(dmax < 1e-13);
    CHECK(res < 1e-13);
  }
}

TEST_CASE("freestream ghosts equal the freestream equilibrium") {
  auto fs = make_state(1.0, 0.3, -0.1, 1.1);
  DugksSolver s(open_mesh(4, fs), small_set(), gas_kn(0.1), SolverConfig{});
  s.initialize(fs);
  s.apply_boundaries();
  auto eq = equilibrium_pair(fs, s.gas(), s.velocity_set());
  const auto& f = s.field();
  const double* ghost = f.g(f.cid(0, 2));  // west ghost
  for (int k = 0; k < f.K; ++k) CHECK(ghost[k] == eq.g[k]);
}

TEST_CASE("homogeneous relaxation: monotone approach and exact ODE") {
  auto vs = small_set();
  const double ms = vs.max_axis_speed();
  auto gm = gas_kn(0.3);
  const auto state = make_state(1.0, 0.0, 0.0, 1.0);
  const double tau = relaxation_time(state, gm);

  auto run = [&](int n_steps, double t_end) {
    const double dt = t_end / n_steps;
    auto mesh = Mesh2D::uniform(1, 1, 0.0, 0.0, dt * ms, dt * ms);
    mesh.west = mesh.east = mesh.south = mesh.north = BoundaryCondition::outflow();
    SolverConfig cfg;
    cfg.cfl = 1.0;
    DugksSolver s(mesh, vs, gm, cfg);
    s.initialize(state);
    REQUIRE(std::abs(s.time_step_size() - dt) < 1e-15);

    // even perturbation of the original distribution; g~0 = g0 - (dt/2) Omega0
    auto eq = equilibrium_pair(state, gm, vs);
    DistPair g0(vs.size()), tilde(vs.size());
    for (int k = 0; k < vs.size(); ++k) {
      const double x = vs.xi_x[k], y = vs.xi_y[k];
      const double pert = 0.2 * (x * x - y * y) / (1.0 + x * x + y * y);
      g0.g[k] = eq.g[k] * (1.0 + pert);
      g0.h[k] = eq.h[k] * (1.0 - 0.5 * pert);
      tilde.g[k] = g0.g[k] - 0.5 * dt * (eq.g[k] - g0.g[k]) / tau;
      tilde.h[k] = g0.h[k] - 0.5 * dt * (eq.h[k] - g0.h[k]) / tau;
    }
    s.set_cell_distribution(0, 0, tilde);

    for (int n = 0; n < n_steps; ++n) s.advance();
    auto got = s.cell_distribution(0, 0);

    double err = 0.0;
    const double decay = std::exp(-t_end / tau);
    for (int k = 0; k < vs.size(); ++k) {
      const double exact_g = eq.g[k] + (g0.g[k] - eq.g[k]) * decay;
      const double exact_h = eq.h[k] + (g0.h[k] - eq.h[k]) * decay;
      err = std::max(err, std::abs(got.g[k] - exact_g));
      err = std::max(err, std::abs(got.h[k] - exact_h));
    }
    return err;
  };

  const double t_end = 0.6;
  const double e16 = run(16, t_end);
  const double e32 = run(32, t_end);
  const double ratio = e16 / e32;
  INFO("e16=" << e16 << " e32=" << e32 << " ratio=" << ratio);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);

  // distance to the relaxation target strictly decreases across a step
  {
    const double dt = t_end / 16;
    auto mesh = Mesh2D::uniform(1, 1, 0.0, 0.0, dt * ms, dt * ms);
    mesh.west = mesh.east = mesh.south = mesh.north = BoundaryCondition::outflow();
    SolverConfig cfg;
    cfg.cfl = 1.0;
    DugksSolver s(mesh, vs, gm, cfg);
    s.initialize(state);
    auto eq = equilibrium_pair(state, gm, vs);
    DistPair d(vs.size());
    for (int k = 0; k < vs.size(); ++k) {
      const double x = vs.xi_x[k], y = vs.xi_y[k];
      d.g[k] = eq.g[k] * (1.0 + 0.2 * (x * x - y * y) / (1.0 + x * x + y * y));
      d.h[k] = eq.h[k];
    }
    s.set_cell_distribution(0, 0, d);
    auto dist0 = [&] {
      double m = 0.0;
      const auto& f = s.field();
      const double* g = f.g(f.cid(1, 1));
      for (int k = 0; k < vs.size(); ++k) m = std::max(m, std::abs(g[k] - eq.g[k]));
      return m;
    };
    const double before = dist0();
    s.advance();
    const double after = dist0();
    CHECK(after < before);
  }
}

TEST_CASE("diffuse wall closure balances the mass flux") {
  auto vs = build_velocity_set(8, 24, 0.0, WeightParams::matched(5.0));
  GasModel gm = gas_kn(1.0);
  auto wall_state = make_state(1.0, 0.0, 0.0, 0.8);
  auto wall = equilibrium_pair(wall_state, gm, vs);

  // synthetic outgoing distribution: a warmer drifting equilibrium
  auto face = equilibrium_pair(make_state(1.3, 0.2, -0.1, 1.2), gm, vs);
  const double rho_w = diffuse_wall_density(vs, face.g.data(), wall.g.data(), 1.0, 0.0);
  CHECK(rho_w > 0.0);

  double net = 0.0, out = 0.0;
  for (int k = 0; k < vs.size(); ++k) {
    const double xin = vs.xi_x[k];
    const double val = xin > 0.0 ? face.g[k] : rho_w * wall.g[k];
    net += vs.w_eff[k] * xin * val;
    if (xin > 0.0) out += vs.w_eff[k] * xin * val;
  }
  CHECK(std::abs(net) < 1e-12 * out);

  // a set with no incoming coverage must be rejected
  VelocitySet bad = vs;
  for (auto& x : bad.xi_x) x = std::abs(x) + 0.1;
  CHECK_THROWS_AS(diffuse_wall_density(bad, face.g.data(), wall.g.data(), -1.0, 0.0),
                  config_error);
}

TEST_CASE("wall in equilibrium with the gas exchanges no heat") {
  // interior at the wall temperature: after a step the wall face leaves the
  // state unchanged up to quadrature-level noise
  auto vs = small_set();
  DugksSolver s(box_mesh(6, 1.0), vs, gas_kn(0.1), SolverConfig{});
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  const double e0 = [&] {
    double e = 0.0;
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i < 6; ++i) e += s.cell_state(i, j).rhoE;
    return e;
  }();
  for (int n = 0; n < 50; ++n) s.advance();
  double e1 = 0.0;
  double t_min = 1e300, t_max = -1e300;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) {
      auto m = s.cell_state(i, j);
      e1 += m.rhoE;
      t_min = std::min(t_min, m.T);
      t_max = std::max(t_max, m.T);
    }
  CHECK(std::abs(e1 - e0) < 1e-8 * std::abs(e0));
  CHECK(t_min > 1.0 - 1e-9);
  CHECK(t_max < 1.0 + 1e-9);
}

TEST_CASE("closed box conserves mass to round-off") {
  auto vs = build_velocity_set(8, 16, 0.0, WeightParams::matched(5.0));
  auto mesh = box_mesh(8, 4.0 / 3.0);
  mesh.south = mesh.east = mesh.west = BoundaryCondition::diffuse(2.0 / 3.0);
  DugksSolver s(mesh, vs, gas_kn(1.0), SolverConfig{});
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  const double m0 = s.total_mass();
  double worst = 0.0;
  double prev = m0;
  for (int n = 0; n < 300; ++n) {
    s.advance();
    const double m = s.total_mass();
    worst = std::max(worst, std::abs(m - prev) / m0);
    prev = m;
  }
  CHECK(worst < 1e-12);                          // per step
  CHECK(std::abs(prev - m0) / m0 < 1e-12);       // cumulative
  CHECK(std::abs(s.total_mass_measured() - m0) / m0 < 1e-3);  // monitored gap stays small
}

TEST_CASE("driven cavity keeps the mirror symmetry of its setup") {
  auto vs = small_set();
  auto mesh = box_mesh(10, 2.0 / 3.0);
  mesh.north = BoundaryCondition::diffuse(4.0 / 3.0);
  DugksSolver s(mesh, vs, gas_kn(1.0), SolverConfig{});
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  for (int n = 0; n < 400; ++n) s.advance();
  double t_asym = 0.0, u_asym = 0.0, t_range = 0.0;
  double t_lo = 1e300, t_hi = -1e300;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) {
      auto a = s.cell_state(i, j);
      auto b = s.cell_state(9 - i, j);
      t_asym = std::max(t_asym, std::abs(a.T - b.T));
      u_asym = std::max(u_asym, std::abs(a.ux + b.ux));
      t_lo = std::min(t_lo, a.T);
      t_hi = std::max(t_hi, a.T);
    }
  t_range = t_hi - t_lo;
  CHECK(t_range > 1e-3);  // the hot wall did something
  CHECK(t_asym < 1e-10 * std::max(t_range, 1.0));
  CHECK(u_asym < 1e-10);
}

TEST_CASE("symmetry boundary preserves a compatible uniform flow") {
  auto fs = make_state(1.0, 0.3, 0.0, 1.0);
  auto mesh = open_mesh(6, fs);
  mesh.north = BoundaryCondition::symmetry();
  DugksSolver s(mesh, small_set(), gas_kn(0.1), SolverConfig{});
  s.initialize(fs);
  auto before = s.field().dist;
  for (int n = 0; n < 5; ++n) s.advance();
  CHECK(interior_change(s, before) < 1e-12);
}

TEST_CASE("mirror maps flip the node set exactly") {
  auto vs = small_set();
  auto mesh = open_mesh(4, make_state(1, 0, 0, 1));
  mesh.north = BoundaryCondition::symmetry();
  DugksSolver s(mesh, vs, gas_kn(0.1), SolverConfig{});
  // indirectly verified through the ghost fill; here check the raw map property
  // via the public behaviour: a y-mirror-symmetric field stays symmetric.
  // Direct map check:
  for (int k = 0; k < vs.size(); ++k) {
    // find the mirror node by brute force
    bool found = false;
    for (int k2 = 0; k2 < vs.size(); ++k2) {
      if (std::abs(vs.xi_x[k2] - vs.xi_x[k]) < 1e-12 &&
          std::abs(vs.xi_y[k2] + vs.xi_y[k]) < 1e-12) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("checkpoint round-trips bit-exactly and resumes identically") {
  auto vs = small_set();
  auto mesh = box_mesh(6, 1.0);
  mesh.north = BoundaryCondition::diffuse(1.2);
  DugksSolver s(mesh, vs, gas_kn(0.5), SolverConfig{});
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  for (int n = 0; n < 20; ++n) s.advance();

  auto ck = s.make_checkpoint();
  const std::string path = "solver_ck_test.bin";
  ck.save(path);
  auto loaded = Checkpoint::load(path);
  std::remove(path.c_str());
  CHECK(loaded.dist == ck.dist);
  CHECK(loaded.macro == ck.macro);
  CHECK(loaded.header.step == 20);

  DugksSolver s2(mesh, vs, gas_kn(0.5), SolverConfig{});
  s2.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  s2.restore(loaded);
  CHECK(s2.step_count() == 20);
  s.advance();
  s2.advance();
  CHECK(s.field().dist == s2.field().dist);
  CHECK(s.field().macro == s2.field().macro);

  auto bad = loaded;
  bad.header.nx = 99;
  DugksSolver s3(mesh, vs, gas_kn(0.5), SolverConfig{});
  CHECK_THROWS_AS(s3.restore(bad), parameter_error);
}

TEST_CASE("run_to_steady budget semantics") {
  auto fs = make_state(1.0, 0.1, 0.0, 1.0);
  SolverConfig cfg;
  cfg.max_steps = 0;
  DugksSolver s(open_mesh(4, fs), small_set(), gas_kn(0.1), cfg);
  s.initialize(fs);
  auto r = s.run_to_steady();
  CHECK(r.steps == 0);
  CHECK_FALSE(r.converged);

  SolverConfig cfg2;
  cfg2.max_steps = 10;
  cfg2.steady_tol = 1e-6;
  DugksSolver s2(open_mesh(4, fs), small_set(), gas_kn(0.1), cfg2);
  s2.initialize(fs);
  auto r2 = s2.run_to_steady();
  CHECK(r2.converged);
  CHECK(r2.steps <= 2);
}

TEST_CASE("divergence raises after the half-step retries") {
  auto vs = small_set();
  DugksSolver s(box_mesh(4, 1.0), vs, gas_kn(0.5), SolverConfig{});
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  auto ck = s.make_checkpoint();
  for (auto& v : ck.dist) v = -1.0;  // mass goes negative everywhere
  s.restore(ck);
  try {
    s.advance();
    FAIL("expected divergence_error");
  } catch (const divergence_error& e) {
    CHECK(e.step_index == 0);
  }
}

TEST_CASE("cavity residual trails off monotonically (median over windows)") {
  auto vs = build_velocity_set(8, 16, 0.0, WeightParams::matched(5.0));
  auto mesh = box_mesh(8, 2.0 / 3.0);
  mesh.north = BoundaryCondition::diffuse(4.0 / 3.0);
  SolverConfig cfg;
  cfg.max_steps = 450;
  cfg.report_every = 1;
  cfg.steady_tol = 1e-30;  // never converges within the budget
  DugksSolver s(mesh, vs, gas_kn(1.0), cfg);
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  auto result = s.run_to_steady();
  REQUIRE(result.history.size() == 450);

  auto median_of = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> w;
    for (std::size_t t = lo; t < hi; ++t) w.push_back(result.history[t].residual);
    std::sort(w.begin(), w.end());
    return w[w.size() / 2];
  };
  const double m1 = median_of(300, 350);
  const double m2 = median_of(350, 400);
  const double m3 = median_of(400, 450);
  CHECK(m2 < m1);
  CHECK(m3 < m2);
}

TEST_CASE("measured-moment mode runs and its conservation gap is visible") {
  auto vs = build_velocity_set(8, 16, 0.0, WeightParams::matched(5.0));
  auto mesh = box_mesh(8, 4.0 / 3.0);
  SolverConfig cfg;
  cfg.moment_source = MomentSource::measured;
  DugksSolver s(mesh, vs, gas_kn(1.0), cfg);
  s.initialize(make_state(1.0, 0.0, 0.0, 1.0));
  const double m0 = s.total_mass();
  for (int n = 0; n < 200; ++n) s.advance();
  const double drift = std::abs(s.total_mass() - m0) / m0;
  CHECK(std::isfinite(drift));
  CHECK(drift < 1e-3);   // bounded...
  CHECK(drift > 1e-14);  // ...but visibly nonzero: the quadrature error is real
}
