#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "atgj/errors.hpp"
#include "atgj/field.hpp"
#include "atgj/kinetic.hpp"
#include "atgj/mesh.hpp"
#include "atgj/quadrature.hpp"

namespace atgj {

enum class Scheme { dugks, first_order };

/// Where the collision term takes its conserved moments from.
///   evolved  - rho, rho*u, rho*E advance in flux form with the moments of the
///              same interface distributions the micro fluxes use; mass is then
///              conserved to round-off and uniform equilibrium stays an exact
///              fixed point of advance.
///   measured - moments re-summed from the distribution each step (textbook
///              DUGKS); conservation then carries the quadrature error of the
///              discrete equilibrium. Kept for debugging comparisons.
enum class MomentSource { evolved, measured };

struct SolverConfig {
  double cfl = 0.95;
  double steady_tol = 1e-6;
  long max_steps = 100000;
  long report_every = 100;
  Scheme scheme = Scheme::dugks;
  MomentSource moment_source = MomentSource::evolved;
  int threads = 1;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw parameter_error("SolverConfig: cfl must lie in (0,1]");
    if (!(steady_tol > 0.0)) throw parameter_error("SolverConfig: steady_tol must be positive");
    if (max_steps < 0) throw parameter_error("SolverConfig: max_steps must be >= 0");
    if (report_every < 1) throw parameter_error("SolverConfig: report_every must be >= 1");
  }
};

struct StepReport {
  long step = 0;
  double time = 0.0;
  double residual = 0.0;
  double mass = 0.0;           ///< total mass of the evolved macro field
  double mass_measured = 0.0;  ///< same integral summed from the distribution
};

struct SteadyResult {
  long steps = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<StepReport> history;
};

/// van Leer limited slope from the two one-sided differences.
inline double van_leer(double a, double b) {
  const double ab = a * b;
  return ab > 0.0 ? 2.0 * ab / (a + b) : 0.0;
}

/// Diffuse-wall density: scales the unit wall Maxwellian so the net mass flux
/// through the face vanishes. `face_g` holds the reconstructed distribution on
/// the gas side; nodes with xi.n > 0 leave the fluid. Throws config_error when
/// the set gives the face no coverage on either side.
inline double diffuse_wall_density(const VelocitySet& vs, const double* face_g,
                                   const double* wall_unit_g, double nhat_x, double nhat_y) {
  double flux_out = 0.0, flux_in_unit = 0.0;
  int n_out = 0, n_in = 0;
  for (int k = 0; k < vs.size(); ++k) {
    const double xin = vs.xi_x[k] * nhat_x + vs.xi_y[k] * nhat_y;
    if (xin > 0.0) {
      flux_out += vs.w_eff[k] * xin * face_g[k];
      ++n_out;
    } else if (xin < 0.0) {
      flux_in_unit += vs.w_eff[k] * xin * wall_unit_g[k];
      ++n_in;
    }
  }
  if (n_in == 0 || n_out == 0 || flux_in_unit == 0.0)
    throw config_error(
        "diffuse wall face has no incoming-node coverage; increase N_theta or rotate theta0");
  return -flux_out / flux_in_unit;
}

/// Finite-volume discrete-velocity solver for the reduced Shakhov pair on a
/// structured mesh.
///
/// Default scheme is the DUGKS two-half-timestep update: the evolved cell
/// state g~ = g - (dt/2) Omega advances with interface fluxes built from
/// gbar+ = g + (dt/4) Omega, reconstructed at t + dt/2 with van Leer slopes
/// and converted back to the original distribution through the implicit
/// collision weights. Diffuse walls close the face distribution with a
/// wall-temperature Maxwellian at the zero-mass-flux density; the flux uses
/// exactly the closed values, so walls are mass-tight by construction.
class DugksSolver {
 public:
  DugksSolver(Mesh2D mesh, VelocitySet vs, GasModel gas_model, SolverConfig cfg)
      : mesh_(std::move(mesh)), vs_(std::move(vs)), gas_(gas_model), cfg_(cfg) {
    mesh_.validate();
    gas_.validate();
    cfg_.validate();
    K_ = vs_.size();
    nxg_ = mesh_.nx + 2;
    nyg_ = mesh_.ny + 2;
    field_ = DistributionField(mesh_.nx, mesh_.ny, K_);
    new_field_ = DistributionField(mesh_.nx, mesh_.ny, K_);
    const std::size_t nd = field_.dist.size();
    delta_.assign(nd, 0.0);
    barp_.assign(nd, 0.0);
    sigx_.assign(nd, 0.0);
    sigy_.assign(nd, 0.0);
    face_g_.assign(K_, 0.0);
    face_h_.assign(K_, 0.0);
    geq_scratch_.assign(K_, 0.0);
    heq_scratch_.assign(K_, 0.0);
    // nodes whose face-normal speed is pure round-off (angles like pi/2 whose
    // cosine is ~1e-16): reconstruct them from both sides symmetrically, or a
    // mirror-symmetric flow picks up O(grad) asymmetry through the face moments
    tangent_tol_ = 1e-12 * vs_.max_axis_speed();
    tang_x_.resize(K_);
    tang_y_.resize(K_);
    for (int k = 0; k < K_; ++k) {
      tang_x_[k] = std::abs(vs_.xi_x[k]) < tangent_tol_;
      tang_y_[k] = std::abs(vs_.xi_y[k]) < tangent_tol_;
    }
    build_availability();
    build_wall_caches();
    check_wall_coverage();
  }

  const Mesh2D& mesh() const { return mesh_; }
  const VelocitySet& velocity_set() const { return vs_; }
  const GasModel& gas() const { return gas_; }
  const SolverConfig& config() const { return cfg_; }
  const DistributionField& field() const { return field_; }
  long step_count() const { return step_; }
  double time() const { return time_; }

  /// Set every fluid cell to the equilibrium pair of `init` (q = 0).
  void initialize(const Macroscopics& init) {
    const Macroscopics m = make_state(init.rho, init.ux, init.uy, init.T);  // validates
    auto eq = equilibrium_pair(m, gas_, vs_);
    for (int j = 0; j < mesh_.ny; ++j)
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = field_.cid(i + 1, j + 1);
        double* g = field_.g(c);
        if (mesh_.is_fluid(i, j)) {
          std::copy(eq.g.begin(), eq.g.end(), g);
          std::copy(eq.h.begin(), eq.h.end(), field_.h(c));
          set_macro(field_.m(c), m);
        } else {
          std::fill(g, g + 2 * K_, 0.0);
          set_macro(field_.m(c), make_state(1.0, 0.0, 0.0, 1.0));
        }
      }
    build_freestream_ghost_cache();
    preset_freestream_ghosts();
    if (cfg_.moment_source == MomentSource::measured) refresh_measured_macros();
    step_ = 0;
    time_ = 0.0;
    residual_scale_ = -1.0;
  }

  /// Pure advection bound: dt = cfl * min(dx,dy) / max_k(|xi_x| + |xi_y|).
  double time_step_size() const {
    return cfg_.cfl * std::min(mesh_.dx, mesh_.dy) / vs_.max_axis_speed();
  }

  /// One step. Returns the residual (L2 norm of the macroscopic change per
  /// unit time, normalized by the first step's value). A step whose state
  /// turns unphysical is retried at dt/2 up to four times before divergence
  /// is raised.
  double advance() {
    double dt = time_step_size();
    std::string last;
    for (int attempt = 0; attempt <= 4; ++attempt) {
      try {
        const double res = do_step(dt);
        ++step_;
        time_ += dt;
        return res;
      } catch (const state_error& e) {
        last = e.what();
        dt *= 0.5;
      }
    }
    throw divergence_error("advance: state stayed unphysical after 4 half-steps (" + last + ")",
                           step_);
  }

  /// Iterate advance() until the residual drops below steady_tol or the step
  /// budget runs out. Exhausting max_steps is a non-converged result, not an
  /// error.
  SteadyResult run_to_steady(const std::function<void(const StepReport&)>& progress = {}) {
    SteadyResult out;
    out.residual = std::numeric_limits<double>::infinity();
    while (step_ < cfg_.max_steps) {
      out.residual = advance();
      out.steps = step_;
      const bool report = (step_ % cfg_.report_every == 0) || out.residual < cfg_.steady_tol;
      if (report) {
        StepReport r{step_, time_, out.residual, total_mass(), total_mass_measured()};
        out.history.push_back(r);
        if (progress) progress(r);
      }
      if (out.residual < cfg_.steady_tol) {
        out.converged = true;
        break;
      }
    }
    return out;
  }

  /// Refresh ghost cells from the current state (freestream ghosts are static).
  void apply_boundaries() { fill_ghosts(); }

  /// Macroscopic state of one interior cell, heat flux included.
  Macroscopics cell_state(int i, int j) const {
    const int c = field_.cid(i + 1, j + 1);
    Macroscopics m = macro_state(field_.m(c));
    cell_heat_flux(c, m, time_step_size(), m.qx, m.qy);
    return m;
  }

  /// Overwrite the evolved distribution pair of one interior cell (custom
  /// initial data; the evolved macros are left untouched).
  void set_cell_distribution(int i, int j, const DistPair& d) {
    const int c = field_.cid(i + 1, j + 1);
    std::copy(d.g.begin(), d.g.end(), field_.g(c));
    std::copy(d.h.begin(), d.h.end(), field_.h(c));
  }

  /// Original-variable distribution g = g~ + dt/(2 tau + dt) (g_S - g~).
  DistPair cell_distribution(int i, int j) const {
    const int c = field_.cid(i + 1, j + 1);
    Macroscopics m = cell_state(i, j);
    const double dt = time_step_size();
    const double tau = relaxation_time(m, gas_);
    const double w = dt / (2.0 * tau + dt);
    auto gs = shakhov_pair(m, gas_, vs_);
    DistPair d(K_);
    const double* g = field_.g(c);
    const double* h = field_.h(c);
    for (int k = 0; k < K_; ++k) {
      d.g[k] = g[k] + w * (gs.g[k] - g[k]);
      d.h[k] = h[k] + w * (gs.h[k] - h[k]);
    }
    return d;
  }

  /// Total mass of the evolved macroscopic field over fluid cells.
  double total_mass() const {
    double s = 0.0;
    for (int j = 0; j < mesh_.ny; ++j)
      for (int i = 0; i < mesh_.nx; ++i)
        if (mesh_.is_fluid(i, j)) s += field_.m(field_.cid(i + 1, j + 1))[0];
    return s * mesh_.dx * mesh_.dy;
  }

  /// Same integral summed from the distribution; the gap to total_mass()
  /// monitors the collision quadrature error.
  double total_mass_measured() const {
    double s = 0.0;
    for (int j = 0; j < mesh_.ny; ++j)
      for (int i = 0; i < mesh_.nx; ++i)
        if (mesh_.is_fluid(i, j)) {
          const double* g = field_.g(field_.cid(i + 1, j + 1));
          double cell = 0.0;
          for (int k = 0; k < K_; ++k) cell += vs_.w_eff[k] * g[k];
          s += cell;
        }
    return s * mesh_.dx * mesh_.dy;
  }

  Checkpoint make_checkpoint() const {
    Checkpoint c;
    auto& hd = c.header;
    hd.nx = mesh_.nx;
    hd.ny = mesh_.ny;
    hd.K = K_;
    hd.dx = mesh_.dx;
    hd.dy = mesh_.dy;
    hd.x0 = mesh_.x0;
    hd.y0 = mesh_.y0;
    hd.rule_kind = vs_.kind == RuleKind::arctan_gauss_jacobi ? 0 : 1;
    hd.n_radial = vs_.n_radial;
    hd.n_theta = vs_.n_theta;
    hd.theta0 = vs_.angular.theta0;
    hd.alpha = vs_.params.alpha;
    hd.lambda = vs_.params.lambda;
    hd.T0 = vs_.params.T0;
    hd.prandtl = gas_.prandtl;
    hd.knudsen = gas_.knudsen;
    hd.omega_v = gas_.viscosity_exponent;
    hd.T_ref = gas_.T_ref;
    hd.rho_ref = gas_.rho_ref;
    hd.L_ref = gas_.L_ref;
    hd.internal_dof = gas_.internal_dof;
    hd.step = step_;
    hd.time = time_;
    c.mask.resize(mesh_.mask.size());
    for (std::size_t i = 0; i < mesh_.mask.size(); ++i)
      c.mask[i] = static_cast<std::uint8_t>(mesh_.mask[i]);
    c.dist = field_.dist;
    c.macro = field_.macro;
    return c;
  }

  void restore(const Checkpoint& c) {
    const auto& hd = c.header;
    if (hd.nx != mesh_.nx || hd.ny != mesh_.ny || hd.K != K_)
      throw parameter_error("checkpoint restore: mesh/velocity-set shape mismatch");
    if (c.dist.size() != field_.dist.size() || c.macro.size() != field_.macro.size())
      throw parameter_error("checkpoint restore: array size mismatch");
    if (c.mask.size() != mesh_.mask.size())
      throw parameter_error("checkpoint restore: mask size mismatch");
    for (std::size_t i = 0; i < c.mask.size(); ++i)
      if (c.mask[i] != static_cast<std::uint8_t>(mesh_.mask[i]))
        throw parameter_error("checkpoint restore: solid-cell mask mismatch");
    field_.dist = c.dist;
    field_.macro = c.macro;
    step_ = hd.step;
    time_ = hd.time;
    residual_scale_ = -1.0;
    build_freestream_ghost_cache();
    preset_freestream_ghosts();
  }

 private:
  Mesh2D mesh_;
  VelocitySet vs_;
  GasModel gas_;
  SolverConfig cfg_;
  int K_ = 0, nxg_ = 0, nyg_ = 0;

  DistributionField field_, new_field_;
  std::vector<double> delta_;        // w2 (g_S - g~); gbar+ = g~ + delta, g~+ = g~ + (4/3) delta
  std::vector<double> barp_;         // materialized gbar+ for every gas cell
  std::vector<double> sigx_, sigy_;  // limited slopes of gbar+
  std::vector<std::uint8_t> avail_;  // extended grid: cell carries reconstructable gas data
  std::vector<double> face_g_, face_h_, geq_scratch_, heq_scratch_;
  std::vector<std::uint8_t> tang_x_, tang_y_;
  double tangent_tol_ = 0.0;
  long step_ = 0;
  double time_ = 0.0;
  double residual_scale_ = -1.0;

  struct WallCache {
    std::vector<double> g, h;  // unit-density wall Maxwellian pair
  };
  WallCache wall_west_, wall_east_, wall_south_, wall_north_, wall_solid_;

  struct GhostCache {
    std::vector<int> cells;
    std::vector<double> g, h;  // one nodal pair, shared by all cells of the side
    double macro[4] = {0, 0, 0, 0};
  };
  std::vector<GhostCache> freestream_ghosts_;

  static void set_macro(double* mm, const Macroscopics& m) {
    mm[0] = m.rho;
    mm[1] = m.rho * m.ux;
    mm[2] = m.rho * m.uy;
    mm[3] = m.rhoE;
  }

  Macroscopics macro_state(const double* mm) const {
    Macroscopics m;
    m.rho = mm[0];
    if (!(m.rho > 0.0)) throw state_error("non-positive density");
    m.ux = mm[1] / m.rho;
    m.uy = mm[2] / m.rho;
    m.rhoE = mm[3];
    m.T = recover_temperature(m.rho, m.rhoE, m.ux, m.uy, gas_.internal_dof);
    if (!(m.T > 0.0)) throw state_error("non-positive temperature");
    m.p = m.rho * m.T;
    return m;
  }

  bool interior_fluid(int gi, int gj) const {
    return gi >= 1 && gi <= mesh_.nx && gj >= 1 && gj <= mesh_.ny &&
           mesh_.is_fluid(gi - 1, gj - 1);
  }

  static bool open_kind(BoundaryKind k) {
    return k == BoundaryKind::freestream || k == BoundaryKind::outflow ||
           k == BoundaryKind::symmetry;
  }

  void build_availability() {
    avail_.assign(static_cast<std::size_t>(nxg_) * nyg_, 0);
    for (int gj = 1; gj <= mesh_.ny; ++gj)
      for (int gi = 1; gi <= mesh_.nx; ++gi)
        avail_[field_.cid(gi, gj)] = interior_fluid(gi, gj) ? 1 : 0;
    for (int gj = 1; gj <= mesh_.ny; ++gj) {
      if (open_kind(mesh_.west.kind)) avail_[field_.cid(0, gj)] = 1;
      if (open_kind(mesh_.east.kind)) avail_[field_.cid(nxg_ - 1, gj)] = 1;
    }
    for (int gi = 1; gi <= mesh_.nx; ++gi) {
      if (open_kind(mesh_.south.kind)) avail_[field_.cid(gi, 0)] = 1;
      if (open_kind(mesh_.north.kind)) avail_[field_.cid(gi, nyg_ - 1)] = 1;
    }
  }

  WallCache make_wall_cache(const BoundaryCondition& bc) const {
    WallCache w;
    if (bc.kind != BoundaryKind::diffuse_wall) return w;
    auto m = make_state(1.0, bc.wall_ux, bc.wall_uy, bc.wall_T);
    auto pair = equilibrium_pair(m, gas_, vs_);
    w.g = std::move(pair.g);
    w.h = std::move(pair.h);
    return w;
  }

  void build_wall_caches() {
    wall_west_ = make_wall_cache(mesh_.west);
    wall_east_ = make_wall_cache(mesh_.east);
    wall_south_ = make_wall_cache(mesh_.south);
    wall_north_ = make_wall_cache(mesh_.north);
    wall_solid_ = make_wall_cache(mesh_.solid_bc);
  }

  void check_wall_coverage() const {
    const bool has_solid = mesh_.fluid_count() != mesh_.nx * mesh_.ny;
    const bool walls[4] = {mesh_.west.kind == BoundaryKind::diffuse_wall || has_solid,
                           mesh_.east.kind == BoundaryKind::diffuse_wall || has_solid,
                           mesh_.south.kind == BoundaryKind::diffuse_wall || has_solid,
                           mesh_.north.kind == BoundaryKind::diffuse_wall || has_solid};
    const double nh[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (int s = 0; s < 4; ++s) {
      if (!walls[s]) continue;
      int n_in = 0, n_out = 0;
      for (int k = 0; k < K_; ++k) {
        const double xin = vs_.xi_x[k] * nh[s][0] + vs_.xi_y[k] * nh[s][1];
        n_in += xin < 0.0;
        n_out += xin > 0.0;
      }
      if (n_in == 0 || n_out == 0)
        throw config_error(
            "velocity set leaves a diffuse wall without incoming-node coverage; increase N_theta");
    }
  }

  void build_freestream_ghost_cache() {
    freestream_ghosts_.clear();
    auto add = [&](const BoundaryCondition& bc, int count, auto cell_of) {
      if (bc.kind != BoundaryKind::freestream) return;
      GhostCache gc;
      const Macroscopics m = make_state(bc.freestream_state.rho, bc.freestream_state.ux,
                                        bc.freestream_state.uy, bc.freestream_state.T);
      auto eq = equilibrium_pair(m, gas_, vs_);
      gc.g = std::move(eq.g);
      gc.h = std::move(eq.h);
      Macroscopics mm = m;
      set_macro(gc.macro, mm);
      for (int t = 0; t < count; ++t) gc.cells.push_back(cell_of(t));
      freestream_ghosts_.push_back(std::move(gc));
    };
    add(mesh_.west, mesh_.ny, [&](int t) { return field_.cid(0, t + 1); });
    add(mesh_.east, mesh_.ny, [&](int t) { return field_.cid(nxg_ - 1, t + 1); });
    add(mesh_.south, mesh_.nx, [&](int t) { return field_.cid(t + 1, 0); });
    add(mesh_.north, mesh_.nx, [&](int t) { return field_.cid(t + 1, nyg_ - 1); });
  }

  void preset_freestream_ghosts() {
    for (const auto& gc : freestream_ghosts_) {
      for (int c : gc.cells) {
        std::copy(gc.g.begin(), gc.g.end(), field_.g(c));
        std::copy(gc.h.begin(), gc.h.end(), field_.h(c));
        std::copy(gc.macro, gc.macro + 4, field_.m(c));
        auto d = delta_.begin() + static_cast<std::size_t>(c) * 2 * K_;
        std::fill(d, d + 2 * K_, 0.0);
      }
    }
  }

  // ---- node mirror maps for symmetry ghosts ----

  std::vector<int> mirror_map(bool mirror_x) const {
    std::vector<int> map(K_);
    if (vs_.kind == RuleKind::newton_cotes) {
      const int M = vs_.n_radial;
      for (int ix = 0; ix < M; ++ix)
        for (int iy = 0; iy < M; ++iy)
          map[ix * M + iy] = mirror_x ? (M - 1 - ix) * M + iy : ix * M + (M - 1 - iy);
      return map;
    }
    const int nt = vs_.n_theta;
    if (nt % 2 != 0 || vs_.angular.theta0 != 0.0)
      throw config_error("symmetry boundary needs even N_theta and theta0 = 0");
    for (int i = 0; i < vs_.n_radial; ++i)
      for (int j = 0; j < nt; ++j) {
        const int jm =
            mirror_x ? (((nt / 2 - 2 - j) % nt) + nt) % nt : (((nt - 2 - j) % nt) + nt) % nt;
        map[i * nt + j] = i * nt + jm;
      }
    return map;
  }

  // ---- per-step machinery ----

  Macroscopics measured_state(const DistributionField& f, int c) const {
    const double* g = f.g(c);
    const double* h = f.h(c);
    double rho = 0, rux = 0, ruy = 0, rE = 0;
    for (int k = 0; k < K_; ++k) {
      const double w = vs_.w_eff[k];
      const double xi2 = vs_.xi_x[k] * vs_.xi_x[k] + vs_.xi_y[k] * vs_.xi_y[k];
      rho += w * g[k];
      rux += w * vs_.xi_x[k] * g[k];
      ruy += w * vs_.xi_y[k] * g[k];
      rE += 0.5 * w * (xi2 * g[k] + h[k]);
    }
    if (!(rho > 0.0)) throw state_error("measured: non-positive density");
    Macroscopics m;
    m.rho = rho;
    m.ux = rux / rho;
    m.uy = ruy / rho;
    m.rhoE = rE;
    m.T = recover_temperature(rho, rE, m.ux, m.uy, gas_.internal_dof);
    if (!(m.T > 0.0)) throw state_error("measured: non-positive temperature");
    m.p = rho * m.T;
    return m;
  }

  void equilibrium_nodal(const Macroscopics& m, std::vector<double>& geq,
                         std::vector<double>& heq) const {
    const double pref = m.rho / (pi * m.T);
    const double invT = 1.0 / m.T;
    const double hfac = 0.5 * (1.0 + gas_.internal_dof) * m.T;
    for (int k = 0; k < K_; ++k) {
      const double cx = vs_.xi_x[k] - m.ux, cy = vs_.xi_y[k] - m.uy;
      const double e = pref * std::exp(-(cx * cx + cy * cy) * invT);
      geq[k] = e;
      heq[k] = hfac * e;
    }
  }

  /// Heat flux of (g,h) in deviation form: the equilibrium at the cell's own
  /// moments is subtracted node-by-node, which removes the quadrature's
  /// spurious equilibrium heat flux exactly.
  void deviation_heat_flux(const double* g, const double* h, const double* geq,
                           const double* heq, const Macroscopics& m, double& qx,
                           double& qy) const {
    double sx = 0.0, sy = 0.0;
    for (int k = 0; k < K_; ++k) {
      const double cx = vs_.xi_x[k] - m.ux, cy = vs_.xi_y[k] - m.uy;
      const double c2 = cx * cx + cy * cy;
      const double e = 0.5 * vs_.w_eff[k] * (c2 * (g[k] - geq[k]) + (h[k] - heq[k]));
      sx += cx * e;
      sy += cy * e;
    }
    qx = sx;
    qy = sy;
  }

  /// Collision moments, Shakhov target and the transform increment delta of
  /// one cell.
  void cell_transform(int c, double dt) {
    Macroscopics m = cfg_.moment_source == MomentSource::evolved ? macro_state(field_.m(c))
                                                                 : measured_state(field_, c);
    const double tau = relaxation_time(m, gas_);
    const double* g = field_.g(c);
    const double* h = field_.h(c);

    equilibrium_nodal(m, geq_scratch_, heq_scratch_);
    double qx, qy;
    deviation_heat_flux(g, h, geq_scratch_.data(), heq_scratch_.data(), m, qx, qy);
    const double corr = 1.0 + gas_.prandtl * dt / (2.0 * tau);
    m.qx = qx / corr;
    m.qy = qy / corr;

    const double w2 = 1.5 * dt / (2.0 * tau + dt);
    double* dg = delta_.data() + static_cast<std::size_t>(c) * 2 * K_;
    double* dh = dg + K_;
    const double invT = 1.0 / m.T;
    const double qfac = (1.0 - gas_.prandtl) / (5.0 * m.p * m.T);
    const double n_dof = gas_.internal_dof;
    const double h_shift = 2.0 + 2.0 * n_dof / (1.0 + n_dof);
    for (int k = 0; k < K_; ++k) {
      const double cx = vs_.xi_x[k] - m.ux, cy = vs_.xi_y[k] - m.uy;
      const double c2 = cx * cx + cy * cy;
      const double cq = cx * m.qx + cy * m.qy;
      const double gs = geq_scratch_[k] * (1.0 + qfac * 4.0 * cq * (c2 * invT - 2.0));
      const double hs = heq_scratch_[k] * (1.0 + qfac * 2.0 * cq * (2.0 * c2 * invT - h_shift));
      dg[k] = w2 * (gs - g[k]);
      dh[k] = w2 * (hs - h[k]);
    }
  }

  void fill_ghosts() {
    auto copy_cell = [&](int dst, int src) {
      std::copy(field_.g(src), field_.g(src) + 2 * K_, field_.g(dst));
      std::copy(delta_.begin() + static_cast<std::size_t>(src) * 2 * K_,
                delta_.begin() + static_cast<std::size_t>(src + 1) * 2 * K_,
                delta_.begin() + static_cast<std::size_t>(dst) * 2 * K_);
      std::copy(field_.m(src), field_.m(src) + 4, field_.m(dst));
    };
    auto mirror_cell = [&](int dst, int src, const std::vector<int>& map, bool flip_x) {
      const double* gs = field_.g(src);
      const double* hs = field_.h(src);
      double* gd = field_.g(dst);
      double* hd = field_.h(dst);
      const double* ds = delta_.data() + static_cast<std::size_t>(src) * 2 * K_;
      double* dd = delta_.data() + static_cast<std::size_t>(dst) * 2 * K_;
      for (int k = 0; k < K_; ++k) {
        gd[k] = gs[map[k]];
        hd[k] = hs[map[k]];
        dd[k] = ds[map[k]];
        dd[K_ + k] = ds[K_ + map[k]];
      }
      const double* ms = field_.m(src);
      double* md = field_.m(dst);
      md[0] = ms[0];
      md[1] = flip_x ? -ms[1] : ms[1];
      md[2] = flip_x ? ms[2] : -ms[2];
      md[3] = ms[3];
    };

    auto handle_side = [&](const BoundaryCondition& bc, bool x_side, auto ghost_of,
                           auto interior_of) {
      const int n = x_side ? mesh_.ny : mesh_.nx;
      if (bc.kind == BoundaryKind::outflow) {
        for (int t = 0; t < n; ++t) copy_cell(ghost_of(t), interior_of(t));
      } else if (bc.kind == BoundaryKind::symmetry) {
        const auto map = mirror_map(x_side);
        for (int t = 0; t < n; ++t) mirror_cell(ghost_of(t), interior_of(t), map, x_side);
      }
      // freestream ghosts are preset once; diffuse walls never read theirs
    };

    handle_side(
        mesh_.west, true, [&](int t) { return field_.cid(0, t + 1); },
        [&](int t) { return field_.cid(1, t + 1); });
    handle_side(
        mesh_.east, true, [&](int t) { return field_.cid(nxg_ - 1, t + 1); },
        [&](int t) { return field_.cid(nxg_ - 2, t + 1); });
    handle_side(
        mesh_.south, false, [&](int t) { return field_.cid(t + 1, 0); },
        [&](int t) { return field_.cid(t + 1, 1); });
    handle_side(
        mesh_.north, false, [&](int t) { return field_.cid(t + 1, nyg_ - 1); },
        [&](int t) { return field_.cid(t + 1, nyg_ - 2); });
  }

  void materialize_barplus() {
    const std::size_t stride = 2 * static_cast<std::size_t>(K_);
    for (int gj = 0; gj < nyg_; ++gj)
      for (int gi = 0; gi < nxg_; ++gi) {
        const int c = field_.cid(gi, gj);
        if (!avail_[c]) continue;
        const double* g = field_.g(c);
        const double* d = delta_.data() + c * stride;
        double* b = barp_.data() + c * stride;
        for (std::size_t k = 0; k < stride; ++k) b[k] = g[k] + d[k];
      }
  }

  void compute_slopes() {
    const double inv_dx = 1.0 / mesh_.dx, inv_dy = 1.0 / mesh_.dy;
    const std::size_t stride = 2 * static_cast<std::size_t>(K_);
    for (int gj = 1; gj <= mesh_.ny; ++gj) {
      for (int gi = 1; gi <= mesh_.nx; ++gi) {
        const int c = field_.cid(gi, gj);
        if (!interior_fluid(gi, gj)) continue;
        const int cw = field_.cid(gi - 1, gj), ce = field_.cid(gi + 1, gj);
        const int cs = field_.cid(gi, gj - 1), cn = field_.cid(gi, gj + 1);
        const bool has_w = avail_[cw], has_e = avail_[ce];
        const bool has_s = avail_[cs], has_n = avail_[cn];
        const double* b = barp_.data() + c * stride;
        const double* bw = barp_.data() + cw * stride;
        const double* be = barp_.data() + ce * stride;
        const double* bs = barp_.data() + cs * stride;
        const double* bn = barp_.data() + cn * stride;
        double* sx = sigx_.data() + c * stride;
        double* sy = sigy_.data() + c * stride;
        // wall-side neighbours fall back to the one-sided difference; the
        // positivity clamp below keeps every reconstructed value strictly
        // positive, which in turn keeps face moments physical (start-up
        // vacuum pockets behind the obstacle fed back through negative
        // wall emission otherwise)
        for (std::size_t k = 0; k < stride; ++k) {
          double dl = has_w ? (b[k] - bw[k]) * inv_dx : 0.0;
          double dr = has_e ? (be[k] - b[k]) * inv_dx : 0.0;
          if (!has_w) dl = dr;
          if (!has_e) dr = dl;
          double ds = has_s ? (b[k] - bs[k]) * inv_dy : 0.0;
          double dn = has_n ? (bn[k] - b[k]) * inv_dy : 0.0;
          if (!has_s) ds = dn;
          if (!has_n) dn = ds;
          const double lim_x = 0.5 * std::max(b[k], 0.0) * inv_dx;
          const double lim_y = 0.5 * std::max(b[k], 0.0) * inv_dy;
          sx[k] = std::clamp(van_leer(dl, dr), -lim_x, lim_x);
          sy[k] = std::clamp(van_leer(ds, dn), -lim_y, lim_y);
        }
      }
    }
  }

  double do_step(double dt) {
    const double h_half = 0.5 * dt;

    for (int gj = 1; gj <= mesh_.ny; ++gj)
      for (int gi = 1; gi <= mesh_.nx; ++gi)
        if (interior_fluid(gi, gj)) cell_transform(field_.cid(gi, gj), dt);

    fill_ghosts();
    materialize_barplus();
    if (cfg_.scheme == Scheme::dugks) compute_slopes();

    // start the update from g~+ = g~ + (4/3) delta and the current macros
    for (int gj = 1; gj <= mesh_.ny; ++gj)
      for (int gi = 1; gi <= mesh_.nx; ++gi) {
        const int c = field_.cid(gi, gj);
        if (!interior_fluid(gi, gj)) continue;
        const double* g = field_.g(c);
        const double* d = delta_.data() + static_cast<std::size_t>(c) * 2 * K_;
        double* gn = new_field_.g(c);
        for (int k = 0; k < 2 * K_; ++k) gn[k] = g[k] + (4.0 / 3.0) * d[k];
        std::copy(field_.m(c), field_.m(c) + 4, new_field_.m(c));
      }

    sweep(dt, h_half, /*x_dir=*/true);
    sweep(dt, h_half, /*x_dir=*/false);

    double change2 = 0.0, state2 = 0.0;
    for (int gj = 1; gj <= mesh_.ny; ++gj)
      for (int gi = 1; gi <= mesh_.nx; ++gi) {
        const int c = field_.cid(gi, gj);
        if (!interior_fluid(gi, gj)) continue;
        if (cfg_.moment_source == MomentSource::measured) {
          Macroscopics m = measured_state(new_field_, c);
          set_macro(new_field_.m(c), m);
        }
        const double* mn = new_field_.m(c);
        const double* mo = field_.m(c);
        for (int q = 0; q < 4; ++q) {
          if (!std::isfinite(mn[q])) throw state_error("non-finite macroscopic state");
          const double diff = mn[q] - mo[q];
          change2 += diff * diff;
          state2 += mn[q] * mn[q];
        }
        macro_state(mn);  // throws state_error on rho <= 0 or T <= 0
      }

    std::swap(field_.dist, new_field_.dist);
    std::swap(field_.macro, new_field_.macro);
    preset_freestream_ghosts();

    // changes at the rounding level of the state are indistinguishable from
    // a steady field; report them as zero residual
    const double raw = std::sqrt(change2) / dt;
    const double noise =
        32.0 * std::numeric_limits<double>::epsilon() * std::sqrt(state2) / dt;
    if (raw <= noise) return 0.0;
    if (residual_scale_ < 0.0) residual_scale_ = raw;
    return residual_scale_ > 0.0 ? raw / residual_scale_ : 0.0;
  }

  void sweep(double dt, double h_half, bool x_dir) {
    const int n_outer = x_dir ? mesh_.ny : mesh_.nx;
    const int n_faces = (x_dir ? mesh_.nx : mesh_.ny) + 1;
    const double scale = dt / (x_dir ? mesh_.dx : mesh_.dy);

    for (int o = 0; o < n_outer; ++o) {
      for (int f = 0; f < n_faces; ++f) {
        const int Lg = x_dir ? field_.cid(f, o + 1) : field_.cid(o + 1, f);
        const int Rg = x_dir ? field_.cid(f + 1, o + 1) : field_.cid(o + 1, f + 1);
        const bool fl = x_dir ? interior_fluid(f, o + 1) : interior_fluid(o + 1, f);
        const bool fr = x_dir ? interior_fluid(f + 1, o + 1) : interior_fluid(o + 1, f + 1);
        if (!fl && !fr) continue;

        const bool gasL = fl || avail_[Lg];
        const bool gasR = fr || avail_[Rg];

        if (gasL && gasR) {
          reconstruct_face(Lg, Rg, h_half, x_dir);
          if (cfg_.scheme == Scheme::dugks) transform_face(h_half);
        } else {
          const bool gas_left = gasL;
          wall_face(gas_left ? Lg : Rg, gas_left, h_half, x_dir,
                    wall_for_face(x_dir, f, n_faces, gas_left));
        }

        accumulate_flux(Lg, Rg, fl, fr, scale, x_dir);
      }
    }
  }

  const WallCache& wall_for_face(bool x_dir, int f, int n_faces, bool gas_left) const {
    if (f == 0 && !gas_left) return x_dir ? wall_west_ : wall_south_;
    if (f == n_faces - 1 && gas_left) return x_dir ? wall_east_ : wall_north_;
    return wall_solid_;
  }

  void reconstruct_face(int Lg, int Rg, double h_half, bool x_dir) {
    const double half = 0.5 * (x_dir ? mesh_.dx : mesh_.dy);
    const std::size_t stride = 2 * static_cast<std::size_t>(K_);
    const double* bL = barp_.data() + Lg * stride;
    const double* bR = barp_.data() + Rg * stride;
    const bool first_order = cfg_.scheme == Scheme::first_order;
    const double* sLx = sigx_.data() + Lg * stride;
    const double* sLy = sigy_.data() + Lg * stride;
    const double* sRx = sigx_.data() + Rg * stride;
    const double* sRy = sigy_.data() + Rg * stride;

    for (int k = 0; k < K_; ++k) {
      const double xin = x_dir ? vs_.xi_x[k] : vs_.xi_y[k];
      const double xit = x_dir ? vs_.xi_y[k] : vs_.xi_x[k];
      const bool tangential = x_dir ? tang_x_[k] : tang_y_[k];
      if (tangential) {
        if (first_order) {
          face_g_[k] = 0.5 * (bL[k] + bR[k]);
          face_h_[k] = 0.5 * (bL[K_ + k] + bR[K_ + k]);
          continue;
        }
        const double off_t = -xit * h_half;
        const double* snL = x_dir ? sLx : sLy;
        const double* stL = x_dir ? sLy : sLx;
        const double* snR = x_dir ? sRx : sRy;
        const double* stR = x_dir ? sRy : sRx;
        face_g_[k] = 0.5 * (bL[k] + half * snL[k] + off_t * stL[k] + bR[k] - half * snR[k] +
                            off_t * stR[k]);
        face_h_[k] = 0.5 * (bL[K_ + k] + half * snL[K_ + k] + off_t * stL[K_ + k] + bR[K_ + k] -
                            half * snR[K_ + k] + off_t * stR[K_ + k]);
        continue;
      }
      const bool up_left = xin >= 0.0;
      if (first_order) {
        face_g_[k] = up_left ? bL[k] : bR[k];
        face_h_[k] = up_left ? bL[K_ + k] : bR[K_ + k];
        continue;
      }
      const double off_n = (up_left ? half : -half) - xin * h_half;
      const double off_t = -xit * h_half;
      const double* b = up_left ? bL : bR;
      const double* sn = x_dir ? (up_left ? sLx : sRx) : (up_left ? sLy : sRy);
      const double* st = x_dir ? (up_left ? sLy : sRy) : (up_left ? sLx : sRx);
      face_g_[k] = b[k] + off_n * sn[k] + off_t * st[k];
      face_h_[k] = b[K_ + k] + off_n * sn[K_ + k] + off_t * st[K_ + k];
    }
  }

  /// face moments, then g = gbar + w (g_S - gbar) at the face. A face whose
  /// reconstructed moments are unphysical (strong-shock start-up transients)
  /// keeps the bare gbar values: the collision correction is skipped locally
  /// instead of poisoning the step, and the flux stays conservative since it
  /// is built from the same face values either way.
  void transform_face(double h_half) {
    double rho = 0, rux = 0, ruy = 0, rE = 0;
    for (int k = 0; k < K_; ++k) {
      const double w = vs_.w_eff[k];
      const double xi2 = vs_.xi_x[k] * vs_.xi_x[k] + vs_.xi_y[k] * vs_.xi_y[k];
      rho += w * face_g_[k];
      rux += w * vs_.xi_x[k] * face_g_[k];
      ruy += w * vs_.xi_y[k] * face_g_[k];
      rE += 0.5 * w * (xi2 * face_g_[k] + face_h_[k]);
    }
    if (!(rho > 0.0)) return;
    Macroscopics m;
    m.rho = rho;
    m.ux = rux / rho;
    m.uy = ruy / rho;
    m.rhoE = rE;
    m.T = recover_temperature(rho, rE, m.ux, m.uy, gas_.internal_dof);
    if (!(m.T > 0.0)) return;
    m.p = rho * m.T;

    const double tau = relaxation_time(m, gas_);
    equilibrium_nodal(m, geq_scratch_, heq_scratch_);
    double qx, qy;
    deviation_heat_flux(face_g_.data(), face_h_.data(), geq_scratch_.data(), heq_scratch_.data(),
                        m, qx, qy);
    const double corr = 1.0 + gas_.prandtl * h_half / (2.0 * tau);
    m.qx = qx / corr;
    m.qy = qy / corr;

    const double wf = h_half / (2.0 * tau + h_half);
    const double invT = 1.0 / m.T;
    const double qfac = (1.0 - gas_.prandtl) / (5.0 * m.p * m.T);
    const double n_dof = gas_.internal_dof;
    const double h_shift = 2.0 + 2.0 * n_dof / (1.0 + n_dof);
    for (int k = 0; k < K_; ++k) {
      const double cx = vs_.xi_x[k] - m.ux, cy = vs_.xi_y[k] - m.uy;
      const double c2 = cx * cx + cy * cy;
      const double cq = cx * m.qx + cy * m.qy;
      const double gs = geq_scratch_[k] * (1.0 + qfac * 4.0 * cq * (c2 * invT - 2.0));
      const double hs = heq_scratch_[k] * (1.0 + qfac * 2.0 * cq * (2.0 * c2 * invT - h_shift));
      face_g_[k] += wf * (gs - face_g_[k]);
      face_h_[k] += wf * (hs - face_h_[k]);
    }
  }

  /// Reconstruct the outgoing half from the gas side and close the incoming
  /// half with the wall Maxwellian at the flux-balancing density.
  void wall_face(int gas_cell, bool gas_left, double h_half, bool x_dir, const WallCache& wall) {
    const double half = 0.5 * (x_dir ? mesh_.dx : mesh_.dy);
    const std::size_t stride = 2 * static_cast<std::size_t>(K_);
    const double* b = barp_.data() + gas_cell * stride;
    const double* sx = sigx_.data() + gas_cell * stride;
    const double* sy = sigy_.data() + gas_cell * stride;
    const bool first_order = cfg_.scheme == Scheme::first_order;
    const double nhx = x_dir ? (gas_left ? 1.0 : -1.0) : 0.0;
    const double nhy = x_dir ? 0.0 : (gas_left ? 1.0 : -1.0);

    for (int k = 0; k < K_; ++k) {
      face_g_[k] = b[k];
      face_h_[k] = b[K_ + k];
      if (first_order) continue;
      const double xin = x_dir ? vs_.xi_x[k] : vs_.xi_y[k];
      const double xit = x_dir ? vs_.xi_y[k] : vs_.xi_x[k];
      const double off_n = (gas_left ? half : -half) - xin * h_half;
      const double off_t = -xit * h_half;
      const double* sn = x_dir ? sx : sy;
      const double* st = x_dir ? sy : sx;
      face_g_[k] += off_n * sn[k] + off_t * st[k];
      face_h_[k] += off_n * sn[K_ + k] + off_t * st[K_ + k];
    }

    double flux_out = 0.0;
    for (int k = 0; k < K_; ++k) {
      const double xin = vs_.xi_x[k] * nhx + vs_.xi_y[k] * nhy;
      if (xin > 0.0) flux_out += vs_.w_eff[k] * xin * face_g_[k];
    }
    if (!(flux_out > 0.0)) {
      // reconstruction undershot into negative mass (start-up transients);
      // close the face for this step rather than emit a negative wall density
      std::fill(face_g_.begin(), face_g_.end(), 0.0);
      std::fill(face_h_.begin(), face_h_.end(), 0.0);
      return;
    }
    const double rho_w = diffuse_wall_density(vs_, face_g_.data(), wall.g.data(), nhx, nhy);
    for (int k = 0; k < K_; ++k) {
      const double xin = vs_.xi_x[k] * nhx + vs_.xi_y[k] * nhy;
      if (xin < 0.0) {
        face_g_[k] = rho_w * wall.g[k];
        face_h_[k] = rho_w * wall.h[k];
      }
    }
  }

  void accumulate_flux(int Lg, int Rg, bool fl, bool fr, double scale, bool x_dir) {
    double f0 = 0, f1 = 0, f2 = 0, f3 = 0;
    double* gL = fl ? new_field_.g(Lg) : nullptr;
    double* hL = fl ? new_field_.h(Lg) : nullptr;
    double* gR = fr ? new_field_.g(Rg) : nullptr;
    double* hR = fr ? new_field_.h(Rg) : nullptr;
    for (int k = 0; k < K_; ++k) {
      const double xin = x_dir ? vs_.xi_x[k] : vs_.xi_y[k];
      const double fg = xin * face_g_[k];
      const double fh = xin * face_h_[k];
      if (gL) {
        gL[k] -= scale * fg;
        hL[k] -= scale * fh;
      }
      if (gR) {
        gR[k] += scale * fg;
        hR[k] += scale * fh;
      }
      const double w = vs_.w_eff[k];
      const double xi2 = vs_.xi_x[k] * vs_.xi_x[k] + vs_.xi_y[k] * vs_.xi_y[k];
      f0 += w * fg;
      f1 += w * vs_.xi_x[k] * fg;
      f2 += w * vs_.xi_y[k] * fg;
      f3 += 0.5 * w * (xi2 * fg + fh);
    }
    if (cfg_.moment_source == MomentSource::evolved) {
      if (fl) {
        double* m = new_field_.m(Lg);
        m[0] -= scale * f0;
        m[1] -= scale * f1;
        m[2] -= scale * f2;
        m[3] -= scale * f3;
      }
      if (fr) {
        double* m = new_field_.m(Rg);
        m[0] += scale * f0;
        m[1] += scale * f1;
        m[2] += scale * f2;
        m[3] += scale * f3;
      }
    }
  }

  void cell_heat_flux(int c, const Macroscopics& m, double dt, double& qx, double& qy) const {
    const double pref = m.rho / (pi * m.T);
    const double invT = 1.0 / m.T;
    const double hfac = 0.5 * (1.0 + gas_.internal_dof) * m.T;
    const double* g = field_.g(c);
    const double* h = field_.h(c);
    double sx = 0.0, sy = 0.0;
    for (int k = 0; k < K_; ++k) {
      const double cx = vs_.xi_x[k] - m.ux, cy = vs_.xi_y[k] - m.uy;
      const double c2 = cx * cx + cy * cy;
      const double geq = pref * std::exp(-c2 * invT);
      const double e = 0.5 * vs_.w_eff[k] * (c2 * (g[k] - geq) + (h[k] - hfac * geq));
      sx += cx * e;
      sy += cy * e;
    }
    const double tau = relaxation_time(m, gas_);
    const double corr = 1.0 + gas_.prandtl * dt / (2.0 * tau);
    qx = sx / corr;
    qy = sy / corr;
  }

  void refresh_measured_macros() {
    for (int gj = 1; gj <= mesh_.ny; ++gj)
      for (int gi = 1; gi <= mesh_.nx; ++gi)
        if (interior_fluid(gi, gj)) {
          const int c = field_.cid(gi, gj);
          set_macro(field_.m(c), measured_state(field_, c));
        }
  }
};

}  // namespace atgj
