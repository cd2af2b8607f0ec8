#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "atgj/errors.hpp"
#include "atgj/numeric.hpp"
#include "atgj/solver.hpp"

namespace atgj {

/// Velocity-set recipe, resolvable to a VelocitySet.
struct QuadratureSpec {
  RuleKind kind = RuleKind::arctan_gauss_jacobi;
  int n = 8;
  int n_theta = 16;
  double theta0 = 0.0;
  double alpha = 0.5 * pi * 5.0;
  double lambda = 5.0;
  double T0 = 1.0;
  int nc_points = 101;      // Newton-Cotes kind
  double nc_halfwidth = 4.0;

  VelocitySet build() const {
    if (kind == RuleKind::newton_cotes) return newton_cotes_set(nc_points, nc_halfwidth);
    return build_velocity_set(n, n_theta, theta0, WeightParams{alpha, lambda, T0});
  }
};

/// Temperature-discontinuity-induced cavity: unit box, hot top wall, cold
/// remaining walls, all diffuse and at rest. Temperatures are in code units
/// (reference 300 K scaled to 1).
struct CavityCase {
  double L = 1.0;
  double T_h = 400.0 / 300.0;
  double T_c = 200.0 / 300.0;
  double T_ref = 1.0;
  double Kn = 1.0;
  QuadratureSpec quad;
  int mesh_n = 60;  // paper-scale cells per side
  bool analytic_compare = false;

  GasModel gas() const {
    GasModel g;
    g.knudsen = Kn;
    g.L_ref = L;
    g.T_ref = T_ref;
    return g;
  }

  Mesh2D mesh(int n_cells) const {
    auto m = Mesh2D::uniform(n_cells, n_cells, 0.0, 0.0, L, L);
    m.west = m.east = m.south = BoundaryCondition::diffuse(T_c);
    m.north = BoundaryCondition::diffuse(T_h);
    return m;
  }

  Macroscopics init() const { return make_state(1.0, 0.0, 0.0, 1.0); }
};

/// Table-1 cavity presets: the ATGJ row (n x N_theta, lambda) per Knudsen
/// number, with alpha = (pi/2) lambda throughout.
inline CavityCase table1_case(double kn) {
  CavityCase c;
  c.Kn = kn;
  auto matched = [](int n, int nt, double lambda) {
    QuadratureSpec q;
    q.n = n;
    q.n_theta = nt;
    q.lambda = lambda;
    q.alpha = 0.5 * pi * lambda;
    return q;
  };
  if (kn == 0.001)
    c.quad = matched(8, 16, 500.0);
  else if (kn == 0.1)
    c.quad = matched(8, 45, 5.0);
  else if (kn == 1.0)
    c.quad = matched(8, 60, 5.0);
  else if (kn == 10.0)
    c.quad = matched(8, 90, 5.0);
  else
    throw parameter_error(
        "table1_case: unknown Knudsen preset (available: 0.001, 0.1, 1, 10)");
  return c;
}

/// Near-continuum variant with small-difference wall temperatures (301/300),
/// the regime in which the steady temperature field obeys the Laplace
/// equation. Both Kn = 0.001 and Kn = 0.0001 are exposed.
inline CavityCase cavity_analytic_case(double kn) {
  if (kn != 0.001 && kn != 0.0001)
    throw parameter_error("cavity_analytic_case: kn must be 0.001 or 0.0001");
  CavityCase c = table1_case(0.001);
  c.Kn = kn;
  c.T_h = 301.0 / 300.0;
  c.T_c = 1.0;
  c.analytic_compare = true;
  return c;
}

/// Supersonic square-cylinder case. The domain extents and mesh resolution are
/// artifact choices (upstream 7.5D, downstream 15D, lateral +-10D; cell count
/// near 33,300 at full scale); the freestream and quadrature parameters are
/// the published ones.
struct CylinderCase {
  double Ma = 5.0;
  double Kn = 0.1;
  double T_inf = 1.0;
  double rho_inf = 1.0;
  double u_inf = 4.56;
  double T_wall = 1.0;
  double D = 1.0;
  double alpha = 20.0;
  double lambda = 2.0 * 20.0 / pi + 20.0;
  int n_radial = 20;
  int n_theta = 60;

  double upstream = 7.5, downstream = 15.0, lateral = 10.0;
  int nx_full = 198, ny_full = 168;  // 33264 control volumes
  int nx_desk = 50, ny_desk = 42;

  QuadratureSpec quad() const {
    QuadratureSpec q;
    q.n = n_radial;
    q.n_theta = n_theta;
    q.alpha = alpha;
    q.lambda = lambda;
    return q;
  }

  GasModel gas() const {
    GasModel g;
    g.knudsen = Kn;
    g.L_ref = D;
    g.T_ref = T_inf;
    g.rho_ref = rho_inf;
    return g;
  }

  Macroscopics freestream() const { return make_state(rho_inf, u_inf, 0.0, T_inf); }

  Mesh2D mesh(int nx, int ny, bool with_obstacle = true) const {
    auto m = Mesh2D::uniform(nx, ny, -upstream * D, -lateral * D, (upstream + downstream + D) * D,
                             2.0 * lateral * D);
    m.west = m.south = m.north = BoundaryCondition::free_stream(freestream());
    m.east = BoundaryCondition::outflow();
    m.solid_bc = BoundaryCondition::diffuse(T_wall);
    if (with_obstacle) m.mask_box(0.0, D, -0.5 * D, 0.5 * D);
    return m;
  }
};

/// Series solution of the steady heat equation on the unit square with the
/// top edge at T_h and the other edges at T_c, truncated at `terms`. Values
/// are clamped to the physical range (the exact solution obeys the maximum
/// principle; the truncated series can overshoot near the top corners).
inline double laplace_oracle(double x, double y, double T_h, double T_c, int terms) {
  if (terms < 1) throw parameter_error("laplace_oracle: terms must be >= 1");
  double s = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double kpi = k * pi;
    const double coeff = (2.0 / kpi) * (1.0 - std::cos(kpi));
    if (coeff == 0.0) continue;
    // sinh(k pi y)/sinh(k pi), evaluated without overflow
    const double ratio =
        std::exp(kpi * (y - 1.0)) * (1.0 - std::exp(-2.0 * kpi * y)) / (1.0 - std::exp(-2.0 * kpi));
    s += coeff * std::sin(kpi * x) * ratio;
  }
  const double T = T_c + (T_h - T_c) * s;
  return std::min(std::max(T, std::min(T_c, T_h)), std::max(T_c, T_h));
}

/// Cell-centred macroscopic snapshot, the unit of file export and profile
/// extraction.
struct MacroField {
  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, dx = 0, dy = 0;
  std::vector<std::uint8_t> fluid;
  std::vector<double> rho, ux, uy, T, qx, qy;

  static MacroField from_solver(const DugksSolver& s) {
    const auto& mesh = s.mesh();
    MacroField f;
    f.nx = mesh.nx;
    f.ny = mesh.ny;
    f.x0 = mesh.x0;
    f.y0 = mesh.y0;
    f.dx = mesh.dx;
    f.dy = mesh.dy;
    const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny;
    f.fluid.assign(n, 0);
    f.rho.assign(n, 0.0);
    f.ux.assign(n, 0.0);
    f.uy.assign(n, 0.0);
    f.T.assign(n, 0.0);
    f.qx.assign(n, 0.0);
    f.qy.assign(n, 0.0);
    for (int j = 0; j < f.ny; ++j)
      for (int i = 0; i < f.nx; ++i) {
        if (!mesh.is_fluid(i, j)) continue;
        const std::size_t c = static_cast<std::size_t>(j) * f.nx + i;
        const auto m = s.cell_state(i, j);
        f.fluid[c] = 1;
        f.rho[c] = m.rho;
        f.ux[c] = m.ux;
        f.uy[c] = m.uy;
        f.T[c] = m.T;
        f.qx[c] = m.qx;
        f.qy[c] = m.qy;
      }
    return f;
  }

  double xc(int i) const { return x0 + (i + 0.5) * dx; }
  double yc(int j) const { return y0 + (j + 0.5) * dy; }
  bool is_fluid(int i, int j) const { return fluid[static_cast<std::size_t>(j) * nx + i] != 0; }
  double at(const std::vector<double>& col, int i, int j) const {
    return col[static_cast<std::size_t>(j) * nx + i];
  }
};

/// Field dump: one row per fluid cell, cell order (j outer, i inner).
inline void write_field_csv(std::ostream& os, const MacroField& f) {
  os << "x,y,rho,ux,uy,T,qx,qy\n";
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      if (!f.is_fluid(i, j)) continue;
      const std::size_t c = static_cast<std::size_t>(j) * f.nx + i;
      os << format_full(f.xc(i)) << ',' << format_full(f.yc(j)) << ',' << format_full(f.rho[c])
         << ',' << format_full(f.ux[c]) << ',' << format_full(f.uy[c]) << ','
         << format_full(f.T[c]) << ',' << format_full(f.qx[c]) << ',' << format_full(f.qy[c])
         << '\n';
    }
}

/// Rebuild a MacroField from a field dump (grid inferred from the coordinate
/// columns; cells absent from the file are non-fluid).
inline MacroField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,", 0) != 0)
    throw parameter_error("field csv: missing x,y header");
  struct Row {
    double v[8];
  };
  std::vector<Row> rows;
  std::vector<double> xs, ys;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Row r;
    std::stringstream ss(line);
    std::string tok;
    for (int c = 0; c < 8; ++c) {
      if (!std::getline(ss, tok, ',')) throw parameter_error("field csv: short row");
      r.v[c] = std::stod(tok);
    }
    rows.push_back(r);
    xs.push_back(r.v[0]);
    ys.push_back(r.v[1]);
  }
  if (rows.empty()) throw parameter_error("field csv: no data rows");

  auto uniq = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> u;
    for (double x : v)
      if (u.empty() || x - u.back() > 1e-12 * (1.0 + std::abs(x))) u.push_back(x);
    return u;
  };
  const auto ux_ = uniq(xs);
  const auto uy_ = uniq(ys);
  MacroField f;
  f.nx = static_cast<int>(ux_.size());
  f.ny = static_cast<int>(uy_.size());
  f.dx = f.nx > 1 ? (ux_.back() - ux_.front()) / (f.nx - 1) : 1.0;
  f.dy = f.ny > 1 ? (uy_.back() - uy_.front()) / (f.ny - 1) : 1.0;
  f.x0 = ux_.front() - 0.5 * f.dx;
  f.y0 = uy_.front() - 0.5 * f.dy;
  const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny;
  f.fluid.assign(n, 0);
  f.rho.assign(n, 0.0);
  f.ux.assign(n, 0.0);
  f.uy.assign(n, 0.0);
  f.T.assign(n, 0.0);
  f.qx.assign(n, 0.0);
  f.qy.assign(n, 0.0);
  for (const auto& r : rows) {
    const int i = static_cast<int>(std::lround((r.v[0] - f.x0) / f.dx - 0.5));
    const int j = static_cast<int>(std::lround((r.v[1] - f.y0) / f.dy - 0.5));
    if (i < 0 || i >= f.nx || j < 0 || j >= f.ny)
      throw parameter_error("field csv: row does not sit on the inferred grid");
    const std::size_t c = static_cast<std::size_t>(j) * f.nx + i;
    f.fluid[c] = 1;
    f.rho[c] = r.v[2];
    f.ux[c] = r.v[3];
    f.uy[c] = r.v[4];
    f.T[c] = r.v[5];
    f.qx[c] = r.v[6];
    f.qy[c] = r.v[7];
  }
  return f;
}

enum class ProfileAxis { horizontal, vertical, upstream };

/// Samples along an extraction line with monotone coordinates. Column meaning
/// depends on the axis: cavity lines carry (T, ux, uy); the upstream line
/// carries (T, ux, rho*ux) where rho*ux stands in for the density flux.
struct CenterlineProfile {
  ProfileAxis axis = ProfileAxis::vertical;
  std::vector<double> s;
  std::vector<double> a, b, c;
};

inline CenterlineProfile extract_centerline(const MacroField& f, ProfileAxis axis) {
  CenterlineProfile p;
  p.axis = axis;

  auto interp = [&](const std::vector<double>& col, double frac, int lo, int hi,
                    bool along_x, int other) {
    const double v0 = along_x ? f.at(col, lo, other) : f.at(col, other, lo);
    const double v1 = along_x ? f.at(col, hi, other) : f.at(col, other, hi);
    return v0 + frac * (v1 - v0);
  };

  if (axis == ProfileAxis::vertical || axis == ProfileAxis::horizontal) {
    const bool vertical = axis == ProfileAxis::vertical;
    // position of the mid-domain line in index space of the crossing direction
    const int n_cross = vertical ? f.nx : f.ny;
    const int n_along = vertical ? f.ny : f.nx;
    const double target = vertical ? f.x0 + 0.5 * f.nx * f.dx : f.y0 + 0.5 * f.ny * f.dy;
    const double idx = (target - (vertical ? f.x0 : f.y0)) / (vertical ? f.dx : f.dy) - 0.5;
    int lo = static_cast<int>(std::floor(idx));
    lo = std::max(0, std::min(lo, n_cross - 2));
    const double frac = std::min(1.0, std::max(0.0, idx - lo));
    for (int t = 0; t < n_along; ++t) {
      const int i0 = vertical ? lo : t;
      const int j0 = vertical ? t : lo;
      const int i1 = vertical ? lo + 1 : t;
      const int j1 = vertical ? t : lo + 1;
      if (!f.is_fluid(i0, j0) || !f.is_fluid(i1, j1)) continue;
      p.s.push_back(vertical ? f.yc(t) : f.xc(t));
      p.a.push_back(interp(f.T, frac, lo, lo + 1, vertical, t));
      p.b.push_back(interp(f.ux, frac, lo, lo + 1, vertical, t));
      p.c.push_back(interp(f.uy, frac, lo, lo + 1, vertical, t));
    }
  } else {
    // symmetry line y = center of the obstacle span, from the west inflow to
    // the first solid cell
    const double target = f.y0 + 0.5 * f.ny * f.dy;
    const double idx = (target - f.y0) / f.dy - 0.5;
    int lo = static_cast<int>(std::floor(idx));
    lo = std::max(0, std::min(lo, f.ny - 2));
    const double frac = std::min(1.0, std::max(0.0, idx - lo));
    for (int i = 0; i < f.nx; ++i) {
      if (!f.is_fluid(i, lo) || !f.is_fluid(i, lo + 1)) break;  // reached the obstacle
      p.s.push_back(f.xc(i));
      const double T = interp(f.T, frac, lo, lo + 1, false, i);
      const double u = interp(f.ux, frac, lo, lo + 1, false, i);
      const double r = interp(f.rho, frac, lo, lo + 1, false, i);
      p.a.push_back(T);
      p.b.push_back(u);
      p.c.push_back(r * u);
    }
  }
  if (p.s.empty()) throw geometry_error("extraction line lies outside the fluid region");
  return p;
}

inline void write_profile_csv(std::ostream& os, const CenterlineProfile& p) {
  os << (p.axis == ProfileAxis::upstream ? "s,T,u,rho_flux" : "s,T,ux,uy") << '\n';
  for (std::size_t t = 0; t < p.s.size(); ++t)
    os << format_full(p.s[t]) << ',' << format_full(p.a[t]) << ',' << format_full(p.b[t]) << ','
       << format_full(p.c[t]) << '\n';
}

}  // namespace atgj
