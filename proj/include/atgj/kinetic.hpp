#pragma once

#include <cmath>
#include <vector>

#include "atgj/errors.hpp"
#include "atgj/numeric.hpp"
#include "atgj/quadrature.hpp"

namespace atgj {

/// Gas description for the reduced Shakhov model. Units: R = 1/2 (so the
/// equilibrium exponent is |c|^2/T) and the nondimensional pressure is p = rho*T.
struct GasModel {
  double prandtl = 2.0 / 3.0;
  int internal_dof = 0;  ///< N; monatomic benchmarks use 0
  double knudsen = 1.0;
  double viscosity_exponent = 0.81;  ///< omega_v in mu = mu_ref (T/T_ref)^omega_v
  double T_ref = 1.0;
  double rho_ref = 1.0;
  double L_ref = 1.0;

  void validate() const {
    if (!(prandtl > 0.0) || !(knudsen > 0.0) || internal_dof < 0)
      throw parameter_error("GasModel: Pr > 0, Kn > 0, N >= 0 required");
  }

  /// Hard-sphere mean-free-path relation lambda_mfp = (mu/p) sqrt(pi R T / 2)
  /// with Kn = lambda_mfp / L_ref at the reference state, R = 1/2.
  double mu_ref() const {
    const double p_ref = rho_ref * T_ref;
    return knudsen * L_ref * p_ref / std::sqrt(0.25 * pi * T_ref);
  }
};

/// Macroscopic state of one cell. rhoE is the total energy density
/// rho*E = 1/2 rho |u|^2 + ((3+N)/4) rho T; p = rho*T.
struct Macroscopics {
  double rho = 1.0;
  double ux = 0.0, uy = 0.0;
  double rhoE = 0.75;
  double qx = 0.0, qy = 0.0;
  double T = 1.0;
  double p = 1.0;
};

inline double energy_density(double rho, double ux, double uy, double T, int internal_dof) {
  return 0.5 * rho * (ux * ux + uy * uy) + 0.25 * (3.0 + internal_dof) * rho * T;
}

inline double recover_temperature(double rho, double rhoE, double ux, double uy,
                                  int internal_dof) {
  return (rhoE - 0.5 * rho * (ux * ux + uy * uy)) * 4.0 / ((3.0 + internal_dof) * rho);
}

inline Macroscopics make_state(double rho, double ux, double uy, double T, double qx = 0.0,
                               double qy = 0.0, int internal_dof = 0) {
  if (!(rho > 0.0) || !(T > 0.0))
    throw state_error("Macroscopics: rho and T must be positive");
  Macroscopics m;
  m.rho = rho;
  m.ux = ux;
  m.uy = uy;
  m.T = T;
  m.p = rho * T;
  m.qx = qx;
  m.qy = qy;
  m.rhoE = energy_density(rho, ux, uy, T, internal_dof);
  return m;
}

/// Reduced distribution pair: g carries mass, h the residual (out-of-plane
/// plus internal) energy. Values may undershoot zero during transport; only
/// finiteness is required.
struct DistPair {
  std::vector<double> g, h;

  explicit DistPair(int k = 0) : g(k, 0.0), h(k, 0.0) {}
  int size() const { return static_cast<int>(g.size()); }
};

/// Point value of the reduced equilibrium, g_eq = rho/(pi T) exp(-|xi-u|^2/T).
inline double maxwellian(double rho, double ux, double uy, double T, double xi_x, double xi_y) {
  const double cx = xi_x - ux, cy = xi_y - uy;
  return rho / (pi * T) * std::exp(-(cx * cx + cy * cy) / T);
}

/// Equilibrium g at every node of the set.
inline std::vector<double> equilibrium_g(const Macroscopics& m, const VelocitySet& vs) {
  const int K = vs.size();
  std::vector<double> g(K);
  const double pref = m.rho / (pi * m.T);
  const double invT = 1.0 / m.T;
  for (int k = 0; k < K; ++k) {
    const double cx = vs.xi_x[k] - m.ux, cy = vs.xi_y[k] - m.uy;
    g[k] = pref * std::exp(-(cx * cx + cy * cy) * invT);
  }
  return g;
}

/// Equilibrium pair; h_eq = (1+N) T/2 * g_eq.
inline DistPair equilibrium_pair(const Macroscopics& m, const GasModel& gm,
                                 const VelocitySet& vs) {
  DistPair d(vs.size());
  d.g = equilibrium_g(m, vs);
  const double hfac = 0.5 * (1.0 + gm.internal_dof) * m.T;
  for (int k = 0; k < vs.size(); ++k) d.h[k] = hfac * d.g[k];
  return d;
}

/// Shakhov-corrected equilibrium pair:
///   g_S = g_eq [1 + (1-Pr) (4 c.q / (5 p T)) (|c|^2/T - 2)]
///   h_S = ((1+N)T/2) g_eq [1 + (1-Pr) (2 c.q / (5 p T)) (2|c|^2/T - 2 - 2N/(1+N))]
inline DistPair shakhov_pair(const Macroscopics& m, const GasModel& gm, const VelocitySet& vs) {
  const int K = vs.size();
  DistPair d(K);
  const double pref = m.rho / (pi * m.T);
  const double invT = 1.0 / m.T;
  const double one_minus_pr = 1.0 - gm.prandtl;
  const double qfac = one_minus_pr / (5.0 * m.p * m.T);
  const double n_dof = gm.internal_dof;
  const double hfac = 0.5 * (1.0 + n_dof) * m.T;
  const double h_shift = 2.0 + 2.0 * n_dof / (1.0 + n_dof);
  for (int k = 0; k < K; ++k) {
    const double cx = vs.xi_x[k] - m.ux, cy = vs.xi_y[k] - m.uy;
    const double c2 = cx * cx + cy * cy;
    const double geq = pref * std::exp(-c2 * invT);
    const double cq = cx * m.qx + cy * m.qy;
    d.g[k] = geq * (1.0 + qfac * 4.0 * cq * (c2 * invT - 2.0));
    d.h[k] = hfac * geq * (1.0 + qfac * 2.0 * cq * (2.0 * c2 * invT - h_shift));
  }
  return d;
}

/// Moment evaluation (plain integrals with the effective weights W_k):
///   rho   = sum W g
///   rho u = sum W xi g
///   rho E = sum W (1/2 |xi|^2 g + 1/2 h)
///   q     = sum W (1/2 c |c|^2 g + 1/2 c h)
/// The heat flux is accumulated in deviation form, i.e. with the equilibrium
/// at the recovered (rho,u,T) subtracted from (g,h) first. The equilibrium's
/// own odd peculiar moments vanish identically, so this evaluates the same
/// integral while removing the quadrature's spurious equilibrium heat flux.
inline Macroscopics moments(const DistPair& d, const VelocitySet& vs, const GasModel& gm) {
  const int K = vs.size();
  std::vector<double> acc(K);

  for (int k = 0; k < K; ++k) acc[k] = vs.w_eff[k] * d.g[k];
  const double rho = pairwise_sum(acc);
  for (int k = 0; k < K; ++k) acc[k] = vs.w_eff[k] * vs.xi_x[k] * d.g[k];
  const double rux = pairwise_sum(acc);
  for (int k = 0; k < K; ++k) acc[k] = vs.w_eff[k] * vs.xi_y[k] * d.g[k];
  const double ruy = pairwise_sum(acc);
  for (int k = 0; k < K; ++k) {
    const double xi2 = vs.xi_x[k] * vs.xi_x[k] + vs.xi_y[k] * vs.xi_y[k];
    acc[k] = vs.w_eff[k] * 0.5 * (xi2 * d.g[k] + d.h[k]);
  }
  const double rhoE = pairwise_sum(acc);

  if (!(rho > 0.0)) throw state_error("moments: non-positive density");
  const double ux = rux / rho, uy = ruy / rho;
  const double T = recover_temperature(rho, rhoE, ux, uy, gm.internal_dof);
  if (!(T > 0.0)) throw state_error("moments: non-positive temperature");

  Macroscopics m;
  m.rho = rho;
  m.ux = ux;
  m.uy = uy;
  m.rhoE = rhoE;
  m.T = T;
  m.p = rho * T;

  const double pref = rho / (pi * T);
  const double invT = 1.0 / T;
  const double hfac = 0.5 * (1.0 + gm.internal_dof) * T;
  std::vector<double> accy(K);
  for (int k = 0; k < K; ++k) {
    const double cx = vs.xi_x[k] - ux, cy = vs.xi_y[k] - uy;
    const double c2 = cx * cx + cy * cy;
    const double geq = pref * std::exp(-c2 * invT);
    const double dg = d.g[k] - geq;
    const double dh = d.h[k] - hfac * geq;
    const double e = 0.5 * (c2 * dg + dh);
    acc[k] = vs.w_eff[k] * cx * e;
    accy[k] = vs.w_eff[k] * cy * e;
  }
  m.qx = pairwise_sum(acc);
  m.qy = pairwise_sum(accy);
  return m;
}

/// tau = mu/p with the power-law viscosity mu = mu_ref (T/T_ref)^omega_v.
inline double relaxation_time(const Macroscopics& m, const GasModel& gm) {
  const double mu = gm.mu_ref() * std::pow(m.T / gm.T_ref, gm.viscosity_exponent);
  return mu / m.p;
}

/// BGK-Shakhov collision term, Omega = -(d - d_S)/tau per node.
inline DistPair collision(const DistPair& d, const Macroscopics& m, const GasModel& gm,
                          const VelocitySet& vs) {
  const double tau = relaxation_time(m, gm);
  if (!(tau > 0.0)) throw state_error("collision: non-positive relaxation time");
  DistPair s = shakhov_pair(m, gm, vs);
  DistPair omega(vs.size());
  const double inv_tau = 1.0 / tau;
  for (int k = 0; k < vs.size(); ++k) {
    omega.g[k] = -(d.g[k] - s.g[k]) * inv_tau;
    omega.h[k] = -(d.h[k] - s.h[k]) * inv_tau;
  }
  return omega;
}

}  // namespace atgj
