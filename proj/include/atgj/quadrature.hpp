#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "atgj/errors.hpp"
#include "atgj/numeric.hpp"
#include "atgj/tridiag.hpp"

namespace atgj {

/// Tunable parameters of the bell-shaped weight function
///   omega(xi) = [1 - (2/pi) atan(chi)]^alpha / (1 + chi^2),
///   chi = |xi|^2 / (lambda*T0).
struct WeightParams {
  double alpha = 1.0;
  double lambda = 1.0;
  double T0 = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !(lambda > 0.0) || !(T0 > 0.0))
      throw parameter_error("WeightParams: alpha, lambda, T0 must be > 0");
  }

  /// alpha == (pi/2)*lambda within 1e-12 relative: the regime in which omega
  /// approaches exp(-|xi|^2/T0) as lambda grows.
  bool maxwellian_matched() const {
    const double target = 0.5 * pi * lambda;
    return std::abs(alpha - target) <= 1e-12 * std::max(std::abs(alpha), std::abs(target));
  }

  /// Params with alpha tied to lambda for the Maxwellian-limit regime.
  static WeightParams matched(double lambda, double T0 = 1.0) {
    return {0.5 * pi * lambda, lambda, T0};
  }
};

/// Evaluate the weight function at a velocity-space point. Total on the reals;
/// the value lies in (0, 1] (underflowing to 0 only far outside any node set).
inline double weight_function(double xi_x, double xi_y, const WeightParams& p) {
  const double chi = (xi_x * xi_x + xi_y * xi_y) / (p.lambda * p.T0);
  return std::pow(1.0 - (2.0 / pi) * std::atan(chi), p.alpha) / (1.0 + chi * chi);
}

/// Three-term recurrence coefficients of the orthonormal Jacobi polynomials
/// for weight (1-x)^alpha (1+x)^beta on [-1,1]; the symmetric tridiagonal
/// matrix is J = diag(a) + diag(b[1:], +/-1). b[0] is unused.
struct RecurrenceCoeffs {
  std::vector<double> a;
  std::vector<double> b;
  double alpha = 0.0;
  double beta = 0.0;

  int order() const { return static_cast<int>(a.size()); }
};

inline RecurrenceCoeffs jacobi_recurrence(int n, double alpha, double beta) {
  if (n < 1) throw parameter_error("jacobi_recurrence: n must be >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw parameter_error("jacobi_recurrence: alpha and beta must be > -1");

  RecurrenceCoeffs c;
  c.alpha = alpha;
  c.beta = beta;
  c.a.resize(n);
  c.b.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double s = alpha + beta;
    if (k == 0)
      c.a[k] = (beta - alpha) / (s + 2.0);
    else
      c.a[k] = (beta * beta - alpha * alpha) / ((2.0 * k + s) * (2.0 * k + s + 2.0));
    if (k > 0) {
      const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + s);
      const double den =
          (2.0 * k + s) * (2.0 * k + s) * (2.0 * k + s + 1.0) * (2.0 * k + s - 1.0);
      c.b[k] = std::sqrt(num / den);
    }
  }
  return c;
}

/// Map a radial coordinate r in (0,1) to a velocity magnitude,
/// R = sqrt(lambda*T0*tan(pi r/2)). Strictly increasing, R -> infinity as r -> 1.
inline double radial_map(double r, double lambda, double T0) {
  if (!(r > 0.0 && r < 1.0)) throw domain_error("radial_map: r must lie in (0,1)");
  return std::sqrt(lambda * T0 * std::tan(0.5 * pi * r));
}

/// Gauss rule for weight (1-r)^alpha on [0,1] plus the mapped velocity radii.
struct RadialRule {
  int order = 0;
  std::vector<double> r;  ///< nodes in (0,1), strictly increasing
  std::vector<double> R;  ///< mapped radii sqrt(lambda*T0*tan(pi r/2))
  std::vector<double> w;  ///< weights; sum = 1/(alpha+1)

  double weight_sum() const { return pairwise_sum(w); }
};

/// Golub-Welsch construction: eigen-decompose the Jacobi matrix, map
/// eigenvalues x in (-1,1) to r = (x+1)/2, and scale the squared first
/// eigenvector components by the zeroth moment Gamma(alpha+1)/Gamma(alpha+2)
/// (evaluated in log space so large alpha cannot overflow).
inline RadialRule golub_welsch(const RecurrenceCoeffs& coeffs, const WeightParams& p) {
  const int n = coeffs.order();
  const TridiagEigen eig =
      tridiag_eigen_ql(coeffs.a, coeffs.b, "alpha = " + std::to_string(coeffs.alpha));

  const double mu0 = std::exp(std::lgamma(coeffs.alpha + 1.0) - std::lgamma(coeffs.alpha + 2.0));
  RadialRule rule;
  rule.order = n;
  rule.r.resize(n);
  rule.R.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double r = 0.5 * (eig.values[i] + 1.0);
    if (!(r > 0.0) || r > 1.0 - 1e-15)
      throw numerical_error("golub_welsch: node escaped (0, 1-1e-15) at order " +
                            std::to_string(n) + ", alpha = " + std::to_string(coeffs.alpha));
    rule.r[i] = r;
    rule.R[i] = radial_map(r, p.lambda, p.T0);
    rule.w[i] = mu0 * eig.first_components[i] * eig.first_components[i];
  }
  return rule;
}

/// Periodic trapezoidal rule on (0, 2pi]: theta_j = theta0 + 2pi*j/N, j = 1..N.
struct AngularRule {
  int count = 0;
  double theta0 = 0.0;
  std::vector<double> theta;
  double weight = 0.0;  ///< uniform, 2pi/N
};

inline AngularRule angular_rule(int n_theta, double theta0 = 0.0) {
  if (n_theta < 3)
    throw parameter_error("angular_rule: N_theta must be >= 3 to resolve planar directions");
  AngularRule rule;
  rule.count = n_theta;
  rule.theta0 = theta0;
  rule.weight = 2.0 * pi / n_theta;
  rule.theta.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) rule.theta[j] = theta0 + (2.0 * pi * (j + 1)) / n_theta;
  return rule;
}

enum class RuleKind { arctan_gauss_jacobi, newton_cotes };

/// A discrete velocity set: nodes, raw weights w_k for integrals weighted by
/// omega, and effective weights W_k = w_k / omega(xi_k) for plain integrals.
///
/// ATGJ node ordering is radial-major: k = i*N_theta + j with i the radial and
/// j the angular index. Construction is deterministic; two sets built with
/// identical parameters are bit-identical.
struct VelocitySet {
  RuleKind kind = RuleKind::arctan_gauss_jacobi;
  int n_radial = 0;
  int n_theta = 0;
  WeightParams params;
  RadialRule radial;    // ATGJ only
  AngularRule angular;  // ATGJ only

  std::vector<double> xi_x, xi_y;
  std::vector<double> w_raw;
  std::vector<double> w_eff;

  int size() const { return static_cast<int>(xi_x.size()); }
  double weight_sum() const { return pairwise_sum(w_raw); }
  double max_radius() const {
    double m = 0.0;
    for (int k = 0; k < size(); ++k)
      m = std::max(m, std::hypot(xi_x[k], xi_y[k]));
    return m;
  }
  /// Advection speed bound max_k(|xi_x| + |xi_y|), used for CFL time steps.
  double max_axis_speed() const {
    double m = 0.0;
    for (int k = 0; k < size(); ++k)
      m = std::max(m, std::abs(xi_x[k]) + std::abs(xi_y[k]));
    return m;
  }
};

/// Analytic plane integral of omega: pi^2 lambda T0 / (2 (alpha+1)).
inline double analytic_total_weight(const WeightParams& p) {
  return pi * pi * p.lambda * p.T0 / (2.0 * (p.alpha + 1.0));
}

/// Build the ATGJ velocity set of n radial times N_theta angular nodes,
///   xi_k = R(r_i) (cos theta_j, sin theta_j),
///   w_k  = (pi/4) lambda T0 w_{r,i} w_theta,
///   W_k  = w_k / omega(xi_k).
inline VelocitySet build_velocity_set(int n, int n_theta, double theta0, const WeightParams& p) {
  p.validate();
  if (n < 1) throw parameter_error("build_velocity_set: n must be >= 1");

  VelocitySet vs;
  vs.kind = RuleKind::arctan_gauss_jacobi;
  vs.n_radial = n;
  vs.n_theta = n_theta;
  vs.params = p;
  vs.radial = golub_welsch(jacobi_recurrence(n, p.alpha, 0.0), p);
  vs.angular = angular_rule(n_theta, theta0);

  const int K = n * n_theta;
  vs.xi_x.resize(K);
  vs.xi_y.resize(K);
  vs.w_raw.resize(K);
  vs.w_eff.resize(K);
  const double scale = 0.25 * pi * p.lambda * p.T0 * vs.angular.weight;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const int k = i * n_theta + j;
      vs.xi_x[k] = vs.radial.R[i] * std::cos(vs.angular.theta[j]);
      vs.xi_y[k] = vs.radial.R[i] * std::sin(vs.angular.theta[j]);
      vs.w_raw[k] = scale * vs.radial.w[i];
      vs.w_eff[k] = vs.w_raw[k] / weight_function(vs.xi_x[k], vs.xi_y[k], p);
    }
  }
  return vs;
}

/// Composite-Simpson tensor grid on [-U,U]^2 with M (odd) points per axis.
/// Weight function is identically 1, so raw and effective weights coincide.
/// Node ordering is x-major: k = ix*M + iy.
inline VelocitySet newton_cotes_set(int m, double u) {
  if (m < 3 || m % 2 == 0)
    throw parameter_error("newton_cotes_set: M must be odd and >= 3 (composite Simpson)");
  if (!(u > 0.0)) throw parameter_error("newton_cotes_set: U must be > 0");

  const double h = 2.0 * u / (m - 1);
  std::vector<double> node(m), wt(m);
  for (int i = 0; i < m; ++i) {
    node[i] = -u + i * h;
    double c = (i == 0 || i == m - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    wt[i] = c * h / 3.0;
  }

  VelocitySet vs;
  vs.kind = RuleKind::newton_cotes;
  vs.n_radial = m;
  vs.n_theta = m;
  vs.params = WeightParams{1.0, 1.0, 1.0};  // unused for this rule
  const int K = m * m;
  vs.xi_x.resize(K);
  vs.xi_y.resize(K);
  vs.w_raw.resize(K);
  vs.w_eff.resize(K);
  for (int ix = 0; ix < m; ++ix) {
    for (int iy = 0; iy < m; ++iy) {
      const int k = ix * m + iy;
      vs.xi_x[k] = node[ix];
      vs.xi_y[k] = node[iy];
      vs.w_raw[k] = wt[ix] * wt[iy];
      vs.w_eff[k] = vs.w_raw[k];
    }
  }
  return vs;
}

namespace detail {
template <class F>
std::vector<double> node_products(F&& f, const VelocitySet& vs, const std::vector<double>& w) {
  const int K = vs.size();
  std::vector<double> prod(K);
  for (int k = 0; k < K; ++k) {
    const double v = f(vs.xi_x[k], vs.xi_y[k]);
    if (!std::isfinite(v))
      throw evaluation_error("non-finite integrand at node " + std::to_string(k) + " (xi = " +
                             format_full(vs.xi_x[k]) + ", " + format_full(vs.xi_y[k]) + ")");
    prod[k] = w[k] * v;
  }
  return prod;
}
}  // namespace detail

/// Approximate the omega-weighted plane integral of f: sum_k w_k f(xi_k).
template <class F>
double integrate_weighted(F&& f, const VelocitySet& vs) {
  return pairwise_sum(detail::node_products(f, vs, vs.w_raw));
}

/// Approximate the plain plane integral of F: sum_k W_k F(xi_k).
template <class F>
double integrate_plain(F&& f, const VelocitySet& vs) {
  return pairwise_sum(detail::node_products(f, vs, vs.w_eff));
}

/// Node/weight export, one row per node, full double precision.
inline void write_velocity_set_csv(std::ostream& os, const VelocitySet& vs) {
  os << "k,xi_x,xi_y,w_raw,w_eff\n";
  for (int k = 0; k < vs.size(); ++k) {
    os << k << ',' << format_full(vs.xi_x[k]) << ',' << format_full(vs.xi_y[k]) << ','
       << format_full(vs.w_raw[k]) << ',' << format_full(vs.w_eff[k]) << '\n';
  }
}

}  // namespace atgj
