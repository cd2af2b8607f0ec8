#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "atgj/quadrature.hpp"
#include "atgj/tridiag.hpp"

using namespace atgj;

namespace {

double beta_integral(double m, double alpha) {
  // closed form of the integral of r^m (1-r)^alpha over [0,1]
  return std::exp(log_beta(m + 1.0, alpha + 1.0));
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("tridiagonal QL reproduces a hand-solvable 3x3 spectrum") {
  // diag(2,2,2), offdiag 1: eigenvalues 2-sqrt2, 2, 2+sqrt2; first components 1/2, 1/sqrt2, 1/2
  auto eig = tridiag_eigen_ql({2.0, 2.0, 2.0}, {0.0, 1.0, 1.0});
  REQUIRE(eig.values.size() == 3);
  CHECK(std::abs(eig.values[0] - (2.0 - std::sqrt(2.0))) < 1e-14);
  CHECK(std::abs(eig.values[1] - 2.0) < 1e-14);
  CHECK(std::abs(eig.values[2] - (2.0 + std::sqrt(2.0))) < 1e-14);
  CHECK(std::abs(eig.first_components[0] * eig.first_components[0] - 0.25) < 1e-14);
  CHECK(std::abs(eig.first_components[1] * eig.first_components[1] - 0.5) < 1e-14);
  CHECK(std::abs(eig.first_components[2] * eig.first_components[2] - 0.25) < 1e-14);
}

TEST_CASE("jacobi recurrence hand values") {
  CHECK(jacobi_recurrence(1, 2.0, 0.0).a[0] == -0.5);
  CHECK(jacobi_recurrence(1, 0.0, 0.0).a[0] == 0.0);
  CHECK(std::abs(jacobi_recurrence(2, 0.0, 0.0).b[1] - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK_THROWS_AS(jacobi_recurrence(0, 1.0, 0.0), parameter_error);
  CHECK_THROWS_AS(jacobi_recurrence(2, -1.0, 0.0), parameter_error);
  CHECK_THROWS_AS(jacobi_recurrence(2, 1.0, -1.5), parameter_error);
}

TEST_CASE("golub-welsch one-point rules") {
  WeightParams p{1.0, 1.0, 1.0};

  auto rule0 = golub_welsch(jacobi_recurrence(1, 1e-300, 0.0), p);  // alpha -> 0 limit
  // exact alpha = 0 is also valid for the recurrence (alpha > -1)
  rule0 = golub_welsch(jacobi_recurrence(1, 0.0, 0.0), p);
  CHECK(std::abs(rule0.r[0] - 0.5) < 1e-15);
  CHECK(std::abs(rule0.w[0] - 1.0) < 1e-15);

  auto rule1 = golub_welsch(jacobi_recurrence(1, 1.0, 0.0), WeightParams{1.0, 1.0, 1.0});
  CHECK(std::abs(rule1.r[0] - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(rule1.w[0] - 0.5) < 1e-15);
}

TEST_CASE("radial rule matches Gauss-Legendre for alpha = 0") {
  // 10-point Gauss-Legendre abscissae (positive half), classical tabulated values
  const double x10[] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                        0.8650633666889845, 0.973906528517172};
  auto rule = golub_welsch(jacobi_recurrence(10, 0.0, 0.0), WeightParams{1.0, 1.0, 1.0});
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(rule.r[5 + i] - 0.5 * (x10[i] + 1.0)) < 1e-14);
    CHECK(std::abs(rule.r[4 - i] - 0.5 * (1.0 - x10[i])) < 1e-14);
  }
}

TEST_CASE("polynomial exactness against closed-form Beta integrals") {
  const double alphas[] = {0.5, 1.0, 0.5 * pi * 5.0, 0.5 * pi * 500.0};
  for (double alpha : alphas) {
    for (int n = 1; n <= 10; ++n) {
      auto rule = golub_welsch(jacobi_recurrence(n, alpha, 0.0),
                               WeightParams{alpha, 1.0, 1.0});
      for (int m = 0; m <= 2 * n - 1; ++m) {
        double got = 0.0;
        for (int i = 0; i < n; ++i) got += rule.w[i] * std::pow(rule.r[i], m);
        INFO("alpha=" << alpha << " n=" << n << " m=" << m);
        CHECK(rel_err(got, beta_integral(m, alpha)) < 1e-11);
      }
    }
  }
}

TEST_CASE("degree 2n is not integrated exactly in general") {
  for (double alpha : {0.5, 1.0, 0.5 * pi * 5.0}) {
    for (int n = 1; n <= 6; ++n) {
      auto rule = golub_welsch(jacobi_recurrence(n, alpha, 0.0),
                               WeightParams{alpha, 1.0, 1.0});
      const int m = 2 * n;
      double got = 0.0;
      for (int i = 0; i < n; ++i) got += rule.w[i] * std::pow(rule.r[i], m);
      INFO("alpha=" << alpha << " n=" << n);
      CHECK(rel_err(got, beta_integral(m, alpha)) > 1e-11);
    }
  }
}

TEST_CASE("radial weight normalization and node confinement") {
  for (double alpha : {0.5, 1.0, 0.5 * pi * 5.0, 0.5 * pi * 500.0}) {
    for (int n : {1, 4, 8, 20}) {
      auto rule = golub_welsch(jacobi_recurrence(n, alpha, 0.0),
                               WeightParams{alpha, 2.0, 1.5});
      CHECK(rel_err(rule.weight_sum(), 1.0 / (alpha + 1.0)) < 1e-13);
      for (int i = 0; i < n; ++i) {
        CHECK(rule.w[i] > 0.0);
        CHECK(rule.r[i] > 0.0);
        CHECK(rule.r[i] < 1.0);
        CHECK(std::isfinite(rule.R[i]));
        CHECK(rule.R[i] > 0.0);
        if (i > 0) {
          CHECK(rule.r[i] > rule.r[i - 1]);
          CHECK(rule.R[i] > rule.R[i - 1]);
        }
      }
    }
  }
}

TEST_CASE("radial map") {
  CHECK(std::abs(radial_map(0.5, 1.0, 1.0) - 1.0) < 1e-15);
  CHECK(std::abs(radial_map(2.0 / 3.0, 5.0, 1.0) - 2.9428309563827907) < 1e-12);
  CHECK(radial_map(1e-14, 1.0, 1.0) < 1e-6);  // R -> 0 as r -> 0+
  CHECK_THROWS_AS(radial_map(0.0, 1.0, 1.0), domain_error);
  CHECK_THROWS_AS(radial_map(1.0, 1.0, 1.0), domain_error);
  CHECK_THROWS_AS(radial_map(-0.2, 1.0, 1.0), domain_error);
  CHECK_THROWS_AS(radial_map(std::nan(""), 1.0, 1.0), domain_error);
}

TEST_CASE("angular rule") {
  auto r4 = angular_rule(4, 0.0);
  REQUIRE(r4.theta.size() == 4);
  CHECK(std::abs(r4.theta[0] - pi / 2.0) < 1e-15);
  CHECK(std::abs(r4.theta[1] - pi) < 1e-15);
  CHECK(std::abs(r4.theta[2] - 3.0 * pi / 2.0) < 1e-15);
  CHECK(std::abs(r4.theta[3] - 2.0 * pi) < 1e-15);
  CHECK(std::abs(r4.weight - pi / 2.0) < 1e-16);

  for (int n : {3, 16, 45, 90}) {
    auto rule = angular_rule(n, 0.0);
    CHECK(std::abs(n * rule.weight - 2.0 * pi) < 1e-14);
  }
  auto r90 = angular_rule(90, 0.0);
  CHECK(r90.count == 90);
  CHECK(std::abs(r90.weight - 2.0 * pi / 90.0) < 1e-16);

  CHECK_THROWS_AS(angular_rule(2, 0.0), parameter_error);
}

TEST_CASE("matched-parameter flag") {
  CHECK(WeightParams::matched(5.0).maxwellian_matched());
  CHECK(WeightParams::matched(500.0).maxwellian_matched());
  CHECK_FALSE(WeightParams{20.0, 2.0 * 20.0 / pi + 20.0, 1.0}.maxwellian_matched());
  // within 1e-12 relative counts as matched, beyond does not
  const double a = 0.5 * pi * 5.0;
  CHECK(WeightParams{a * (1.0 + 1e-13), 5.0, 1.0}.maxwellian_matched());
  CHECK_FALSE(WeightParams{a * (1.0 + 1e-11), 5.0, 1.0}.maxwellian_matched());
}

TEST_CASE("weight function point values") {
  WeightParams p{3.0, 2.0, 1.5};
  CHECK(weight_function(0.0, 0.0, p) == 1.0);

  // |xi|^2 = lambda*T0 => chi = 1 => value (1/2)^alpha / 2
  const double xi = std::sqrt(p.lambda * p.T0);
  CHECK(rel_err(weight_function(xi, 0.0, p), std::pow(0.5, p.alpha) / 2.0) < 1e-14);

  // matched large-lambda case approximates the Gaussian
  auto pm = WeightParams::matched(500.0);
  CHECK(rel_err(weight_function(1.0, 0.0, pm), std::exp(-1.0)) < 2e-3);
}

TEST_CASE("Maxwellian limit ladder (sup norm on |xi| <= 4)") {
  double prev = 1e300;
  for (double lambda : {5.0, 50.0, 500.0, 5000.0}) {
    auto p = WeightParams::matched(lambda);
    double sup = 0.0;
    for (int i = 0; i <= 1024; ++i) {
      const double x = 4.0 * i / 1024.0;
      sup = std::max(sup, std::abs(weight_function(x, 0.0, p) - std::exp(-x * x)));
    }
    CHECK(sup < prev);
    prev = sup;
    if (lambda == 5000.0) CHECK(sup < 1e-3);
  }
}

TEST_CASE("limit of the numerator for fixed |xi|^2") {
  for (double k : {0.5, 1.0, 2.0}) {
    double prev = 1e300;
    for (double lambda : {5.0, 50.0, 500.0, 5000.0}) {
      const double num = std::pow(1.0 - (2.0 / pi) * std::atan(k / lambda), 0.5 * pi * lambda);
      const double err = std::abs(num - std::exp(-k));
      CHECK(err < prev);
      prev = err;
    }
  }
}

TEST_CASE("off-matched parameters bracket the Gaussian") {
  const double lambda = 5.0;
  for (double k : {1.0, 2.0}) {
    const double x = std::sqrt(k);
    WeightParams inside{0.5 * pi * lambda + 2.0, lambda, 1.0};
    WeightParams outside{0.5 * pi * lambda - 2.0, lambda, 1.0};
    CHECK(weight_function(x, 0.0, inside) < std::exp(-k));
    CHECK(weight_function(x, 0.0, outside) > std::exp(-k));
  }
}

TEST_CASE("velocity set: counts, identities, determinism") {
  auto p = WeightParams::matched(5.0);
  auto vs = build_velocity_set(8, 90, 0.0, p);
  CHECK(vs.size() == 720);
  CHECK(rel_err(vs.weight_sum(), analytic_total_weight(p)) < 1e-12);

  for (int k = 0; k < vs.size(); ++k) {
    CHECK(vs.w_raw[k] > 0.0);
    CHECK(vs.w_eff[k] > 0.0);
    const double omega = weight_function(vs.xi_x[k], vs.xi_y[k], p);
    CHECK(rel_err(vs.w_eff[k] * omega, vs.w_raw[k]) < 1e-14);
  }

  // radial-major ordering: node k = i*N_theta + j sits at radius R[i]
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 90; ++j) {
      const int k = i * 90 + j;
      CHECK(std::abs(std::hypot(vs.xi_x[k], vs.xi_y[k]) - vs.radial.R[i]) < 1e-12 * vs.radial.R[i]);
    }

  auto vs2 = build_velocity_set(8, 90, 0.0, p);
  CHECK(vs.xi_x == vs2.xi_x);
  CHECK(vs.xi_y == vs2.xi_y);
  CHECK(vs.w_raw == vs2.w_raw);
  CHECK(vs.w_eff == vs2.w_eff);

  CHECK_THROWS_AS(build_velocity_set(0, 16, 0.0, p), parameter_error);
  CHECK_THROWS_AS(build_velocity_set(8, 16, 0.0, WeightParams{-1.0, 5.0, 1.0}), parameter_error);
}

TEST_CASE("total-weight identity across the benchmark configurations") {
  struct Cfg {
    int n, nt;
    double lambda;
  } cfgs[] = {{8, 16, 500.0}, {8, 45, 5.0}, {8, 60, 5.0}, {8, 90, 5.0}};
  for (auto c : cfgs) {
    auto p = WeightParams::matched(c.lambda);
    auto vs = build_velocity_set(c.n, c.nt, 0.0, p);
    CHECK(rel_err(vs.weight_sum(), analytic_total_weight(p)) < 1e-12);
    CHECK(rel_err(integrate_weighted([](double, double) { return 1.0; }, vs),
                  analytic_total_weight(p)) < 1e-12);
  }
}

TEST_CASE("node-count ratios against the tabulated competitor settings") {
  CHECK(std::abs(161.0 * 161.0 / (8 * 60) - 54.0) < 0.05);
  CHECK(std::abs(201.0 * 201.0 / (8 * 90) - 56.1) < 0.05);
}

TEST_CASE("weighted integration: angular harmonics vanish") {
  auto p = WeightParams::matched(5.0);
  auto vs = build_velocity_set(8, 16, 0.0, p);
  for (int m : {1, 2, 3, 7, 15}) {
    const double val = integrate_weighted(
        [m](double x, double y) { return std::cos(m * std::atan2(y, x)); }, vs);
    CHECK(std::abs(val) < 1e-12);
  }
}

TEST_CASE("weighted integration: radial polynomial through the map") {
  // f(xi) = r(xi)^3 with r = (2/pi) atan(|xi|^2/(lambda T0)) turns the plane
  // integral into (pi/4) lambda T0 * 2pi * Beta(4, alpha+1)
  auto p = WeightParams::matched(5.0);
  auto vs = build_velocity_set(8, 16, 0.0, p);
  const double got = integrate_weighted(
      [&](double x, double y) {
        const double r = (2.0 / pi) * std::atan((x * x + y * y) / (p.lambda * p.T0));
        return r * r * r;
      },
      vs);
  const double want = 0.25 * pi * p.lambda * p.T0 * 2.0 * pi * beta_integral(3.0, p.alpha);
  CHECK(rel_err(got, want) < 1e-11);
}

TEST_CASE("plain integration: odd integrand on a symmetric set") {
  auto p = WeightParams::matched(5.0);
  auto vs = build_velocity_set(8, 16, 0.0, p);
  const double val =
      integrate_plain([](double x, double y) { return x * std::exp(-(x * x + y * y)); }, vs);
  CHECK(std::abs(val) < 1e-12);

  // node set symmetric under xi -> -xi for even N_theta
  const int K = vs.size();
  for (int k = 0; k < K; ++k) {
    const int i = k / 16, j = k % 16;
    const int jm = (j + 8) % 16;
    const int km = i * 16 + jm;
    CHECK(std::abs(vs.xi_x[km] + vs.xi_x[k]) < 1e-13 * (1.0 + std::abs(vs.xi_x[k])));
    CHECK(std::abs(vs.xi_y[km] + vs.xi_y[k]) < 1e-13 * (1.0 + std::abs(vs.xi_y[k])));
  }
}

TEST_CASE("plain integration: Gaussian mass with the matched large-lambda set") {
  auto p = WeightParams::matched(500.0);
  auto vs = build_velocity_set(8, 16, 0.0, p);
  const double got =
      integrate_plain([](double x, double y) { return std::exp(-(x * x + y * y)); }, vs);
  CHECK(rel_err(got, pi) < 1e-4);

  // cross-check against the dense tensor oracle
  auto nc = newton_cotes_set(201, 6.0);
  const double oracle =
      integrate_plain([](double x, double y) { return std::exp(-(x * x + y * y)); }, nc);
  CHECK(rel_err(got, oracle) < 1e-4);
}

TEST_CASE("evaluation error identifies the offending node") {
  auto vs = build_velocity_set(2, 4, 0.0, WeightParams::matched(5.0));
  CHECK_THROWS_AS(integrate_plain([](double, double) { return std::nan(""); }, vs),
                  evaluation_error);
}

TEST_CASE("newton-cotes set") {
  auto nc3 = newton_cotes_set(3, 1.0);
  CHECK(nc3.size() == 9);
  CHECK(rel_err(integrate_plain([](double, double) { return 1.0; }, nc3), 4.0) < 1e-15);

  auto nc101 = newton_cotes_set(101, 6.0);
  CHECK(rel_err(integrate_plain([](double x, double y) { return std::exp(-(x * x + y * y)); },
                                nc101),
                pi) < 1e-8);

  CHECK(newton_cotes_set(201, 4.0).size() == 40401);
  CHECK_THROWS_AS(newton_cotes_set(4, 1.0), parameter_error);
  CHECK_THROWS_AS(newton_cotes_set(2, 1.0), parameter_error);
  CHECK_THROWS_AS(newton_cotes_set(5, 0.0), parameter_error);
}

TEST_CASE("csv export format") {
  auto vs = build_velocity_set(2, 3, 0.0, WeightParams::matched(5.0));
  std::ostringstream os;
  write_velocity_set_csv(os, vs);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "k,xi_x,xi_y,w_raw,w_eff");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);

  // 17 significant digits round-trip
  std::ostringstream os2;
  write_velocity_set_csv(os2, vs);
  std::istringstream is2(os2.str());
  std::getline(is2, line);
  std::getline(is2, line);
  const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
  const double parsed = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
  CHECK(parsed == vs.xi_x[0]);
}
