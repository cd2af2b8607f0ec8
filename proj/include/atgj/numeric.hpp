#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

namespace atgj {

inline constexpr double pi = 3.14159265358979323846;

/// Fixed-order pairwise summation. Deterministic for a given input order and
/// accurate to O(log n) rounding; used wherever a reproducible reduction is
/// part of a contract.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

/// log Beta(a, b) via log-gamma; exp of this is the closed-form value of
/// the integral of r^(a-1) (1-r)^(b-1) over [0,1].
inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// Full-precision decimal formatting (17 significant digits round-trips a double).
inline std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace atgj
