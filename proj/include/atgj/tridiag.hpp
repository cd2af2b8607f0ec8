#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "atgj/errors.hpp"

namespace atgj {

/// Eigen-decomposition of a symmetric tridiagonal matrix, restricted to what a
/// Golub-Welsch quadrature construction needs: all eigenvalues plus the first
/// component of each (normalized) eigenvector.
struct TridiagEigen {
  std::vector<double> values;            ///< ascending
  std::vector<double> first_components;  ///< row 0 of the eigenvector matrix
};

/// Symmetric tridiagonal QL algorithm with implicit shifts.
///
/// Derived from the Algol procedure tql2 (Bowdler, Martin, Reinsch, Wilkinson;
/// Handbook for Auto. Comp. II) via its EISPACK descendants, with the
/// eigenvector accumulation reduced to the single row needed here.
///
/// @param diag      diagonal entries d[0..n-1]
/// @param offdiag   off-diagonal entries, offdiag[k] couples rows k-1 and k
///                  (offdiag[0] is ignored)
/// @param context   label used in the non-convergence error message
inline TridiagEigen tridiag_eigen_ql(const std::vector<double>& diag,
                                     const std::vector<double>& offdiag,
                                     const std::string& context = "") {
  const int n = static_cast<int>(diag.size());
  if (n < 1) throw parameter_error("tridiag_eigen_ql: empty matrix");

  std::vector<double> d = diag;
  std::vector<double> e(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) e[i] = offdiag[i + 1];  // e[i] couples i and i+1
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;

  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw numerical_error("tridiagonal QL did not converge (order " + std::to_string(n) +
                                (context.empty() ? "" : ", " + context) + ")");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          const double t = (d[i] - g) * s + 2.0 * c * b;
          p = s * t;
          d[i + 1] = g + p;
          g = c * t - b;
          // rotate the tracked eigenvector row
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  TridiagEigen out;
  out.values.resize(n);
  out.first_components.resize(n);
  for (int i = 0; i < n; ++i) {
    out.values[i] = d[order[i]];
    out.first_components[i] = z[order[i]];
  }
  return out;
}

}  // namespace atgj
