// Builds the four cavity velocity sets plus the tensor-Simpson competitor and
// prints the node-budget comparison.

#include <cstdio>

#include "atgj/quadrature.hpp"

using namespace atgj;

int main() {
  struct Row {
    double kn;
    int n, nt;
    double lambda;
    int nc;  // competitor points per axis (0 = half-range rule, not built here)
  } rows[] = {{0.001, 8, 16, 500.0, 0}, {0.1, 8, 45, 5.0, 0}, {1.0, 8, 60, 5.0, 161},
              {10.0, 8, 90, 5.0, 201}};

  std::printf("%-8s %-10s %-8s %-12s %-12s %-8s\n", "Kn", "set", "nodes", "sum w", "analytic",
              "ratio");
  for (const auto& r : rows) {
    auto p = WeightParams::matched(r.lambda);
    auto vs = build_velocity_set(r.n, r.nt, 0.0, p);
    const double ratio = r.nc ? double(r.nc) * r.nc / vs.size() : 0.0;
    std::printf("%-8g %dx%-8d %-8d %-12.6g %-12.6g ", r.kn, r.n, r.nt, vs.size(),
                vs.weight_sum(), analytic_total_weight(p));
    if (r.nc)
      std::printf("%.1f vs %d^2 Simpson\n", ratio, r.nc);
    else
      std::printf("-\n");
  }

  auto nc = newton_cotes_set(201, 4.0);
  std::printf("\nSimpson 201x201: %d nodes, plane measure %.6f (exact 64)\n", nc.size(),
              integrate_plain([](double, double) { return 1.0; }, nc));
  return 0;
}
