// Minimal solver usage: a coarse Kn = 1 cavity run printing the residual
// history and the mid-height temperature profile.

#include <cstdio>

#include "atgj/cases.hpp"

using namespace atgj;

int main() {
  auto c = table1_case(1.0);
  auto vs = c.quad.build();

  SolverConfig cfg;
  cfg.steady_tol = 1e-5;
  cfg.max_steps = 5000;
  cfg.report_every = 500;

  DugksSolver solver(c.mesh(16), vs, c.gas(), cfg);
  solver.initialize(c.init());

  auto result = solver.run_to_steady([](const StepReport& r) {
    std::printf("step %6ld  residual %.3e  mass %.12f\n", r.step, r.residual, r.mass);
  });
  std::printf("%s after %ld steps\n", result.converged ? "converged" : "budget exhausted",
              result.steps);

  auto profile = extract_centerline(MacroField::from_solver(solver), ProfileAxis::horizontal);
  std::printf("\n   x        T\n");
  for (std::size_t i = 0; i < profile.s.size(); ++i)
    std::printf("%7.4f  %8.5f\n", profile.s[i], profile.a[i]);
  return 0;
}
