// Projects a generated matrix onto the nonnegative Stiefel manifold and
// compares the result with the known solution.
#include "ep4orth/ep4orth.hpp"

#include <cstdio>

int main() {
  using namespace ep4orth;
  const ProjectionInstance inst = gen_projection(200, 5, 0.7, 1);
  LinearObjective f = projection_objective(inst.c);
  const PenaltyContext ctx(200, 5);
  const DriverConfig cfg = presets::projection();
  const Matrix x0 = round_to_feasible(project_oblique_plus_raw(inst.c)).x;
  const SolveReport rep = ep4orth_solve(f, ctx, cfg, x0, inst.c);
  std::printf("gap %.3e  feasi %.3e  outer %d  inner %d  %.3fs  %s\n", gap(rep.x, inst.x_star, inst.c), rep.feasi,
              rep.outer_iterations, rep.inner_iterations, rep.seconds, to_string(rep.termination));
  return 0;
}
