// Solve a 20-variable rastrigin instance with 2 integer variables using
// G-DFL+ and DFNDFL, then print the two results side by side.

#include "gdfl/gdfl.hpp"

#include <iostream>

int main() {
  const gdfl::Problem prob = gdfl::make_problem({"rastrigin", 20, 2});

  gdfl::SolverConfig cfg;
  cfg.budget_seconds = 2.0;

  for (auto algo : {gdfl::Algorithm::GdflPlus, gdfl::Algorithm::Dfndfl}) {
    const gdfl::RunRecord rec = gdfl::run(prob, cfg, algo, /*seed=*/0);
    std::cout << rec.algorithm << ": f* = " << rec.f_star << " after " << rec.N_it << " iterations ("
              << rec.n_f << " f, " << rec.n_g << " grad), stop = " << gdfl::to_string(rec.stop_reason) << '\n'
              << "  z* = " << rec.x_star.z.transpose() << '\n';
  }
}
