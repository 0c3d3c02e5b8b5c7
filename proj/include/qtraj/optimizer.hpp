#pragma once

#include <functional>
#include <vector>

#include "qtraj/channels.hpp"

namespace qtraj {

std::vector<RotationAngles> default_grid_seeds();

struct OptimizerConfig {
  int max_iters = 100;  // per start
  int restarts = 5;     // number of grid seeds used, in order
  std::vector<RotationAngles> grid_seeds = default_grid_seeds();
  double grad_step = 1e-4;  // central finite-difference step
  double tol = 1e-9;        // absolute cost change that ends a start

  void validate() const;
};

struct SelectionResult {
  RotationAngles angles;     // canonical representative
  double cost = 0.0;
  bool converged = true;     // false: best-seen point after all starts hit limits
  int evaluations = 0;
};

// Multi-start quasi-Newton (BFGS, central-difference gradients, Armijo backtracking)
// minimization over (theta, phi). Costs may be +inf where undefined; such points are
// never accepted. Among results within tol of the best, the lexicographically smallest
// canonical angles win, so a flat surface returns the first grid seed.
SelectionResult minimize_angles(const std::function<double(RotationAngles)>& cost,
                                const OptimizerConfig& cfg);

}  // namespace qtraj
