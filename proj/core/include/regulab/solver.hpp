#pragma once

#include <span>
#include <vector>

#include "regulab/scheme.hpp"

namespace regulab {

struct SolveOptions {
  double tol = 1e-10;      ///< bound on the row-scaled sup residual
  int max_iter = 10000;    ///< total linear solves
};

struct SolveInfo {
  double residual = 0.0;
  int linear_solves = 0;
  int outer_iterations = 0;
  bool fallback = false;  ///< simultaneous policy updates were needed
};

/// Solves F_h[u] = f with Dirichlet values `boundary` (one per arm slot,
/// NaN for full arms) by nested policy iteration: an outer loop over the
/// min player's choices, an inner Howard loop over the max player's, each
/// policy's linear system solved by sparse LU. Throws NumericalError with
/// the last residual when the budget runs out.
GridFunction solve(const DiscreteSystem& system, std::span<const double> f, std::vector<double> boundary,
                   const SolveOptions& options = {}, SolveInfo* info = nullptr);
GridFunction solve(const DiscreteSystem& system, const GridFunction& f, const BoundaryFunction& g,
                   const SolveOptions& options = {}, SolveInfo* info = nullptr);

struct ComparisonReport {
  bool holds = true;     ///< premise false, or premise true and max(u - v) <= 1e-10
  bool premise = false;  ///< F_h[u] >= F_h[v] at nodes and u <= v at feet
  double max_difference = 0.0;  ///< max over nodes of u - v
};

/// Discrete comparison principle for one pair. The operator premise is
/// checked with slack `premise_tol` on the row-scaled values.
ComparisonReport comparison_check(const DiscreteSystem& system, const GridFunction& u, const GridFunction& v,
                                  double premise_tol = 1e-10);

/// Barrier on the shifted half ball {|x + delta e2| < 1, x2 > -delta}:
/// M+(D^2 v) = 0, v = 0 on the flat part, v = 1 on the arc.
/// Requires 0 < delta < 1/4 and h <= delta / 4.
GridFunction solve_barrier(double delta, double h, double lambda = 1.0, double Lambda = 2.0, int n_dirs = 16);

}  // namespace regulab
