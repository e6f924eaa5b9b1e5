#pragma once

#include <span>
#include <vector>

namespace regulab {

/// Dense linear program
///
///     minimize  g . z   subject to   A z >= b,   z free,
///
/// for a handful of unknowns and arbitrarily many constraints. Solved by a
/// two-phase revised simplex on the dual (n equality rows, one column per
/// constraint); the primal solution is read off the simplex multipliers.
class LinearProgram {
 public:
  explicit LinearProgram(int num_vars);

  int num_vars() const { return n_; }
  int num_constraints() const { return static_cast<int>(rhs_.size()); }

  void set_objective(std::span<const double> g);
  /// Adds the constraint coeffs . z >= rhs.
  void add_constraint(std::span<const double> coeffs, double rhs);

  struct Solution {
    std::vector<double> z;
    double objective = 0.0;
    int pivots = 0;
  };

  /// Throws NumericalError when infeasible, unbounded or out of pivots.
  Solution solve() const;

 private:
  int n_;
  std::vector<double> objective_;
  std::vector<double> coeffs_;  // row-major, num_constraints x n
  std::vector<double> rhs_;
};

/// Weighted Chebyshev fit: find coefficients c and the least K with
///
///     |values[i] - basis_row(i) . c| <= K * weights[i]   for every i.
///
/// Rows with weight 0 become equality constraints. With `tie_break` the
/// returned c has least l1 norm among fits within relative slack 1e-9 of the
/// optimal K.
struct MinimaxFit {
  std::vector<double> coeffs;
  double K = 0.0;
};

MinimaxFit minimax_fit(int num_basis, std::span<const double> basis_rows, std::span<const double> values,
                       std::span<const double> weights, bool tie_break = true);

}  // namespace regulab
