#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "regulab/elliptic_ops.hpp"
#include "regulab/grid.hpp"

namespace regulab {

/// One affine map  sum_l weight_l * q_l + constant  in the directional
/// second differences q_l of a node.
struct StencilPolicy {
  std::vector<std::pair<int, double>> terms;  ///< (line, weight >= 0)
  double constant = 0.0;
};

/// Monotone wide-stencil discretization of F(D^2 u):
///
///     F_h[u]_i = min_j max_k ( sum_l w_jkl q_l(i) + c_jk ),
///
/// with q_l the Shortley-Weller second difference along line l. The weights
/// do not depend on the node, so every node shares the policy family.
struct DiscreteSystem {
  OperatorSpec op = OperatorSpec::laplace();
  std::shared_ptr<const Grid> grid;
  int n_dirs = 16;
  int num_lines = 0;  ///< lines in use, n_dirs / 2
  std::vector<std::vector<StencilPolicy>> family;  ///< [j][k]
  std::vector<double> alpha_fwd;  ///< [node * num_lines + line]
  std::vector<double> alpha_bwd;
  /// Residual weight 1 / sum_l (alpha_fwd + alpha_bwd): a row-scaled residual
  /// is the nodal correction it calls for, up to the ellipticity constants.
  std::vector<double> row_scale;

  std::size_t num_nodes() const { return grid->num_nodes(); }

  /// Shortley-Weller second difference of u at `node` along `line`.
  /// `boundary` holds the Dirichlet values per arm slot.
  double directional(std::span<const double> values, std::span<const double> boundary, std::size_t node,
                     int line) const;
  /// Value of policy (j, k) at a node.
  double policy_value(std::span<const double> values, std::span<const double> boundary, std::size_t node, int j,
                      int k) const;
  /// F_h[u] at a node.
  double apply(std::span<const double> values, std::span<const double> boundary, std::size_t node) const;
};

/// Builds the policy family for `op` on the first n_dirs / 2 lines of the
/// grid. Throws ConfigError when n_dirs is not a multiple of 4, exceeds the
/// grid's stencil, or an Isaacs coefficient has no nonnegative decomposition
/// onto the available lines.
DiscreteSystem discretize(const OperatorSpec& op, std::shared_ptr<const Grid> grid, int n_dirs = 16);

/// F_h[u] at every interior node. Requires u.boundary.
std::vector<double> apply_operator(const DiscreteSystem& system, const GridFunction& u);

/// sup_i row_scale_i |F_h[u]_i - f_i|.
double scaled_residual(const DiscreteSystem& system, const GridFunction& u, std::span<const double> f);

}  // namespace regulab
