#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "regulab/domain.hpp"

namespace regulab {

/// One half of a stencil line at a node: either a full arm to a lattice
/// neighbor, or a cut arm ending on the boundary.
struct Arm {
  int neighbor = -1;   ///< interior node index for a full arm, -1 for a cut arm
  double length = 0.0;
  Vec2 foot{};         ///< end point (the boundary foot for cut arms)
  int piece = -1;      ///< boundary piece of a cut arm; -1 = truncation sphere

  bool cut() const { return neighbor < 0; }
};

/// Lattice lines used by the wide stencil: primitive vectors (p, q) ordered
/// so that every prefix of length 2m is m orthogonal pairs {v, v^perp}.
std::vector<Vec2> stencil_lines(int n_dirs);

/// Cut-cell lattice over [-R, R]^2 restricted to Omega cap B_R.
struct Grid {
  double h = 0.0;
  double R = 0.0;
  int half_width = 0;  ///< lattice indices run over [-half_width, half_width]
  std::vector<Vec2> lines;

  std::vector<Vec2> nodes;                  ///< interior node positions
  std::vector<std::array<int, 2>> lattice;  ///< (i, j) of each interior node
  std::vector<Arm> arms;                    ///< [node][line][forward=0, backward=1]
  std::vector<int> index;                   ///< lattice -> node index, -1 when exterior

  std::size_t num_lines() const { return lines.size(); }
  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t arm_slot(std::size_t node, std::size_t line, int side) const {
    return (node * lines.size() + line) * 2 + side;
  }
  const Arm& arm(std::size_t node, std::size_t line, int side) const { return arms[arm_slot(node, line, side)]; }

  std::size_t boundary_adjacent_count() const;
  std::size_t exterior_count() const;
  bool boundary_adjacent(std::size_t node) const;
};

/// Classifies lattice nodes with `domain.inside` and |x| < R and computes cut
/// arms along the first `n_dirs / 2` stencil lines. Requires 0 < h <= R/8.
std::shared_ptr<const Grid> build_grid(const Domain& domain, double h, double R, int n_dirs = 16);

/// Values on the interior nodes, plus the Dirichlet values at cut-arm feet
/// (NaN in full-arm slots) when known.
struct GridFunction {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;
  std::vector<double> boundary;

  double sup_norm() const;
  /// sup |u| over nodes in the open ball B_r.
  double sup_norm(double r) const;
};

using PlaneFunction = std::function<double(Vec2)>;
/// Dirichlet data at a foot, with the boundary piece it lies on (-1 = truncation sphere).
using BoundaryFunction = std::function<double(Vec2, int)>;

/// Samples a plane function at the nodes and cut-arm feet.
GridFunction sample(const std::shared_ptr<const Grid>& grid, const PlaneFunction& fn);
/// Dirichlet values per arm slot (NaN for full arms).
std::vector<double> boundary_values(const Grid& grid, const BoundaryFunction& g);

}  // namespace regulab
