#include "regulab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "regulab/errors.hpp"

namespace regulab {
namespace {

// Index of the boundary piece closest to p, or -1 when p is on the truncation sphere.
int nearest_piece(const Domain& domain, Vec2 p, double R) {
  int best = -1;
  double best_d = std::abs(p.norm() - R);
  const auto& pieces = domain.boundary();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& piece = pieces[i];
    double d = std::numeric_limits<double>::infinity();
    if (piece.shape == BoundaryPiece::Shape::graph) {
      if (p.x1 >= piece.t0 && p.x1 <= piece.t1) d = std::abs(p.x2 - piece.profile(p.x1));
    } else {
      d = std::abs((p - piece.center).norm() - piece.radius);
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

std::vector<Vec2> stencil_lines(int n_dirs) {
  if (n_dirs < 4 || n_dirs % 4 != 0) throw ConfigError("n_dirs must be a positive multiple of 4");
  const int pairs = n_dirs / 4;
  std::vector<std::array<int, 2>> reps;
  for (int radius = 1; static_cast<int>(reps.size()) < pairs; ++radius) {
    std::vector<std::array<int, 2>> shell;
    for (int p = 1; p <= radius; ++p) {
      for (int q = 0; q <= radius; ++q) {
        if (std::max(p, q) != radius || std::gcd(p, q) != 1) continue;
        shell.push_back({p, q});
      }
    }
    std::sort(shell.begin(), shell.end(), [](const auto& a, const auto& b) {
      const int la = a[0] * a[0] + a[1] * a[1], lb = b[0] * b[0] + b[1] * b[1];
      if (la != lb) return la < lb;
      return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
    });
    reps.insert(reps.end(), shell.begin(), shell.end());
  }
  std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
    const int la = a[0] * a[0] + a[1] * a[1], lb = b[0] * b[0] + b[1] * b[1];
    if (la != lb) return la < lb;
    return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
  });
  reps.resize(pairs);
  std::vector<Vec2> lines;
  for (const auto& r : reps) {
    lines.push_back({static_cast<double>(r[0]), static_cast<double>(r[1])});
    lines.push_back({-static_cast<double>(r[1]), static_cast<double>(r[0])});
  }
  return lines;
}

std::size_t Grid::boundary_adjacent_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) n += boundary_adjacent(i) ? 1 : 0;
  return n;
}

std::size_t Grid::exterior_count() const {
  const std::size_t side = 2 * static_cast<std::size_t>(half_width) + 1;
  return side * side - nodes.size();
}

bool Grid::boundary_adjacent(std::size_t node) const {
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (arm(node, l, 0).cut() || arm(node, l, 1).cut()) return true;
  }
  return false;
}

std::shared_ptr<const Grid> build_grid(const Domain& domain, double h, double R, int n_dirs) {
  if (!(h > 0.0) || !(R > 0.0) || h > R / 8.0) throw ConfigError("build_grid requires 0 < h <= R/8");
  auto grid = std::make_shared<Grid>();
  grid->h = h;
  grid->R = R;
  grid->half_width = static_cast<int>(std::floor(R / h + 1e-9));
  grid->lines = stencil_lines(n_dirs);
  const int nw = grid->half_width;
  const int side = 2 * nw + 1;
  grid->index.assign(static_cast<std::size_t>(side) * side, -1);

  const auto lattice_slot = [&](int i, int j) -> long {
    if (i < -nw || i > nw || j < -nw || j > nw) return -1;
    return static_cast<long>(j + nw) * side + (i + nw);
  };

  for (int j = -nw; j <= nw; ++j) {
    for (int i = -nw; i <= nw; ++i) {
      const Vec2 x{i * h, j * h};
      if (x.dot(x) >= R * R || !domain.inside(x)) continue;
      grid->index[lattice_slot(i, j)] = static_cast<int>(grid->nodes.size());
      grid->nodes.push_back(x);
      grid->lattice.push_back({i, j});
    }
  }
  if (grid->nodes.empty()) throw ConfigError("grid has no interior nodes");

  const std::size_t nl = grid->lines.size();
  grid->arms.resize(grid->nodes.size() * nl * 2);
  for (std::size_t n = 0; n < grid->nodes.size(); ++n) {
    const Vec2 x = grid->nodes[n];
    for (std::size_t l = 0; l < nl; ++l) {
      const Vec2 v = grid->lines[l];
      const double full = v.norm() * h;
      const Vec2 e = (1.0 / v.norm()) * v;
      for (int side_k = 0; side_k < 2; ++side_k) {
        const double sgn = side_k == 0 ? 1.0 : -1.0;
        const Vec2 dir = sgn * e;
        const int ni = grid->lattice[n][0] + static_cast<int>(sgn * v.x1);
        const int nj = grid->lattice[n][1] + static_cast<int>(sgn * v.x2);
        const long slot = lattice_slot(ni, nj);
        const int nb = slot >= 0 ? grid->index[slot] : -1;
        const auto c = domain.first_crossing(x, dir, full * (1.0 + 1e-9), R);

        Arm arm;
        if (c && (c->s <= full * (1.0 - 1e-12) || nb < 0)) {
          arm.length = std::min(c->s, full);
          arm.foot = c->foot;
          arm.piece = c->piece;
        } else if (nb >= 0) {
          arm.neighbor = nb;
          arm.length = full;
          arm.foot = {ni * h, nj * h};
        } else {
          // The neighbor sits on the boundary to rounding accuracy.
          arm.length = full;
          arm.foot = {ni * h, nj * h};
          arm.piece = nearest_piece(domain, arm.foot, R);
        }
        if (!(arm.length > 0.0)) throw NumericalError("degenerate stencil arm");
        grid->arms[grid->arm_slot(n, l, side_k)] = arm;
      }
    }
  }
  return grid;
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::sup_norm(double r) const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Vec2 x = grid->nodes[i];
    if (x.dot(x) < r * r) m = std::max(m, std::abs(values[i]));
  }
  return m;
}

GridFunction sample(const std::shared_ptr<const Grid>& grid, const PlaneFunction& fn) {
  GridFunction out;
  out.grid = grid;
  out.values.resize(grid->num_nodes());
  for (std::size_t i = 0; i < grid->num_nodes(); ++i) out.values[i] = fn(grid->nodes[i]);
  out.boundary = boundary_values(*grid, [&fn](Vec2 p, int) { return fn(p); });
  return out;
}

std::vector<double> boundary_values(const Grid& grid, const BoundaryFunction& g) {
  std::vector<double> out(grid.arms.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < grid.arms.size(); ++s) {
    const Arm& a = grid.arms[s];
    if (a.cut()) out[s] = g(a.foot, a.piece);
  }
  return out;
}

}  // namespace regulab
