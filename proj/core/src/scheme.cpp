#include "regulab/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regulab/errors.hpp"
#include "regulab/minimax_lp.hpp"

namespace regulab {
namespace {

using Family = std::vector<std::vector<StencilPolicy>>;

// Nonnegative weights mu_l with sum_l mu_l e_l e_l^T = c, least sum mu_l |v_l|^2.
StencilPolicy decompose(const SymMatrix& c, const std::vector<Vec2>& lines) {
  const int n = static_cast<int>(lines.size());
  LinearProgram lp(n);
  std::vector<double> cost(n), row(n);
  for (int l = 0; l < n; ++l) cost[l] = lines[l].dot(lines[l]);
  lp.set_objective(cost);
  for (int l = 0; l < n; ++l) {
    std::fill(row.begin(), row.end(), 0.0);
    row[l] = 1.0;
    lp.add_constraint(row, 0.0);
  }
  const double target[3] = {c.a11(), c.a12(), c.a22()};
  for (int e = 0; e < 3; ++e) {
    for (int l = 0; l < n; ++l) {
      const Vec2 u = (1.0 / lines[l].norm()) * lines[l];
      row[l] = e == 0 ? u.x1 * u.x1 : e == 1 ? u.x1 * u.x2 : u.x2 * u.x2;
    }
    lp.add_constraint(row, target[e]);
    for (auto& r : row) r = -r;
    lp.add_constraint(row, -target[e]);
  }
  LinearProgram::Solution sol;
  try {
    sol = lp.solve();
  } catch (const NumericalError&) {
    throw ConfigError("Isaacs coefficient has no nonnegative decomposition on the stencil lines");
  }
  StencilPolicy p;
  SymMatrix check{};
  for (int l = 0; l < n; ++l) {
    const double mu = std::max(0.0, sol.z[l]);
    if (mu <= 1e-14 * (1.0 + c.spectral_norm())) continue;
    p.terms.emplace_back(l, mu);
    const Vec2 u = (1.0 / lines[l].norm()) * lines[l];
    check = check + mu * SymMatrix::outer(u);
  }
  if ((check - c).entry_l1() > 1e-12 * (1.0 + c.entry_l1()))
    throw ConfigError("Isaacs coefficient has no nonnegative decomposition on the stencil lines");
  return p;
}

Family build_family(const OperatorSpec& op, const std::vector<Vec2>& lines) {
  const int pairs = static_cast<int>(lines.size()) / 2;
  const double lo = op.lambda(), hi = op.Lambda();
  switch (op.kind()) {
    case OperatorKind::laplace: {
      StencilPolicy p;
      p.terms = {{0, 1.0}, {1, 1.0}};
      return {{p}};
    }
    case OperatorKind::pucci_plus:
    case OperatorKind::pucci_minus: {
      std::vector<StencilPolicy> all;
      for (int q = 0; q < pairs; ++q) {
        for (double m1 : {lo, hi}) {
          for (double m2 : {lo, hi}) {
            StencilPolicy p;
            p.terms = {{2 * q, m1}, {2 * q + 1, m2}};
            all.push_back(p);
          }
        }
      }
      if (op.kind() == OperatorKind::pucci_plus) return {all};
      Family f;
      for (auto& p : all) f.push_back({p});
      return f;
    }
    case OperatorKind::isaacs_minmax: {
      Family f;
      for (const auto& row : op.isaacs_coefficients()) {
        f.emplace_back();
        for (const auto& c : row) f.back().push_back(decompose(c, lines));
      }
      return f;
    }
    case OperatorKind::shifted: {
      Family f = build_family(*op.base(), lines);
      const SymMatrix& b = op.shift_matrix();
      for (auto& row : f) {
        for (auto& p : row) {
          double bv = p.constant;
          for (const auto& [l, w] : p.terms) {
            const Vec2 u = (1.0 / lines[l].norm()) * lines[l];
            bv += w * b.quad(u);
          }
          p.constant = (bv - op.offset()) / op.shift_scale();
        }
      }
      return f;
    }
  }
  throw ConfigError("unknown operator kind");
}

}  // namespace

double DiscreteSystem::directional(std::span<const double> values, std::span<const double> boundary,
                                   std::size_t node, int line) const {
  const Grid& g = *grid;
  const Arm& fwd = g.arm(node, line, 0);
  const Arm& bwd = g.arm(node, line, 1);
  const double uf = fwd.cut() ? boundary[g.arm_slot(node, line, 0)] : values[fwd.neighbor];
  const double ub = bwd.cut() ? boundary[g.arm_slot(node, line, 1)] : values[bwd.neighbor];
  const double ui = values[node];
  const std::size_t s = node * num_lines + line;
  return alpha_fwd[s] * (uf - ui) + alpha_bwd[s] * (ub - ui);
}

double DiscreteSystem::policy_value(std::span<const double> values, std::span<const double> boundary,
                                    std::size_t node, int j, int k) const {
  const StencilPolicy& p = family[j][k];
  double v = p.constant;
  for (const auto& [l, w] : p.terms) v += w * directional(values, boundary, node, l);
  return v;
}

double DiscreteSystem::apply(std::span<const double> values, std::span<const double> boundary,
                             std::size_t node) const {
  double q[64];
  const bool cached = num_lines <= 64;
  if (cached)
    for (int l = 0; l < num_lines; ++l) q[l] = directional(values, boundary, node, l);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < family.size(); ++j) {
    double inner = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < family[j].size(); ++k) {
      double v;
      if (cached) {
        v = family[j][k].constant;
        for (const auto& [l, w] : family[j][k].terms) v += w * q[l];
      } else {
        v = policy_value(values, boundary, node, static_cast<int>(j), static_cast<int>(k));
      }
      inner = std::max(inner, v);
    }
    best = std::min(best, inner);
  }
  return best;
}

DiscreteSystem discretize(const OperatorSpec& op, std::shared_ptr<const Grid> grid, int n_dirs) {
  if (!grid) throw InputError("discretize needs a grid");
  if (n_dirs < 4 || n_dirs % 4 != 0) throw ConfigError("n_dirs must be a positive multiple of 4");
  if (static_cast<std::size_t>(n_dirs / 2) > grid->num_lines())
    throw ConfigError("n_dirs exceeds the grid's stencil");

  DiscreteSystem sys;
  sys.op = op;
  sys.grid = grid;
  sys.n_dirs = n_dirs;
  sys.num_lines = n_dirs / 2;
  const std::vector<Vec2> lines(grid->lines.begin(), grid->lines.begin() + sys.num_lines);
  sys.family = build_family(op, lines);

  const std::size_t n = grid->num_nodes();
  const int nl = sys.num_lines;
  sys.alpha_fwd.resize(n * nl);
  sys.alpha_bwd.resize(n * nl);
  sys.row_scale.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double rho = 0.0;
    for (int l = 0; l < nl; ++l) {
      const double a = grid->arm(i, l, 0).length;
      const double b = grid->arm(i, l, 1).length;
      const std::size_t s = i * nl + l;
      sys.alpha_fwd[s] = 2.0 / (a * (a + b));
      sys.alpha_bwd[s] = 2.0 / (b * (a + b));
      rho += sys.alpha_fwd[s] + sys.alpha_bwd[s];
    }
    sys.row_scale[i] = 1.0 / rho;
  }
  return sys;
}

std::vector<double> apply_operator(const DiscreteSystem& system, const GridFunction& u) {
  if (u.grid != system.grid) throw InputError("grid function lives on a different grid");
  if (u.boundary.size() != system.grid->arms.size()) throw InputError("grid function has no boundary values");
  std::vector<double> out(system.num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = system.apply(u.values, u.boundary, i);
  return out;
}

double scaled_residual(const DiscreteSystem& system, const GridFunction& u, std::span<const double> f) {
  const auto fu = apply_operator(system, u);
  double r = 0.0;
  for (std::size_t i = 0; i < fu.size(); ++i) r = std::max(r, system.row_scale[i] * std::abs(fu[i] - f[i]));
  return r;
}

}  // namespace regulab
