#include "regulab/solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "regulab/errors.hpp"

namespace regulab {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

class PolicySolver {
 public:
  PolicySolver(const DiscreteSystem& sys, std::span<const double> f, const std::vector<double>& boundary)
      : sys_(sys), f_(f), boundary_(boundary), rho_(sys.num_nodes(), 0.0) {
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      for (int l = 0; l < sys.num_lines; ++l) {
        const std::size_t s = i * sys.num_lines + l;
        rho_[i] += sys.alpha_fwd[s] + sys.alpha_bwd[s];
      }
    }
  }

  // Solves the linear system of the policy (pj, pk), one refinement step included.
  std::vector<double> linear_solve(const std::vector<int>& pj, const std::vector<int>& pk) {
    const std::size_t n = sys_.num_nodes();
    const Grid& g = *sys_.grid;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * 5);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      const StencilPolicy& p = sys_.family[pj[i]][pk[i]];
      const double sigma = sys_.row_scale[i];
      double diag = 0.0;
      double rhs = p.constant - f_[i];
      for (const auto& [l, w] : p.terms) {
        const std::size_t s = i * sys_.num_lines + l;
        for (int side = 0; side < 2; ++side) {
          const double a = w * (side == 0 ? sys_.alpha_fwd[s] : sys_.alpha_bwd[s]);
          const Arm& arm = g.arm(i, l, side);
          diag += a;
          if (arm.cut())
            rhs += a * boundary_[g.arm_slot(i, l, side)];
          else
            trip.emplace_back(static_cast<int>(i), arm.neighbor, -sigma * a);
        }
      }
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), sigma * diag);
      b[i] = sigma * rhs;
    }
    SpMat A(static_cast<int>(n), static_cast<int>(n));
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw NumericalError("policy matrix is singular", -1.0);
    Eigen::VectorXd x = lu.solve(b);
    const Eigen::VectorXd r = b - A * x;
    x += lu.solve(r);
    ++solves_;
    return std::vector<double>(x.data(), x.data() + n);
  }

  double threshold(std::size_t i, double cur, double unorm) const {
    return 1e-12 * (1.0 + std::abs(cur)) + 1e-14 * rho_[i] * (1.0 + unorm);
  }

  // Max player: k_i <- argmax_k value(j_i, k).
  bool improve_k(const std::vector<double>& u, const std::vector<int>& pj, std::vector<int>& pk) const {
    const double unorm = sup(u);
    bool changed = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& row = sys_.family[pj[i]];
      if (row.size() == 1) continue;
      const double cur = sys_.policy_value(u, boundary_, i, pj[i], pk[i]);
      int best = pk[i];
      double best_v = cur + threshold(i, cur, unorm);
      for (int k = 0; k < static_cast<int>(row.size()); ++k) {
        const double v = sys_.policy_value(u, boundary_, i, pj[i], k);
        if (v > best_v) {
          best_v = v;
          best = k;
        }
      }
      if (best != pk[i]) {
        pk[i] = best;
        changed = true;
      }
    }
    return changed;
  }

  // Min player: j_i <- argmin_j max_k value(j, k); k_i follows the new j.
  bool improve_j(const std::vector<double>& u, std::vector<int>& pj, std::vector<int>& pk) const {
    const double unorm = sup(u);
    bool changed = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (sys_.family.size() == 1) break;
      int best_j = pj[i], best_k = pk[i];
      const double cur = row_max(u, i, pj[i], best_k);
      double best_v = cur - threshold(i, cur, unorm);
      for (int j = 0; j < static_cast<int>(sys_.family.size()); ++j) {
        int k = 0;
        const double v = row_max(u, i, j, k);
        if (v < best_v) {
          best_v = v;
          best_j = j;
          best_k = k;
        }
      }
      if (best_j != pj[i]) {
        pj[i] = best_j;
        pk[i] = best_k;
        changed = true;
      }
    }
    return changed;
  }

  // Both players at once, no hysteresis beyond the threshold.
  bool improve_both(const std::vector<double>& u, std::vector<int>& pj, std::vector<int>& pk) const {
    const bool a = improve_j(u, pj, pk);
    const bool b = improve_k(u, pj, pk);
    return a || b;
  }

  int solves() const { return solves_; }

 private:
  double row_max(const std::vector<double>& u, std::size_t i, int j, int& arg) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(sys_.family[j].size()); ++k) {
      const double v = sys_.policy_value(u, boundary_, i, j, k);
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    return best;
  }

  static double sup(const std::vector<double>& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
  }

  const DiscreteSystem& sys_;
  std::span<const double> f_;
  const std::vector<double>& boundary_;
  std::vector<double> rho_;
  int solves_ = 0;
};

}  // namespace

GridFunction solve(const DiscreteSystem& system, std::span<const double> f, std::vector<double> boundary,
                   const SolveOptions& options, SolveInfo* info) {
  const std::size_t n = system.num_nodes();
  if (f.size() != n) throw InputError("right-hand side has the wrong size");
  if (boundary.size() != system.grid->arms.size()) throw InputError("boundary values have the wrong size");
  if (!(options.tol > 0.0)) throw InputError("solver tolerance must be positive");
  for (std::size_t s = 0; s < boundary.size(); ++s) {
    if (system.grid->arms[s].cut() && !std::isfinite(boundary[s])) throw InputError("non-finite boundary value");
  }

  GridFunction out;
  out.grid = system.grid;
  out.boundary = std::move(boundary);

  PolicySolver ps(system, f, out.boundary);
  std::vector<int> pj(n, 0), pk(n, 0);
  std::vector<double> u(n, 0.0);
  ps.improve_both(u, pj, pk);
  SolveInfo local;
  const auto budget_left = [&] { return ps.solves() < options.max_iter; };
  const auto residual = [&] {
    out.values = u;
    return scaled_residual(system, out, f);
  };

  bool settled = false;
  for (int outer = 0; outer < 200 && budget_left(); ++outer) {
    ++local.outer_iterations;
    bool inner_done = false;
    while (budget_left()) {
      u = ps.linear_solve(pj, pk);
      if (!ps.improve_k(u, pj, pk)) {
        inner_done = true;
        break;
      }
    }
    if (!inner_done) break;
    if (!ps.improve_j(u, pj, pk)) {
      settled = true;
      break;
    }
  }
  double res = residual();
  if (!settled || res > options.tol) {
    local.fallback = true;
    while (budget_left() && res > options.tol) {
      u = ps.linear_solve(pj, pk);
      res = residual();
      if (!ps.improve_both(u, pj, pk) && res > options.tol) break;
    }
  }
  local.residual = res;
  local.linear_solves = ps.solves();
  if (info) *info = local;
  if (!(res <= options.tol)) throw NumericalError("policy iteration did not converge", res);
  return out;
}

GridFunction solve(const DiscreteSystem& system, const GridFunction& f, const BoundaryFunction& g,
                   const SolveOptions& options, SolveInfo* info) {
  if (f.grid != system.grid) throw InputError("right-hand side lives on a different grid");
  return solve(system, f.values, boundary_values(*system.grid, g), options, info);
}

ComparisonReport comparison_check(const DiscreteSystem& system, const GridFunction& u, const GridFunction& v,
                                  double premise_tol) {
  if (u.grid != system.grid || v.grid != system.grid) throw InputError("comparison needs a shared grid");
  ComparisonReport rep;
  rep.premise = true;
  for (std::size_t s = 0; s < u.boundary.size() && rep.premise; ++s) {
    if (system.grid->arms[s].cut() && u.boundary[s] > v.boundary[s]) rep.premise = false;
  }
  const auto fu = apply_operator(system, u);
  const auto fv = apply_operator(system, v);
  for (std::size_t i = 0; i < fu.size() && rep.premise; ++i) {
    if (system.row_scale[i] * (fu[i] - fv[i]) < -premise_tol) rep.premise = false;
  }
  rep.max_difference = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.values.size(); ++i)
    rep.max_difference = std::max(rep.max_difference, u.values[i] - v.values[i]);
  rep.holds = !rep.premise || rep.max_difference <= 1e-10;
  return rep;
}

GridFunction solve_barrier(double delta, double h, double lambda, double Lambda, int n_dirs) {
  if (!(delta > 0.0) || delta >= 0.25) throw InputError("barrier needs 0 < delta < 1/4");
  if (!(h > 0.0) || h > delta / 4.0 * (1.0 + 1e-12)) throw InputError("barrier needs h <= delta/4");
  const Domain domain = Domain::shifted_half_ball(delta);
  const auto grid = build_grid(domain, h, 1.0 + 2.0 * delta, n_dirs);
  const auto sys = discretize(OperatorSpec::pucci_plus(lambda, Lambda), grid, n_dirs);
  const std::vector<double> f(grid->num_nodes(), 0.0);
  auto bnd = boundary_values(*grid, [](Vec2, int piece) { return piece == 0 ? 0.0 : 1.0; });
  return solve(sys, f, std::move(bnd));
}

}  // namespace regulab
