#include "regulab/minimax_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regulab/errors.hpp"

namespace regulab {
namespace {

// Dense revised simplex for  min c.y  s.t.  E y = rhs (rhs >= 0), y >= 0,
// where E has `rows` rows and `cols` structural columns followed by `rows`
// artificial unit columns.
class DualSimplex {
 public:
  DualSimplex(int rows, int cols, std::vector<double> columns, std::vector<double> cost, std::vector<double> rhs)
      : m_(rows), ncol_(cols), cols_(std::move(columns)), cost_(std::move(cost)), rhs_(std::move(rhs)) {
    basis_.resize(m_);
    in_basis_.assign(ncol_ + m_, -1);
    for (int r = 0; r < m_; ++r) {
      basis_[r] = ncol_ + r;
      in_basis_[ncol_ + r] = r;
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) binv_[idx(r, r)] = 1.0;
    xb_ = rhs_;
    double cmax = 0.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    cost_tol_ = 1e-11 * (1.0 + cmax);
    max_pivots_ = 50 * (ncol_ + m_) + 1000;
  }

  /// Returns the simplex multipliers of the final basis.
  std::vector<double> run(int& pivots) {
    // Phase 1: minimize the sum of artificials.
    phase_ = 1;
    iterate();
    double infeas = 0.0, scale = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] >= ncol_) infeas += xb_[r];
      scale = std::max(scale, std::abs(rhs_[r]));
    }
    if (infeas > 1e-9 * scale) throw NumericalError("linear program is infeasible or unbounded", infeas);
    drive_out_artificials();
    phase_ = 2;
    iterate();
    pivots = pivots_;
    return multipliers();
  }

 private:
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * m_ + c; }
  const double* column(int j) const { return &cols_[static_cast<std::size_t>(j) * m_]; }

  double cost(int j) const {
    if (phase_ == 1) return j >= ncol_ ? 1.0 : 0.0;
    return j >= ncol_ ? 0.0 : cost_[j];
  }

  std::vector<double> multipliers() const {
    std::vector<double> pi(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb == 0.0) continue;
      for (int r = 0; r < m_; ++r) pi[r] += cb * binv_[idx(i, r)];
    }
    return pi;
  }

  double reduced_cost(int j, const std::vector<double>& pi) const {
    double d = cost(j);
    if (j >= ncol_) return d - pi[j - ncol_];
    const double* e = column(j);
    for (int r = 0; r < m_; ++r) d -= pi[r] * e[r];
    return d;
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> w(m_, 0.0);
    if (j >= ncol_) {
      for (int i = 0; i < m_; ++i) w[i] = binv_[idx(i, j - ncol_)];
      return w;
    }
    const double* e = column(j);
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += binv_[idx(i, r)] * e[r];
      w[i] = s;
    }
    return w;
  }

  void pivot(int p, int q, const std::vector<double>& w) {
    const double wp = w[p];
    for (int r = 0; r < m_; ++r) binv_[idx(p, r)] /= wp;
    xb_[p] /= wp;
    for (int i = 0; i < m_; ++i) {
      if (i == p || w[i] == 0.0) continue;
      for (int r = 0; r < m_; ++r) binv_[idx(i, r)] -= w[i] * binv_[idx(p, r)];
      xb_[i] -= w[i] * xb_[p];
    }
    in_basis_[basis_[p]] = -1;
    basis_[p] = q;
    in_basis_[q] = p;
    if (++since_refactor_ >= 64) refactor();
  }

  // Rebuilds the basis inverse from scratch by Gauss-Jordan elimination.
  void refactor() {
    since_refactor_ = 0;
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      for (int r = 0; r < m_; ++r) b[idx(r, i)] = j >= ncol_ ? (r == j - ncol_ ? 1.0 : 0.0) : column(j)[r];
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) inv[idx(r, r)] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      for (int r = c + 1; r < m_; ++r)
        if (std::abs(b[idx(r, c)]) > std::abs(b[idx(piv, c)])) piv = r;
      if (std::abs(b[idx(piv, c)]) < 1e-300) return;  // keep the product-form inverse
      for (int k = 0; k < m_; ++k) {
        std::swap(b[idx(c, k)], b[idx(piv, k)]);
        std::swap(inv[idx(c, k)], inv[idx(piv, k)]);
      }
      const double d = b[idx(c, c)];
      for (int k = 0; k < m_; ++k) {
        b[idx(c, k)] /= d;
        inv[idx(c, k)] /= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = b[idx(r, c)];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          b[idx(r, k)] -= f * b[idx(c, k)];
          inv[idx(r, k)] -= f * inv[idx(c, k)];
        }
      }
    }
    binv_ = std::move(inv);
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += binv_[idx(i, r)] * rhs_[r];
      xb_[i] = std::max(s, 0.0);
    }
  }

  void iterate() {
    int degenerate_run = 0;
    while (true) {
      if (pivots_ > max_pivots_) throw NumericalError("simplex pivot limit exceeded");
      const auto pi = multipliers();
      const bool bland = degenerate_run > 50;
      int q = -1;
      double best = -cost_tol_;
      const int limit = phase_ == 1 ? ncol_ + m_ : ncol_;
      for (int j = 0; j < limit; ++j) {
        if (in_basis_[j] >= 0) continue;
        const double d = reduced_cost(j, pi);
        if (d < best) {
          q = j;
          if (bland) break;
          best = d;
        }
      }
      if (q < 0) return;
      const auto w = ftran(q);
      int p = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (w[i] <= 1e-10) continue;
        const double t = std::max(xb_[i], 0.0) / w[i];
        if (t < ratio - 1e-14 || (t <= ratio + 1e-14 && p >= 0 && basis_[i] < basis_[p])) {
          ratio = t;
          p = i;
        }
      }
      if (p < 0) throw NumericalError("linear program dual is unbounded (primal infeasible)");
      degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
      pivot(p, q, w);
      ++pivots_;
    }
  }

  void drive_out_artificials() {
    for (int p = 0; p < m_; ++p) {
      if (basis_[p] < ncol_) continue;
      for (int j = 0; j < ncol_; ++j) {
        if (in_basis_[j] >= 0) continue;
        const auto w = ftran(j);
        if (std::abs(w[p]) > 1e-9) {
          pivot(p, j, w);
          break;
        }
      }
    }
  }

  int m_;
  int ncol_;
  std::vector<double> cols_;
  std::vector<double> cost_;
  std::vector<double> rhs_;
  std::vector<int> basis_;
  std::vector<int> in_basis_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  double cost_tol_ = 1e-11;
  int phase_ = 1;
  int pivots_ = 0;
  int max_pivots_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

LinearProgram::LinearProgram(int num_vars) : n_(num_vars), objective_(num_vars, 0.0) {
  if (num_vars < 1) throw InputError("linear program needs at least one variable");
}

void LinearProgram::set_objective(std::span<const double> g) {
  if (static_cast<int>(g.size()) != n_) throw InputError("objective length mismatch");
  objective_.assign(g.begin(), g.end());
}

void LinearProgram::add_constraint(std::span<const double> coeffs, double rhs) {
  if (static_cast<int>(coeffs.size()) != n_) throw InputError("constraint length mismatch");
  coeffs_.insert(coeffs_.end(), coeffs.begin(), coeffs.end());
  rhs_.push_back(rhs);
}

LinearProgram::Solution LinearProgram::solve() const {
  const int rows = n_;
  std::vector<double> columns;
  std::vector<double> cost;
  columns.reserve(coeffs_.size());
  cost.reserve(rhs_.size());

  // Row flips make the dual right-hand side nonnegative.
  std::vector<double> sigma(rows, 1.0), rhs(rows);
  for (int r = 0; r < rows; ++r) {
    sigma[r] = objective_[r] < 0.0 ? -1.0 : 1.0;
    rhs[r] = sigma[r] * objective_[r];
  }

  for (int i = 0; i < num_constraints(); ++i) {
    const double* a = &coeffs_[static_cast<std::size_t>(i) * n_];
    double amax = 0.0;
    for (int r = 0; r < n_; ++r) amax = std::max(amax, std::abs(a[r]));
    if (amax == 0.0) {
      if (rhs_[i] > 0.0) throw NumericalError("constraint 0 >= positive value is infeasible");
      continue;
    }
    const double s = 1.0 / amax;
    for (int r = 0; r < n_; ++r) columns.push_back(sigma[r] * a[r] * s);
    cost.push_back(-rhs_[i] * s);
  }
  const int ncol = static_cast<int>(cost.size());

  DualSimplex simplex(rows, ncol, std::move(columns), std::move(cost), std::move(rhs));
  Solution sol;
  const auto pi = simplex.run(sol.pivots);
  sol.z.resize(n_);
  for (int r = 0; r < n_; ++r) sol.z[r] = -sigma[r] * pi[r];
  sol.objective = 0.0;
  for (int r = 0; r < n_; ++r) sol.objective += objective_[r] * sol.z[r];
  return sol;
}

MinimaxFit minimax_fit(int num_basis, std::span<const double> basis_rows, std::span<const double> values,
                       std::span<const double> weights, bool tie_break) {
  const std::size_t count = values.size();
  if (weights.size() != count || basis_rows.size() != count * num_basis) {
    throw InputError("minimax_fit: inconsistent sample arrays");
  }
  bool any_weight = false;
  double fmax = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i]) || !std::isfinite(values[i])) {
      throw InputError("minimax_fit: weights must be finite and nonnegative");
    }
    any_weight = any_weight || weights[i] > 0.0;
    fmax = std::max(fmax, std::abs(values[i]));
  }
  if (!any_weight) throw InputError("minimax_fit: need at least one positively weighted sample");

  const int nv = num_basis + 1;
  LinearProgram lp(nv);
  std::vector<double> g(nv, 0.0);
  g[num_basis] = 1.0;
  lp.set_objective(g);
  std::vector<double> row(nv);
  for (std::size_t i = 0; i < count; ++i) {
    const double* phi = &basis_rows[i * num_basis];
    for (int j = 0; j < num_basis; ++j) row[j] = phi[j];
    row[num_basis] = weights[i];
    lp.add_constraint(row, values[i]);
    for (int j = 0; j < num_basis; ++j) row[j] = -phi[j];
    lp.add_constraint(row, -values[i]);
  }
  const auto first = lp.solve();

  const auto achieved_k = [&](const std::vector<double>& c) {
    double k = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      double pred = 0.0;
      for (int j = 0; j < num_basis; ++j) pred += basis_rows[i * num_basis + j] * c[j];
      const double res = std::abs(values[i] - pred);
      if (weights[i] > 0.0) {
        k = std::max(k, res / weights[i]);
      } else if (res > 1e-10 * (1.0 + fmax)) {
        throw NumericalError("minimax_fit: pinned sample not interpolated", res);
      }
    }
    return k;
  };

  MinimaxFit fit;
  fit.coeffs.assign(first.z.begin(), first.z.begin() + num_basis);
  fit.K = achieved_k(fit.coeffs);

  if (tie_break) {
    const double k_allow = fit.K * (1.0 + 1e-9);
    const double abs_slack = 1e-13 * (1.0 + fmax);
    const int nt = 2 * num_basis;
    LinearProgram norm_lp(nt);
    std::vector<double> gt(nt, 0.0);
    for (int j = 0; j < num_basis; ++j) gt[num_basis + j] = 1.0;
    norm_lp.set_objective(gt);
    std::vector<double> rt(nt);
    for (std::size_t i = 0; i < count; ++i) {
      const double* phi = &basis_rows[i * num_basis];
      const double band = k_allow * weights[i] + abs_slack;
      std::fill(rt.begin(), rt.end(), 0.0);
      for (int j = 0; j < num_basis; ++j) rt[j] = phi[j];
      norm_lp.add_constraint(rt, values[i] - band);
      for (int j = 0; j < num_basis; ++j) rt[j] = -phi[j];
      norm_lp.add_constraint(rt, -values[i] - band);
    }
    for (int j = 0; j < num_basis; ++j) {
      std::fill(rt.begin(), rt.end(), 0.0);
      rt[num_basis + j] = 1.0;
      rt[j] = 1.0;
      norm_lp.add_constraint(rt, 0.0);
      rt[j] = -1.0;
      norm_lp.add_constraint(rt, 0.0);
    }
    try {
      const auto second = norm_lp.solve();
      std::vector<double> c(second.z.begin(), second.z.begin() + num_basis);
      const double k2 = achieved_k(c);
      // The slack must not be spent on K itself; keep the optimal vertex otherwise.
      if (k2 <= std::max(k_allow, fit.K + 1e-14)) {
        fit.coeffs = std::move(c);
        fit.K = k2;
      }
    } catch (const NumericalError&) {
      // The K-optimal vertex is still a valid answer.
    }
  }
  return fit;
}

}  // namespace regulab
