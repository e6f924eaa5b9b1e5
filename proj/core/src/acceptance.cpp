#include "regulab/acceptance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include "json.hpp"
#include "regulab/errors.hpp"
#include "regulab/pointwise.hpp"

namespace regulab {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

SymMatrix random_sym(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// ---------------------------------------------------------------- suite

ExperimentConfig flat_config() {
  ExperimentConfig c;
  c.name = "rates_flat";
  c.domain = DomainKind::half_ball;
  c.grid.h = 1.0 / 128.0;
  c.grid.n_dirs = 4;
  // Every term carries a factor x2, so g = 0 on the flat part.
  c.data.g.c1 = {0.0, 1.0};
  c.data.g.c2 = SymMatrix(0.0, 0.25, 1.0);
  c.data.g.cubic = {0.0, 1.0, 0.0, -0.5};
  c.iteration.alpha = 0.5;
  c.iteration.r_ceiling = 0.25;
  c.outputs = "out/rates_flat";
  return c;
}

ExperimentConfig bump_config(double h) {
  ExperimentConfig c;
  c.name = "c1alpha_bump";
  c.domain = DomainKind::graph_bump;
  c.domain_params = {0.3, 1.5};
  c.grid.h = h;
  c.grid.n_dirs = 4;
  PolySpec outer;
  outer.c1 = {0.0, 1.0};
  c.data.g_outer = outer;
  c.iteration.alpha = 0.5;
  c.iteration.r_ceiling = 0.25;
  c.outputs = "out/c1alpha_bump";
  return c;
}

ExperimentConfig isaacs_config() {
  ExperimentConfig c;
  c.name = "c2alpha_isaacs";
  c.op_tag = "isaacs";
  c.lambda = 1.0;
  c.Lambda = 2.0;
  c.domain = DomainKind::half_ball;
  c.grid.h = 1.0 / 128.0;
  const double b = 3.0;
  const double bnn = 0.5 * solve_recession_constant(OperatorSpec::isaacs(1.0, 2.0), SymMatrix(0.0, b, 0.0), 1e-13);
  c.data.g.c2 = SymMatrix(0.0, 0.5 * b, bnn);
  c.data.g.holder_amplitude = 0.5;
  c.data.g.holder_exponent = 2.25;
  c.data.f.manufactured = true;
  c.iteration.alpha = 0.25;
  c.analyzers = {"c1a", "c2a"};
  c.outputs = "out/c2alpha_isaacs";
  return c;
}

ExperimentConfig slit_config() {
  ExperimentConfig c;
  c.name = "c2alpha_slit";
  c.domain = DomainKind::slit_ball;
  c.grid.h = 1.0 / 128.0;
  c.grid.n_dirs = 4;
  // 2 x1 x2 + Re z^3 - Im z^3 / 2: harmonic.
  c.data.g.c2 = SymMatrix(0.0, 1.0, 0.0);
  c.data.g.cubic = {1.0, -1.5, -3.0, 0.5};
  c.iteration.alpha = 0.25;
  c.analyzers = {"c1a", "c2a"};
  c.outputs = "out/c2alpha_slit";
  return c;
}

// ---------------------------------------------------------------- criteria

CriterionResult operator_algebra() {
  CriterionResult r{1, "operator algebra", true, ""};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.0, 3.0);
  double worst = 0.0;
  const double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 1000; ++i) {
    const SymMatrix m = random_sym(rng, 5.0), n = random_sym(rng, 5.0);
    const double t = ut(rng);
    const double pp = pucci_plus(m, lo, hi), pm = pucci_minus(m, lo, hi);
    worst = std::max(worst, pm - pp);
    worst = std::max(worst, std::abs(pucci_plus(-1.0 * m, lo, hi) + pm));
    worst = std::max(worst, std::abs(pucci_plus(t * m, lo, hi) - t * pp));
    worst = std::max(worst, pucci_plus(m + n, lo, hi) - pp - pucci_plus(n, lo, hi));
    worst = std::max(worst, pm + pucci_minus(n, lo, hi) - pucci_minus(m + n, lo, hi));
    worst = std::max(worst, std::abs(pucci_plus(m, 1.0, 1.0) - m.trace()));
    worst = std::max(worst, std::abs(pucci_minus(m, 1.0, 1.0) - m.trace()));
  }
  if (worst > 1e-12) r.pass = false;
  int failing = 0;
  double f0 = 0.0;
  for (const auto& op : operator_catalog(lo, hi)) {
    if (!check_uniform_ellipticity(op, 1000, 7).pass) ++failing;
    f0 = std::max(f0, std::abs(op(SymMatrix{})));
  }
  if (failing > 0 || f0 > 1e-12) r.pass = false;
  r.detail = "identity defect " + fmt("%.2e", worst) + ", ellipticity failures " + std::to_string(failing) +
             ", max |F(0)| " + fmt("%.1e", f0);
  return r;
}

CriterionResult scheme_exactness() {
  CriterionResult r{2, "scheme exactness", true, ""};
  const auto affine = [](Vec2 x) { return 0.3 - x.x1 + 2.0 * x.x2; };
  double worst_affine = 0.0;
  for (auto [kind, params] : {std::pair{DomainKind::half_ball, std::vector<double>{}},
                              {DomainKind::graph_bump, std::vector<double>{0.3, 1.5}},
                              {DomainKind::slit_ball, std::vector<double>{}}}) {
    const auto grid = build_grid(make_domain(kind, params), 1.0 / 64.0, 1.0, 16);
    for (const auto& op : operator_catalog(1.0, 2.0)) {
      const auto sys = discretize(op, grid, 16);
      const std::vector<double> f(grid->num_nodes(), 0.0);
      const auto u = solve(sys, f, boundary_values(*grid, [&](Vec2 p, int) { return affine(p); }));
      for (std::size_t i = 0; i < f.size(); ++i)
        worst_affine = std::max(worst_affine, std::abs(u.values[i] - affine(grid->nodes[i])));
    }
  }
  const auto quad = [](Vec2 x) { return x.x1 * x.x1 - x.x2 * x.x2; };
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 64.0, 1.0, 4);
  const auto sys = discretize(OperatorSpec::laplace(), grid, 4);
  const std::vector<double> f(grid->num_nodes(), 0.0);
  const auto u = solve(sys, f, boundary_values(*grid, [&](Vec2 p, int) { return quad(p); }));
  double worst_quad = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    worst_quad = std::max(worst_quad, std::abs(u.values[i] - quad(grid->nodes[i])));
  r.pass = worst_affine <= 1e-9 && worst_quad <= 1e-8;
  r.detail = "affine nodal error " + fmt("%.2e", worst_affine) + " (3 domains x 4 operators), x1^2-x2^2 error " +
             fmt("%.2e", worst_quad);
  return r;
}

CriterionResult comparison_principle() {
  CriterionResult r{3, "discrete comparison", true, ""};
  const std::vector<std::pair<DomainKind, std::vector<double>>> domains{
      {DomainKind::half_ball, {}}, {DomainKind::graph_bump, {0.3, 1.5}}, {DomainKind::slit_ball, {}}};
  const auto ops = operator_catalog(1.0, 2.0);
  int violations = 0, premise = 0;
  double worst = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    std::uniform_real_distribution<double> u01(0.0, 1.0), usym(-1.0, 1.0);
    const auto& [kind, params] = domains[trial % 3];
    const auto grid = build_grid(make_domain(kind, params), 1.0 / 16.0, 1.0, 16);
    const auto sys = discretize(ops[trial % ops.size()], grid, 16);
    const double a0 = usym(rng), a1 = usym(rng), a2 = usym(rng), k1 = 1.0 + 4.0 * u01(rng);
    const double gap0 = 0.5 * u01(rng), gap1 = 0.5 * u01(rng);
    const auto gv = [&](Vec2 p, int) { return a0 + a1 * std::sin(k1 * p.x1) + a2 * p.x2 * p.x2; };
    const auto gu = [&](Vec2 p, int piece) { return gv(p, piece) - gap0 - gap1 * std::abs(std::cos(3.0 * p.x1)); };
    std::vector<double> fv(grid->num_nodes()), fu(grid->num_nodes());
    for (std::size_t i = 0; i < fv.size(); ++i) {
      fv[i] = 4.0 * usym(rng);
      fu[i] = fv[i] + u01(rng);
    }
    const auto v = solve(sys, fv, boundary_values(*grid, gv));
    const auto u = solve(sys, fu, boundary_values(*grid, gu));
    const ComparisonReport rep = comparison_check(sys, u, v);
    if (!rep.holds) ++violations;
    if (rep.premise) ++premise;
    worst = std::max(worst, rep.max_difference);
  }
  r.pass = violations == 0 && premise == 100;
  r.detail = std::to_string(violations) + " violations, premise held in " + std::to_string(premise) +
             "/100, max(u - v) " + fmt("%.3e", worst);
  return r;
}

CriterionResult flat_rates() {
  CriterionResult r{4, "C1,alpha rate at a flat boundary", true, ""};
  const ExperimentResult res = execute(flat_config());
  const double slope = res.c1a_rate->slope;
  const double bound = std::sqrt(0.5) * 1.1;
  const double ratio = res.c1a_cauchy->max_ratio;
  r.pass = slope >= 1.45 && ratio <= bound;
  r.detail = "slope " + fmt("%.4f", slope) + " (>= 1.45), Cauchy ratio " + fmt("%.4f", ratio) + " (<= " +
             fmt("%.4f", bound) + "), Du0_n " + fmt("%.6f", res.c1a->Du0.x2);
  return r;
}

CriterionResult bump_rates() {
  CriterionResult r{5, "C1,alpha rate at a power bump", true, ""};
  const ExperimentResult coarse = execute(bump_config(1.0 / 128.0));
  const ExperimentResult fine = execute(bump_config(1.0 / 256.0));
  const double s1 = coarse.c1a_rate->slope, s2 = fine.c1a_rate->slope;
  const double drift = std::abs(coarse.c1a->Du0.x2 - fine.c1a->Du0.x2);
  r.pass = s1 >= 1.4 && s2 >= 1.4 && drift <= 1e-3;
  r.detail = "slopes " + fmt("%.4f", s1) + " (h=1/128), " + fmt("%.4f", s2) + " (h=1/256); Du0_n " +
             fmt("%.6f", coarse.c1a->Du0.x2) + " -> " + fmt("%.6f", fine.c1a->Du0.x2) + ", drift " +
             fmt("%.2e", drift);
  return r;
}

CriterionResult isaacs_rates() {
  CriterionResult r{6, "C2,alpha jet for the Isaacs operator", true, ""};
  const ExperimentResult res = execute(isaacs_config());
  double b_err = 0.0, worst_f = 0.0;
  for (double b : res.c2a->b1n) b_err = std::max(b_err, std::abs(b - 3.0));
  for (double v : res.c2a->trace.constraint_residuals) worst_f = std::max(worst_f, v);
  const double slope = res.c2a_rate->slope;
  r.pass = b_err <= 1e-2 && worst_f <= 1e-8 && slope >= 2.25 - 0.15;
  r.detail = "max |b_1n - 3| " + fmt("%.2e", b_err) + ", max |F(b_k)| " + fmt("%.1e", worst_f) + ", slope " +
             fmt("%.4f", slope) + " (>= 2.10)";
  return r;
}

CriterionResult slit_domain() {
  CriterionResult r{7, "slit domain", true, ""};
  const BoundaryChart chart = classify_boundary(make_domain(DomainKind::slit_ball), 2, 0.5);
  const double p_err = std::abs(chart.P.c2.a11() - 0.5);
  const double other = std::abs(chart.P.c0) + std::abs(chart.P.c1.x1) + std::abs(chart.P.c1.x2) +
                       std::abs(chart.P.c2.a12()) + std::abs(chart.P.c2.a22());
  const ExperimentResult res = execute(slit_config());
  const double slope = res.c2a_rate->slope;
  r.pass = p_err <= 1e-6 && other <= 1e-6 && chart.K <= 1e-6 && slope >= 2.25 - 0.2;
  r.detail = "P x1^2 coefficient " + fmt("%.9f", chart.P.c2.a11()) + ", K " + fmt("%.2e", chart.K) +
             ", C2,alpha slope " + fmt("%.4f", slope) + " (>= 2.05)";
  return r;
}

CriterionResult localization() {
  CriterionResult r{8, "localization and barrier", true, ""};
  std::vector<double> ratios, barrier;
  double vmin = 1e300, vmax = -1e300;
  bool osc_ok = true;
  for (double delta : {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}) {
    const Domain dom = make_domain(DomainKind::graph_bump, {0.5 * delta, 1.5});
    const auto rep = localization_experiment(OperatorSpec::isaacs(1.0, 2.0), dom, delta, delta / 4.0,
                                             LocalizationData::standard(delta));
    osc_ok = osc_ok && rep.osc <= delta * (1.0 + 1e-9);
    ratios.push_back(rep.fitted_C);

    const GridFunction v = solve_barrier(delta, delta / 4.0);
    double sup = 0.0;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      vmin = std::min(vmin, v.values[i]);
      vmax = std::max(vmax, v.values[i]);
      const Vec2 x = v.grid->nodes[i];
      const Vec2 c{x.x1, x.x2 + delta};
      if (c.norm() < 4.0 * delta) sup = std::max(sup, v.values[i]);
    }
    barrier.push_back(sup / delta);
  }
  const auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  const double s1 = spread(ratios), s2 = spread(barrier);
  r.pass = osc_ok && s1 <= 2.0 && s2 <= 2.0 && vmin >= -1e-12 && vmax <= 1.0 + 1e-12;
  r.detail = "sup/delta " + fmt("%.3f", ratios[0]) + ", " + fmt("%.3f", ratios[1]) + ", " + fmt("%.3f", ratios[2]) +
             " (spread " + fmt("%.3f", s1) + "); barrier sup/delta " + fmt("%.3f", barrier[0]) + ", " +
             fmt("%.3f", barrier[1]) + ", " + fmt("%.3f", barrier[2]) + " (spread " + fmt("%.3f", s2) +
             "); v in [" + fmt("%.2e", vmin) + ", " + fmt("%.6f", vmax) + "]";
  return r;
}

CriterionResult normalization() {
  CriterionResult r{9, "normalization pipeline", true, ""};
  const Domain half = make_domain(DomainKind::half_ball);
  const Domain ball = make_domain(DomainKind::ball);
  const auto grid_half = build_grid(half, 1.0 / 64.0, 1.0, 4);
  const auto grid_ball = build_grid(ball, 1.0 / 64.0, 1.0, 4);
  const BoundaryChart chart_half = classify_boundary(half, 2, 0.5);
  const BoundaryChart chart_ball = classify_boundary(ball, 2, 0.5);
  const char* tags[] = {"laplace", "pucci+", "pucci-", "isaacs"};
  IterationConfig cfg;
  cfg.alpha = 0.5;
  double worst_f4 = 0.0, worst_du = 0.0, worst_t = -1e300;
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::mt19937_64 rng(500 + trial);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 1.5), ratio(1.0, 3.0);
    const double lambda = pos(rng);
    const OperatorSpec op = make_operator(tags[trial % 4], lambda, lambda * ratio(rng));
    const bool curved = trial % 2 == 1;
    const Domain& dom = curved ? ball : half;
    const auto& grid = curved ? grid_ball : grid_half;
    const BoundaryChart& chart = curved ? chart_ball : chart_half;
    const double a_true = curved ? 0.5 : 0.0;
    PolyJet g_jet;
    g_jet.c0 = u(rng);
    g_jet.c1 = {u(rng), u(rng)};
    g_jet.c2 = SymMatrix(u(rng), u(rng), u(rng));
    const double beta = 0.5 + 1.5 * std::abs(u(rng)), gamma = u(rng);
    const auto ustar = [&](Vec2 x) { return g_jet(x) + beta * (x.x2 - a_true * x.x1 * x.x1) + gamma * x.x2 * x.x2; };
    const double f0 =
        op(g_jet.hessian() + SymMatrix(-2.0 * beta * a_true, 0.0, 2.0 * gamma));
    double du0 = 0.0;
    const NormalizedProblem np =
        normalize_with_refinement(sample(grid, ustar), g_jet, f0, op, chart, dom, cfg, 1e-6, &du0);
    const double f4 = std::abs(np.op4(SymMatrix{}));
    const double t_gap = std::abs(np.t) - std::abs(np.F3_at_zero) / op.lambda();
    worst_f4 = std::max(worst_f4, f4);
    worst_du = std::max(worst_du, du0);
    worst_t = std::max(worst_t, t_gap);
    if (f4 > 1e-10 || du0 > 1e-3 || t_gap > 1e-10) ++failures;
  }
  r.pass = failures == 0;
  r.detail = std::to_string(failures) + "/50 failing; max |F4(0)| " + fmt("%.1e", worst_f4) + ", max |Du3(0)| " +
             fmt("%.1e", worst_du) + ", max |t| - |F3(0)|/lambda " + fmt("%.3e", worst_t);
  return r;
}

// Brute-force oracle for the pointwise fit.
struct OracleFit {
  std::vector<double> coeffs;  // monomials of d = x - x0 after the pinned constant
  double K = 0.0;
};

std::vector<double> monomials(Vec2 d, int k) {
  std::vector<double> m;
  if (k >= 1) m.insert(m.end(), {d.x1, d.x2});
  if (k >= 2) m.insert(m.end(), {d.x1 * d.x1, d.x1 * d.x2, d.x2 * d.x2});
  return m;
}

// Vertex enumeration: the optimum of the minimax LP has n+1 active
// constraints among |r_i - phi_i c| = K w_i.
OracleFit vertex_oracle(const std::vector<Vec2>& d, const std::vector<double>& r, const std::vector<double>& w,
                        int k) {
  const int n = static_cast<int>(monomials({0.0, 0.0}, k).size());
  const int m = static_cast<int>(d.size());
  OracleFit best;
  best.K = std::numeric_limits<double>::infinity();
  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<int> pick(n + 1);
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == n + 1) {
      for (int signs = 0; signs < (1 << (n + 1)); ++signs) {
        Eigen::MatrixXd A(n + 1, n + 1);
        Eigen::VectorXd b(n + 1);
        for (int q = 0; q <= n; ++q) {
          const auto phi = monomials(d[pick[q]], k);
          for (int c = 0; c < n; ++c) A(q, c) = phi[c];
          A(q, n) = ((signs >> q) & 1 ? 1.0 : -1.0) * w[pick[q]];
          b[q] = r[pick[q]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd z = lu.solve(b);
        const double K = z[n];
        if (K < -1e-12) continue;
        bool feasible = true;
        for (int i = 0; i < m && feasible; ++i) {
          const auto phi = monomials(d[i], k);
          double p = 0.0;
          for (int c = 0; c < n; ++c) p += phi[c] * z[c];
          feasible = std::abs(r[i] - p) <= K * w[i] * (1.0 + 1e-9) + 1e-12;
        }
        if (!feasible) continue;
        double norm = 0.0;
        for (int c = 0; c < n; ++c) norm += std::abs(z[c]);
        const bool better = K < best.K * (1.0 - 1e-9) || (K <= best.K * (1.0 + 1e-9) && norm < best_norm);
        if (better) {
          best.K = std::max(K, 0.0);
          best.coeffs.assign(z.data(), z.data() + n);
          best_norm = norm;
        }
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  return best;
}

// Coefficient-grid search with successive zooming.
OracleFit grid_oracle(const std::vector<Vec2>& d, const std::vector<double>& r, const std::vector<double>& w, int k) {
  const int n = static_cast<int>(monomials({0.0, 0.0}, k).size());
  const auto K_of = [&](const std::vector<double>& c) {
    double K = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto phi = monomials(d[i], k);
      double p = 0.0;
      for (int q = 0; q < n; ++q) p += phi[q] * c[q];
      K = std::max(K, std::abs(r[i] - p) / w[i]);
    }
    return K;
  };
  OracleFit best;
  best.coeffs.assign(n, 0.0);
  best.K = K_of(best.coeffs);
  if (n == 0) return best;
  double rmax = 0.0, dmin = 1e300;
  for (std::size_t i = 0; i < d.size(); ++i) {
    rmax = std::max(rmax, std::abs(r[i]));
    dmin = std::min(dmin, d[i].norm());
  }
  double half = 4.0 * rmax / dmin + 1.0;
  const int pts = 61;
  std::vector<double> center(n, 0.0), c(n);
  for (int level = 0; level < 120; ++level) {
    std::vector<double> level_best = center;
    double level_K = K_of(center);
    for (int a = 0; a < pts; ++a) {
      for (int b = 0; b < (n > 1 ? pts : 1); ++b) {
        c[0] = center[0] + half * (2.0 * a / (pts - 1) - 1.0);
        if (n > 1) c[1] = center[1] + half * (2.0 * b / (pts - 1) - 1.0);
        const double K = K_of(c);
        if (K < level_K) {
          level_K = K;
          level_best = c;
        }
      }
    }
    center = level_best;
    half *= 0.7;
  }
  best.coeffs = center;
  best.K = K_of(center);
  return best;
}

CriterionResult fit_oracle() {
  CriterionResult r{10, "pointwise fit against brute force", true, ""};
  double worst_K = 0.0, worst_c = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(77 + trial);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int k = trial % 2 == 0 ? 1 : 2;
    const double alpha = 0.25 + 0.25 * (trial % 3);
    const int count = k == 1 ? 6 + trial % 4 : 7 + trial % 3;
    const Vec2 x0{0.3 * u(rng), 0.3 * u(rng)};
    const double cub[4] = {u(rng), u(rng), u(rng), u(rng)};
    const auto f = [&](Vec2 x) {
      return 1.0 + 2.0 * x.x1 - x.x2 + x.x1 * x.x2 + cub[0] * x.x1 * x.x1 * x.x1 + cub[1] * x.x2 * x.x2 * x.x2 +
             0.2 * std::sin(5.0 * x.x1 + cub[2]) + cub[3] * std::abs(x.x2);
    };
    std::vector<FitSample> samples{{x0, f(x0)}};
    std::vector<Vec2> d;
    std::vector<double> res, w;
    while (static_cast<int>(samples.size()) < count) {
      const Vec2 p{x0.x1 + u(rng), x0.x2 + u(rng)};
      samples.push_back({p, f(p)});
      d.push_back(p - x0);
      res.push_back(f(p) - f(x0));
      w.push_back(std::pow(d.back().norm(), k + alpha));
    }
    const FitResult fit = pointwise_fit(samples, x0, k, alpha);
    const OracleFit oracle = k == 2 ? vertex_oracle(d, res, w, k) : grid_oracle(d, res, w, k);
    std::vector<double> got;
    if (k >= 1) got.insert(got.end(), {fit.P0.c1.x1, fit.P0.c1.x2});
    if (k >= 2) got.insert(got.end(), {fit.P0.c2.a11(), 2.0 * fit.P0.c2.a12(), fit.P0.c2.a22()});
    double dc = std::abs(fit.P0.c0 - f(x0));
    for (std::size_t q = 0; q < got.size(); ++q) dc = std::max(dc, std::abs(got[q] - oracle.coeffs[q]));
    const double dK = std::abs(fit.K - oracle.K);
    worst_K = std::max(worst_K, dK);
    worst_c = std::max(worst_c, dc);
    if (dK > 1e-4 || dc > 1e-4) ++failures;
  }
  r.pass = failures == 0;
  r.detail = std::to_string(failures) + "/20 mismatches; max |dK| " + fmt("%.2e", worst_K) + ", max |dcoeff| " +
             fmt("%.2e", worst_c);
  return r;
}

CriterionResult scaling_equivariance() {
  CriterionResult r{11, "scaling equivariance", true, ""};
  double worst_defect = 0.0, worst_scale = 0.0;
  for (ExperimentConfig cfg : suite_experiments()) {
    if (std::find(cfg.analyzers.begin(), cfg.analyzers.end(), "c1a") == cfg.analyzers.end())
      cfg.analyzers.push_back("c1a");
    const ExperimentResult base = execute(cfg);
    const ExperimentResult tripled = execute(cfg.scaled(3.0));
    worst_defect = std::max(worst_defect, base.rescaling_defect);
    worst_defect = std::max(worst_defect, tripled.rescaling_defect);
    for (std::size_t i = 0; i < base.u.values.size(); ++i)
      worst_scale = std::max(worst_scale, rel_err(tripled.u.values[i], 3.0 * base.u.values[i]));
    for (std::size_t k = 0; k < base.c1a->a.size(); ++k)
      worst_scale = std::max(worst_scale, rel_err(tripled.c1a->a[k], 3.0 * base.c1a->a[k]));
    if (base.c2a) {
      for (std::size_t k = 0; k < base.c2a->b1n.size(); ++k) {
        worst_scale = std::max(worst_scale, rel_err(tripled.c2a->b1n[k], 3.0 * base.c2a->b1n[k]));
        worst_scale = std::max(worst_scale, rel_err(tripled.c2a->bnn[k], 3.0 * base.c2a->bnn[k]));
      }
    }
  }
  r.pass = worst_defect <= 1e-9 && worst_scale <= 1e-9;
  r.detail = "max rescaling defect " + fmt("%.2e", worst_defect) + ", max deviation from 3x " +
             fmt("%.2e", worst_scale) + " over " + std::to_string(suite_experiments().size()) + " experiments";
  return r;
}

using Criterion = std::function<CriterionResult()>;

std::vector<std::pair<int, Criterion>> criteria() {
  return {{1, operator_algebra},   {2, scheme_exactness}, {3, comparison_principle}, {4, flat_rates},
          {5, bump_rates},         {6, isaacs_rates},     {7, slit_domain},          {8, localization},
          {9, normalization},      {10, fit_oracle},      {11, scaling_equivariance}};
}

const char* title_of(int id) {
  static const char* titles[] = {"",
                                 "operator algebra",
                                 "scheme exactness",
                                 "discrete comparison",
                                 "C1,alpha rate at a flat boundary",
                                 "C1,alpha rate at a power bump",
                                 "C2,alpha jet for the Isaacs operator",
                                 "slit domain",
                                 "localization and barrier",
                                 "normalization pipeline",
                                 "pointwise fit against brute force",
                                 "scaling equivariance"};
  return id >= 1 && id <= 11 ? titles[id] : "";
}

}  // namespace

int worker_count() {
  const char* env = std::getenv("REGULAB_THREADS");
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  if (!env || !*env) return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 0) return hw;
  return static_cast<int>(std::min<long>(v, hw));
}

std::vector<ExperimentConfig> suite_experiments() {
  return {flat_config(), bump_config(1.0 / 128.0), isaacs_config(), slit_config()};
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<std::pair<int, Criterion>> todo;
  for (auto& c : criteria()) {
    if (options.only.empty() || std::find(options.only.begin(), options.only.end(), c.first) != options.only.end())
      todo.push_back(std::move(c));
  }
  std::vector<CriterionResult> results(todo.size());
  const auto run_one = [&](std::size_t i) {
    try {
      results[i] = todo[i].second();
    } catch (const std::exception& e) {
      results[i] = {todo[i].first, title_of(todo[i].first), false, std::string("error: ") + e.what()};
    }
  };
  const int threads = options.threads >= 0 ? options.threads : worker_count();
  if (threads <= 1) {
    for (std::size_t i = 0; i < todo.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

std::string suite_report_json(const std::vector<CriterionResult>& results) {
  nlohmann::ordered_json j;
  bool all = true;
  j["criteria"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    j["criteria"].push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
  }
  j["pass"] = all;
  return j.dump(2) + "\n";
}

SelftestResult run_selftest() {
  SelftestResult out;
  const auto check = [&](bool ok, const std::string& what) {
    ++out.checks;
    if (!ok) out.failures.push_back(what);
  };
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const SymMatrix m = random_sym(rng, 3.0), n = random_sym(rng, 3.0);
    const double pp = pucci_plus(m, 1.0, 2.0), pm = pucci_minus(m, 1.0, 2.0);
    if (pm > pp + 1e-12 || std::abs(pucci_plus(-1.0 * m, 1.0, 2.0) + pm) > 1e-12 ||
        pucci_plus(m + n, 1.0, 2.0) > pp + pucci_plus(n, 1.0, 2.0) + 1e-12) {
      check(false, "Pucci identities");
      break;
    }
  }
  check(pucci_plus(SymMatrix::diag(1.0, -1.0), 1.0, 2.0) == 1.0, "M+(diag(1,-1)) = 1");
  check(pucci_minus(SymMatrix::diag(2.0, 3.0), 1.0, 2.0) == 5.0, "M-(diag(2,3)) = 5");
  for (const auto& op : operator_catalog(1.0, 2.0)) {
    check(check_uniform_ellipticity(op, 200, 1).pass, op.tag() + " ellipticity");
    check(std::abs(op(SymMatrix{})) <= 1e-12, op.tag() + " F(0) = 0");
  }
  check(std::abs(solve_recession_constant(OperatorSpec::laplace(), SymMatrix::diag(1.0, 2.0)) + 3.0) <= 1e-9,
        "laplace recession constant");

  std::vector<FitSample> lin, env;
  for (int i = -8; i <= 8; ++i) {
    const double x = i / 8.0;
    lin.push_back({{x, 0.0}, 2.0 + 3.0 * x});
    env.push_back({{x, 0.0}, std::pow(std::abs(x), 1.5)});
  }
  const FitResult a = pointwise_fit(lin, {0.0, 0.0}, 1, 0.5);
  check(a.K <= 1e-12 && std::abs(a.P0.c1.x1 - 3.0) <= 1e-9, "exact linear fit");
  const FitResult b = pointwise_fit(env, {0.0, 0.0}, 1, 0.5);
  check(std::abs(b.K - 1.0) <= 1e-9 && b.P0.norm() <= 1e-9, "Hoelder envelope fit");
  const BoundaryChart chart = classify_boundary(make_domain(DomainKind::half_ball), 1, 0.5);
  check(chart.K == 0.0, "half ball is flat");

  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 16.0, 1.0, 16);
  const auto sys = discretize(OperatorSpec::pucci_plus(1.0, 2.0), grid, 16);
  const std::vector<double> f(grid->num_nodes(), 0.0);
  const auto u = solve(sys, f, boundary_values(*grid, [](Vec2 p, int) { return 1.0 + p.x1 - 2.0 * p.x2; }));
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    err = std::max(err, std::abs(u.values[i] - (1.0 + grid->nodes[i].x1 - 2.0 * grid->nodes[i].x2)));
  check(err <= 1e-10, "affine data reproduced");
  return out;
}

}  // namespace regulab
