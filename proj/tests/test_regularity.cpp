#include <cmath>

#include "doctest.h"
#include "regulab/errors.hpp"
#include "regulab/pointwise.hpp"
#include "regulab/regularity.hpp"
#include "regulab/solver.hpp"

using namespace regulab;

namespace {

GridFunction solve_laplace(const Domain& dom, double h, const BoundaryFunction& g, int n_dirs = 4) {
  const auto grid = build_grid(dom, h, 1.0, n_dirs);
  const auto sys = discretize(OperatorSpec::laplace(), grid, n_dirs);
  const std::vector<double> zero(grid->num_nodes(), 0.0);
  return solve(sys, zero, boundary_values(*grid, g));
}

GridFunction bump_solution(double h) {
  return solve_laplace(make_domain(DomainKind::graph_bump, {0.3, 1.5}), h,
                       [](Vec2 p, int piece) { return piece < 0 ? p.x2 : 0.0; });
}

}  // namespace

TEST_CASE("IterationConfig consistency") {
  IterationConfig cfg;
  CHECK_NOTHROW(cfg.validate(1.0 / 64.0));
  const auto s = cfg.scales(1.0 / 64.0);
  CHECK(s.front() == 1.0);
  CHECK(s.back() >= 4.0 / 64.0);
  cfg.k_max = 8;
  CHECK_THROWS_AS(cfg.validate(1.0 / 64.0), ConfigError);
  cfg.k_max = 0;
  cfg.r_floor = 1.0 / 64.0;
  CHECK_THROWS_AS(cfg.validate(1.0 / 64.0), ConfigError);
}

TEST_CASE("campanato_c1a on exact and closed-form data") {
  const Domain half = make_domain(DomainKind::half_ball);
  const auto grid = build_grid(half, 1.0 / 64.0, 1.0, 4);
  IterationConfig cfg;

  const C1aResult lin = campanato_c1a(sample(grid, [](Vec2 x) { return x.x2; }), half, cfg);
  for (double a : lin.a) CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
  for (double r : lin.trace.residuals) CHECK(r <= 1e-12);
  CHECK(lin.Du0.x1 == 0.0);
  CHECK(lin.Du0.x2 == doctest::Approx(1.0));

  const C1aResult pw = campanato_c1a(sample(grid, [](Vec2 x) { return x.x2 + std::pow(x.x2, 1.6); }), half, cfg);
  for (std::size_t k = 0; k < pw.trace.size(); ++k)
    CHECK(pw.trace.residuals[k] <= std::pow(pw.trace.scales[k], 1.6) + 1e-12);
  CHECK(std::abs(pw.a.back() - 1.0) <= std::pow(pw.trace.scales.back(), 0.6));
  CHECK(rate_fit(pw.trace.scales, pw.trace.residuals).slope >= 1.5);
}

TEST_CASE("coefficient trace on the power bump is Cauchy") {
  const auto u = bump_solution(1.0 / 64.0);
  IterationConfig cfg;
  const C1aResult fit = campanato_c1a(u, make_domain(DomainKind::graph_bump, {0.3, 1.5}), cfg);
  REQUIRE(fit.a.size() >= 4);
  // One constant fitted on the coarse half must also bound the fine half.
  const std::size_t mid = fit.a.size() / 2;
  double c_hat = 0.0;
  for (std::size_t k = 1; k <= mid; ++k)
    c_hat = std::max(c_hat, std::abs(fit.a[k] - fit.a[k - 1]) / std::pow(cfg.eta, 0.5 * k));
  for (std::size_t k = mid + 1; k < fit.a.size(); ++k)
    CHECK(std::abs(fit.a[k] - fit.a[k - 1]) <= 2.0 * c_hat * std::pow(cfg.eta, 0.5 * k));
}

TEST_CASE("rescaling identity") {
  const auto u = bump_solution(1.0 / 64.0);
  IterationConfig cfg;
  const C1aResult fit = campanato_c1a(u, make_domain(DomainKind::graph_bump, {0.3, 1.5}), cfg);
  CHECK(rescaling_defect(u, fit, cfg) <= 1e-9);
}

TEST_CASE("campanato_c2a") {
  const Domain half = make_domain(DomainKind::half_ball);
  const auto grid = build_grid(half, 1.0 / 64.0, 1.0, 4);
  IterationConfig cfg;
  cfg.alpha = 0.25;

  const C2aResult xy = campanato_c2a(sample(grid, [](Vec2 x) { return x.x1 * x.x2; }), half,
                                     OperatorSpec::laplace(), cfg);
  for (std::size_t k = 0; k < xy.b1n.size(); ++k) {
    CHECK(xy.b1n[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(xy.bnn[k]) <= 1e-12);
    CHECK(xy.trace.constraint_residuals[k] <= 1e-12);
    CHECK(xy.trace.residuals[k] <= 1e-12);
  }
  CHECK_FALSE(xy.precondition_violated);

  const C2aResult bad = campanato_c2a(sample(grid, [](Vec2 x) { return x.x2; }), half, OperatorSpec::laplace(), cfg);
  CHECK(bad.precondition_violated);
}

TEST_CASE("campanato_c2a for the isaacs operator") {
  // Manufactured: u = 3 x1 x2 + bnn x2^2 with F(D^2 u) = 0 exactly.
  const auto op = OperatorSpec::isaacs(1.0, 2.0);
  const double bnn = 0.5 * solve_recession_constant(op, SymMatrix(0.0, 3.0, 0.0), 1e-13);
  const Domain half = make_domain(DomainKind::half_ball);
  const auto grid = build_grid(half, 1.0 / 32.0, 1.0, 16);
  const auto sys = discretize(op, grid, 16);
  const auto fn = [bnn](Vec2 x) { return 3.0 * x.x1 * x.x2 + bnn * x.x2 * x.x2; };
  const std::vector<double> zero(grid->num_nodes(), 0.0);
  const auto u = solve(sys, zero, boundary_values(*grid, [&](Vec2 p, int) { return fn(p); }));
  IterationConfig cfg;
  cfg.alpha = 0.25;
  const C2aResult fit = campanato_c2a(u, half, op, cfg);
  for (std::size_t k = 0; k < fit.b1n.size(); ++k) {
    CHECK(std::abs(fit.b1n[k] - 3.0) <= 1e-2);
    CHECK(fit.trace.constraint_residuals[k] <= 1e-8);
  }
}

TEST_CASE("normalize_problem") {
  const Domain half = make_domain(DomainKind::half_ball);
  const auto grid = build_grid(half, 1.0 / 32.0, 1.0, 4);
  const BoundaryChart flat = classify_boundary(half, 2, 0.5);
  const auto u = sample(grid, [](Vec2 x) { return x.x1 * x.x2 + x.x2 * x.x2 * x.x2; });
  const auto op = OperatorSpec::pucci_plus(1.0, 2.0);

  SUBCASE("zero data is the identity") {
    const NormalizedProblem np = normalize_problem(u, PolyJet{}, 0.0, op, flat, 0.0);
    CHECK(np.t == 0.0);
    CHECK(np.u3.values == u.values);
    const SymMatrix m(0.3, -1.2, 0.8);
    CHECK(np.op4(m) == doctest::Approx(op(m)));
  }
  SUBCASE("trace operator with D^2 g = I") {
    PolyJet g;
    g.c2 = SymMatrix(0.5, 0.0, 0.5);
    const NormalizedProblem np = normalize_problem(u, g, 0.0, OperatorSpec::laplace(), flat, 0.0);
    CHECK(np.F3_at_zero == doctest::Approx(2.0));
    CHECK(np.t == doctest::Approx(1.0));
    CHECK(std::abs(np.op4(SymMatrix{})) <= 1e-10);
  }
}

TEST_CASE("localization_experiment") {
  const auto op = OperatorSpec::laplace();
  LocalizationData zero;
  CHECK(localization_experiment(op, make_domain(DomainKind::half_ball), 0.125, 1.0 / 32.0, zero)
            .sup_u_on_Omega_delta == 0.0);

  double prev_sup = 1e300, first_ratio = 0.0;
  for (double delta : {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}) {
    const Domain dom = make_domain(DomainKind::graph_bump, {0.5 * delta, 1.5});
    const auto rep = localization_experiment(op, dom, delta, delta / 4.0, LocalizationData::standard(delta));
    CHECK(rep.osc <= delta);
    CHECK(rep.sup_u_on_Omega_delta <= prev_sup);
    if (first_ratio == 0.0) first_ratio = rep.fitted_C;
    CHECK(rep.fitted_C <= 1.5 * first_ratio);
    CHECK(rep.fitted_C >= first_ratio / 1.5);
    prev_sup = rep.sup_u_on_Omega_delta;
  }
}

TEST_CASE("modulus_probe") {
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 64.0, 1.0, 4);
  CHECK(modulus_probe(sample(grid, [](Vec2) { return 2.0; }), {0.0, 0.5}, 0.25, 0.1) == 0.0);
  const double s = 0.1;
  const double m = modulus_probe(sample(grid, [](Vec2 x) { return x.x2; }), {0.0, 0.5}, 0.25, s);
  CHECK(m <= s + 1e-12);
  CHECK(m >= s - grid->h);

  const auto u = bump_solution(1.0 / 64.0);
  double prev = 1e300;
  for (double sep : {0.2, 0.1, 0.05, 0.025}) {
    const double v = modulus_probe(u, {0.0, 0.0}, 0.5, sep);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("viscosity_membership") {
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 32.0, 1.0, 16);
  const std::vector<double> zero(grid->num_nodes(), 0.0);
  const auto lin = viscosity_membership(sample(grid, [](Vec2 x) { return x.x2; }), zero, 1.0, 2.0, 1e-9);
  CHECK(lin.sub);
  CHECK(lin.super);
  const auto quad = viscosity_membership(sample(grid, [](Vec2 x) { return x.dot(x); }), zero, 1.0, 2.0, 1e-9);
  CHECK(quad.sub);
  CHECK_FALSE(quad.super);

  const auto sys = discretize(OperatorSpec::pucci_plus(1.0, 2.0), grid, 16);
  std::vector<double> f(grid->num_nodes());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(4.0 * grid->nodes[i].x1);
  const auto u = solve(sys, f, boundary_values(*grid, [](Vec2 p, int) { return p.x1 * p.x1; }));
  const auto rep = viscosity_membership(u, f, 1.0, 2.0, 10.0 * SolveOptions{}.tol);
  CHECK(rep.sub);
  CHECK(rep.super);
}

TEST_CASE("rate_fit") {
  std::vector<double> r, sq, p15, wiggle;
  for (int k = 0; k < 8; ++k) {
    const double s = std::pow(0.5, k);
    r.push_back(s);
    sq.push_back(s * s);
    p15.push_back(3.0 * std::pow(s, 1.5));
    wiggle.push_back(3.0 * std::pow(s, 1.5) * (1.0 + 0.1 * std::sin(7.0 * std::log(s))));
  }
  CHECK(std::abs(rate_fit(r, sq).slope - 2.0) <= 1e-9);
  const RateReport p = rate_fit(r, p15);
  CHECK(std::abs(p.slope - 1.5) <= 1e-9);
  CHECK(std::abs(p.fitted_C - 3.0) <= 1e-9);
  CHECK(std::abs(rate_fit(r, wiggle).slope - 1.5) <= 0.05);

  const std::vector<double> zeros(r.size(), 0.0);
  const RateReport ex = rate_fit(r, zeros);
  CHECK(ex.exact);
  CHECK(std::isinf(ex.slope));
  CHECK_THROWS_AS(rate_fit(std::vector<double>{1.0, 0.5}, std::vector<double>{1.0, 0.5}), InputError);
}

TEST_CASE("line_minimax") {
  // min_a max_i |v_i - a y_i| with v = 2 y except one outlier.
  const std::vector<double> y{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> v{0.2, 0.4, 0.6, 1.0};
  const LineMinimax m = line_minimax(v, y);
  double brute = 1e300;
  for (int i = 0; i <= 400000; ++i) {
    const double a = 2.0 + i * 1e-6;
    double worst = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) worst = std::max(worst, std::abs(v[j] - a * y[j]));
    brute = std::min(brute, worst);
  }
  CHECK(std::abs(m.value - brute) <= 1e-6);
}
