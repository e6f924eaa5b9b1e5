#include <cmath>
#include <random>

#include "doctest.h"
#include "regulab/errors.hpp"
#include "regulab/grid.hpp"
#include "regulab/scheme.hpp"
#include "regulab/solver.hpp"

using namespace regulab;

namespace {

double max_nodal_error(const GridFunction& u, const PlaneFunction& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) e = std::max(e, std::abs(u.values[i] - exact(u.grid->nodes[i])));
  return e;
}

BoundaryFunction on_feet(const PlaneFunction& fn) {
  return [fn](Vec2 p, int) { return fn(p); };
}

}  // namespace

TEST_CASE("stencil lines come in orthogonal pairs") {
  for (int n : {4, 8, 16}) {
    const auto lines = stencil_lines(n);
    REQUIRE(lines.size() == static_cast<std::size_t>(n / 2));
    for (std::size_t l = 0; l < lines.size(); l += 2) CHECK(lines[l].dot(lines[l + 1]) == 0.0);
  }
  CHECK_THROWS(stencil_lines(6));
}

TEST_CASE("build_grid geometry") {
  SUBCASE("flat feet lie on x2 = 0") {
    const auto g = build_grid(make_domain(DomainKind::half_ball), 1.0 / 64.0, 1.0, 16);
    int flat = 0;
    for (const Arm& a : g->arms) {
      if (a.cut() && a.piece == 0) {
        CHECK(a.foot.x2 == 0.0);
        ++flat;
      }
    }
    CHECK(flat > 0);
    CHECK(g->boundary_adjacent_count() > 0);
  }
  SUBCASE("slit is cut from both sides") {
    const auto g = build_grid(make_domain(DomainKind::slit_ball), 1.0 / 128.0, 0.5, 4);
    int above = 0, below = 0;
    for (std::size_t i = 0; i < g->num_nodes(); ++i) {
      const Vec2 x = g->nodes[i];
      if (std::abs(x.x1) > 0.3) continue;
      const Arm& down = g->arm(i, 1, 1);
      const Arm& up = g->arm(i, 1, 0);
      if (down.cut() && down.piece == 0 && x.x2 > 0.5 * x.x1 * x.x1) ++above;
      if (up.cut() && up.piece == 0 && x.x2 < 0.5 * x.x1 * x.x1) ++below;
    }
    CHECK(above > 50);
    CHECK(below > 50);
  }
  SUBCASE("coarse grid without interior nodes is rejected") {
    CHECK_THROWS_AS(build_grid(make_domain(DomainKind::graph_bump, {0.3, 1.5}), 0.25, 0.25, 16), ConfigError);
  }
}

TEST_CASE("laplace with 4 directions is the 5-point scheme away from cuts") {
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 32.0, 1.0, 4);
  const auto sys = discretize(OperatorSpec::laplace(), grid, 4);
  const auto fn = [](Vec2 x) { return std::sin(3.0 * x.x1) * std::exp(x.x2); };
  GridFunction u = sample(grid, fn);
  const auto lu = apply_operator(sys, u);
  const double h = grid->h;
  int checked = 0;
  for (std::size_t i = 0; i < grid->num_nodes(); ++i) {
    if (grid->boundary_adjacent(i)) continue;
    const Vec2 x = grid->nodes[i];
    const double five = (fn({x.x1 + h, x.x2}) + fn({x.x1 - h, x.x2}) + fn({x.x1, x.x2 + h}) + fn({x.x1, x.x2 - h}) -
                         4.0 * fn(x)) /
                        (h * h);
    CHECK(lu[i] == doctest::Approx(five).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("pucci_plus on x1^2 at interior nodes") {
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 16.0, 1.0, 16);
  const auto sys = discretize(OperatorSpec::pucci_plus(1.0, 2.0), grid, 16);
  const auto lu = apply_operator(sys, sample(grid, [](Vec2 x) { return x.x1 * x.x1; }));
  for (std::size_t i = 0; i < grid->num_nodes(); ++i) CHECK(lu[i] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("Shortley-Weller arms of length h and 0.4h") {
  const double h = 1.0 / 64.0;
  const auto grid = build_grid(Domain::shifted_half_ball(0.4 * h), h, 1.0, 4);
  const auto sys = discretize(OperatorSpec::laplace(), grid, 4);
  const auto lu = apply_operator(sys, sample(grid, [](Vec2 x) { return x.x2 * x.x2; }));
  int short_arms = 0;
  for (std::size_t i = 0; i < grid->num_nodes(); ++i) {
    const Arm& down = grid->arm(i, 1, 1);
    if (down.cut() && std::abs(down.length - 0.4 * h) <= 1e-12) ++short_arms;
    CHECK(lu[i] == doctest::Approx(2.0).epsilon(1e-9));
  }
  CHECK(short_arms > 10);
}

TEST_CASE("solve reproduces exact solutions") {
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 32.0, 1.0, 16);
  const std::vector<double> zero(grid->num_nodes(), 0.0);
  SUBCASE("affine") {
    const auto sys = discretize(OperatorSpec::laplace(), grid, 4);
    const auto fn = [](Vec2 x) { return x.x2; };
    SolveInfo info;
    const auto u = solve(sys, zero, boundary_values(*grid, on_feet(fn)), {}, &info);
    CHECK(info.residual <= 1e-10);
    CHECK(max_nodal_error(u, fn) <= 1e-9);
  }
  SUBCASE("harmonic quadratic") {
    const auto sys = discretize(OperatorSpec::laplace(), grid, 4);
    const auto fn = [](Vec2 x) { return x.x1 * x.x1 - x.x2 * x.x2; };
    CHECK(max_nodal_error(solve(sys, zero, boundary_values(*grid, on_feet(fn))), fn) <= 1e-8);
  }
  SUBCASE("manufactured pucci_plus") {
    const auto sys = discretize(OperatorSpec::pucci_plus(1.0, 2.0), grid, 16);
    const auto fn = [](Vec2 x) { return x.x2 * x.x2; };
    const std::vector<double> four(grid->num_nodes(), 4.0);
    CHECK(max_nodal_error(solve(sys, four, boundary_values(*grid, on_feet(fn))), fn) <= 1e-6);
  }
  SUBCASE("affine data for every catalog operator") {
    const auto fn = [](Vec2 x) { return 0.5 - x.x1 + 0.25 * x.x2; };
    for (const auto& op : operator_catalog(1.0, 3.0)) {
      const auto sys = discretize(op, grid, 16);
      CHECK(max_nodal_error(solve(sys, zero, boundary_values(*grid, on_feet(fn))), fn) <= 1e-10);
    }
  }
}

TEST_CASE("comparison_check") {
  const auto grid = build_grid(make_domain(DomainKind::graph_bump, {0.3, 1.5}), 1.0 / 16.0, 1.0, 16);
  const auto sys = discretize(OperatorSpec::laplace(), grid, 16);
  const std::vector<double> zero(grid->num_nodes(), 0.0);
  const auto g = [](Vec2 x) { return std::cos(2.0 * x.x1) + x.x2; };
  const auto u = solve(sys, zero, boundary_values(*grid, on_feet(g)));
  CHECK(comparison_check(sys, u, u).holds);
  CHECK(comparison_check(sys, u, u).premise);

  // v = u + (R^2 - |x|^2) / 4 lowers F_h by exactly 1 and raises the data.
  // R slightly above 1 absorbs feet that land on the truncation circle with roundoff.
  GridFunction v = u;
  const auto bump = [](Vec2 x) { return 0.25 * (1.0 + 1e-12 - x.dot(x)); };
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] += bump(grid->nodes[i]);
  for (std::size_t s = 0; s < v.boundary.size(); ++s)
    if (!std::isnan(v.boundary[s])) v.boundary[s] += bump(grid->arms[s].foot);
  const auto fv = apply_operator(sys, v);
  const auto fu = apply_operator(sys, u);
  for (std::size_t i = 0; i < fv.size(); ++i) CHECK(fv[i] == doctest::Approx(fu[i] - 1.0).epsilon(1e-9));
  const ComparisonReport rep = comparison_check(sys, u, v);
  CHECK(rep.premise);
  CHECK(rep.holds);
  CHECK(rep.max_difference < 0.0);
}

TEST_CASE("randomized comparison instances") {
  const auto grid = build_grid(make_domain(DomainKind::half_ball), 1.0 / 16.0, 1.0, 16);
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(trial);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto sys = discretize(operator_catalog(1.0, 2.0)[trial % 4], grid, 16);
    std::vector<double> fv(grid->num_nodes()), fu(grid->num_nodes());
    for (std::size_t i = 0; i < fv.size(); ++i) {
      fv[i] = 2.0 * u01(rng) - 1.0;
      fu[i] = fv[i] + u01(rng);
    }
    const double gap = u01(rng);
    const auto v = solve(sys, fv, boundary_values(*grid, [](Vec2 p, int) { return p.x1; }));
    const auto w = solve(sys, fu, boundary_values(*grid, [gap](Vec2 p, int) { return p.x1 - gap; }));
    const ComparisonReport rep = comparison_check(sys, w, v);
    CHECK(rep.premise);
    CHECK(rep.holds);
  }
}

TEST_CASE("barrier") {
  const double delta = 1.0 / 8.0;
  const GridFunction v = solve_barrier(delta, delta / 4.0);
  for (std::size_t s = 0; s < v.boundary.size(); ++s) {
    const Arm& a = v.grid->arms[s];
    if (a.cut() && a.piece == 0) CHECK(v.boundary[s] == 0.0);
  }
  for (double x : v.values) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK_THROWS_AS(solve_barrier(0.3, 0.01), InputError);
}
