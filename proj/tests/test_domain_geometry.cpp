#include <cmath>
#include <random>

#include "doctest.h"
#include "regulab/domain.hpp"
#include "regulab/errors.hpp"
#include "regulab/pointwise.hpp"

using namespace regulab;

TEST_CASE("make_domain membership") {
  const Domain half = make_domain(DomainKind::half_ball);
  CHECK(half.inside({0.0, 0.5}));
  CHECK_FALSE(half.inside({0.3, 0.0}));
  CHECK_FALSE(half.inside({0.3, -0.1}));

  const Domain bump = make_domain(DomainKind::graph_bump, {0.3, 1.5});
  CHECK(bump.inside({0.0, 0.5}));
  const double phi = 0.3 * std::pow(0.5, 1.5);
  CHECK(bump.inside({0.5, 0.0}) == (0.0 > phi));
  CHECK(bump.inside({0.5, phi + 1e-6}));
  CHECK(bump.inside({-0.5, -phi + 1e-6}));

  const Domain slit = make_domain(DomainKind::slit_ball);
  CHECK(slit.inside({0.0, 1e-3}));
  CHECK(slit.inside({0.0, -1e-3}));
  CHECK_FALSE(slit.inside({0.3, 0.3 * 0.3 / 2.0}));

  CHECK_THROWS_AS(make_domain(DomainKind::graph_bump, {0.3}), ConfigError);
  CHECK_THROWS_AS(make_domain(DomainKind::half_ball, {1.0}), ConfigError);
  CHECK_THROWS_AS(domain_kind_from_string("annulus"), ConfigError);
}

TEST_CASE("half ball boundary contains the flat piece") {
  const auto pts = make_domain(DomainKind::half_ball).sample_boundary(1.0);
  double max_x2 = 0.0, min_x1 = 0.0, max_x1 = 0.0;
  for (auto p : pts) {
    max_x2 = std::max(max_x2, std::abs(p.x2));
    min_x1 = std::min(min_x1, p.x1);
    max_x1 = std::max(max_x1, p.x1);
  }
  CHECK(max_x2 == 0.0);
  CHECK(min_x1 < -0.999);
  CHECK(max_x1 > 0.999);
}

TEST_CASE("osc_boundary") {
  CHECK(osc_boundary(make_domain(DomainKind::half_ball), 0.5) == 0.0);

  // Dense-sampling oracle over x1 with x1^2 + phi(x1)^2 < r^2.
  const auto dense = [](auto phi, double r) {
    double lo = 1e300, hi = -1e300;
    for (int i = -200000; i <= 200000; ++i) {
      const double x = r * i / 200000.0, y = phi(x);
      if (x * x + y * y >= r * r) continue;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    return hi - lo;
  };
  const auto bump = [](double x) { return (x < 0 ? -0.3 : 0.3) * std::pow(std::abs(x), 1.5); };
  CHECK(std::abs(osc_boundary(make_domain(DomainKind::graph_bump, {0.3, 1.5}), 0.5) - dense(bump, 0.5)) <= 1e-5);
  const auto parabola = [](double x) { return 0.5 * x * x; };
  CHECK(std::abs(osc_boundary(make_domain(DomainKind::slit_ball), 0.25) - dense(parabola, 0.25)) <= 1e-5);
}

TEST_CASE("pointwise_fit exact cases") {
  std::vector<FitSample> lin, env;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) {
      const Vec2 x{i / 10.0, j / 10.0};
      lin.push_back({x, 2.0 + 3.0 * x.x1});
    }
  for (int i = -100; i <= 100; ++i) env.push_back({{i / 100.0, 0.0}, std::pow(std::abs(i / 100.0), 1.5)});

  const FitResult a = pointwise_fit(lin, {0.0, 0.0}, 1, 0.5);
  CHECK(a.P0.c0 == doctest::Approx(2.0));
  CHECK(a.P0.c1.x1 == doctest::Approx(3.0));
  CHECK(std::abs(a.P0.c1.x2) <= 1e-12);
  CHECK(a.K <= 1e-12);

  const FitResult b = pointwise_fit(env, {0.0, 0.0}, 1, 0.5);
  CHECK(b.P0.norm() <= 1e-12);
  CHECK(b.K == doctest::Approx(1.0));

  CHECK_THROWS_AS(pointwise_fit(env, {0.0, 0.0}, 3, 0.5), InputError);
  CHECK_THROWS_AS(pointwise_fit(env, {0.0, 0.0}, 1, 1.5), InputError);
}

TEST_CASE("pointwise_fit matches a coefficient-grid oracle") {
  // k = 2 in one variable: P = c0 + c1 x + c2 x^2 with c0 pinned by the sample at x0.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const double q[4] = {u(rng), u(rng), u(rng), u(rng)};
    const auto f = [&](double x) { return q[0] + q[1] * x + q[2] * x * x + q[3] * x * x * x; };
    std::vector<FitSample> s{{{0.0, 0.0}, f(0.0)}};
    for (int i = 1; i <= 8; ++i) {
      const double x = (i % 2 ? 1.0 : -1.0) * (0.1 + 0.9 * i / 8.0);
      s.push_back({{x, 0.0}, f(x)});
    }
    // Only x1 varies, so the x2 monomials are unconstrained and fixed at 0
    // by the norm tie-break; the grid runs over (c1, c11).
    const auto K_of = [&](double c1, double c11) {
      double k = 0.0;
      for (std::size_t i = 1; i < s.size(); ++i) {
        const double x = s[i].point.x1;
        k = std::max(k, std::abs(s[i].value - f(0.0) - c1 * x - c11 * x * x) / std::pow(std::abs(x), 2.5));
      }
      return k;
    };
    double c1 = 0.0, c11 = 0.0, half = 8.0;
    for (int level = 0; level < 80; ++level) {
      double bc1 = c1, bc11 = c11, bk = K_of(c1, c11);
      for (int a = -20; a <= 20; ++a)
        for (int b = -20; b <= 20; ++b) {
          const double t1 = c1 + half * a / 20.0, t2 = c11 + half * b / 20.0, k = K_of(t1, t2);
          if (k < bk) bk = k, bc1 = t1, bc11 = t2;
        }
      c1 = bc1, c11 = bc11, half *= 0.7;
    }
    const FitResult fit = pointwise_fit(s, {0.0, 0.0}, 2, 0.5);
    CHECK(std::abs(fit.K - K_of(c1, c11)) <= 1e-4);
    CHECK(std::abs(fit.P0.c1.x1 - c1) <= 1e-4);
    CHECK(std::abs(fit.P0.c2.a11() - c11) <= 1e-4);
    CHECK(fit.P0.c0 == doctest::Approx(f(0.0)));
  }
}

TEST_CASE("classify_boundary") {
  const BoundaryChart flat = classify_boundary(make_domain(DomainKind::half_ball), 1, 0.5);
  CHECK(flat.P.norm() == 0.0);
  CHECK(flat.K == 0.0);

  const BoundaryChart slit = classify_boundary(make_domain(DomainKind::slit_ball), 2, 0.5);
  CHECK(std::abs(slit.P.c2.a11() - 0.5) <= 1e-6);
  CHECK(slit.K <= 1e-6);
  CHECK(slit.is_ck_alpha);

  const BoundaryChart bump = classify_boundary(make_domain(DomainKind::graph_bump, {0.3, 1.5}), 1, 0.5);
  CHECK(bump.P.norm() <= 1e-12);
  CHECK(std::abs(bump.K - 0.3) <= 1e-3);

  // A cusp is not C^{1,1/2}: K grows with the sample density.
  const BoundaryChart cusp = classify_boundary(make_domain(DomainKind::graph_bump, {0.3, 1.2}), 1, 0.5);
  CHECK(cusp.K > 1.0);
}

TEST_CASE("classify_boundary is monotone in the sample set") {
  std::vector<Vec2> pts;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    pts.push_back({x, 0.4 * x * x + 0.1 * std::sin(9.0 * x) * x * x * std::abs(x)});
    const double K = classify_boundary_points(pts, 2, 0.5).K;
    CHECK(K >= prev - 1e-12);
    prev = K;
  }
}
