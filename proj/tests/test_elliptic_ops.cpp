#include <cmath>
#include <random>

#include "doctest.h"
#include "regulab/elliptic_ops.hpp"
#include "regulab/errors.hpp"

using namespace regulab;

namespace {

// Eigen-decomposition oracle: Q diag(e) Q^T from an explicit rotation.
SymMatrix rotate_diag(double e1, double e2, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * c * e1 + s * s * e2, c * s * (e1 - e2), s * s * e1 + c * c * e2};
}

}  // namespace

TEST_CASE("pucci_plus closed form") {
  CHECK(pucci_plus(SymMatrix{}, 1.0, 2.0) == 0.0);
  CHECK(pucci_plus(SymMatrix::diag(1.0, -1.0), 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  for (int i = 0; i < 50; ++i) {
    CHECK(pucci_plus(rotate_diag(1.0, -1.0, ang(rng)), 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("pucci_minus closed form") {
  CHECK(pucci_minus(SymMatrix{}, 1.0, 2.0) == 0.0);
  CHECK(pucci_minus(SymMatrix::diag(1.0, -1.0), 1.0, 2.0) == doctest::Approx(-1.0));
  CHECK(pucci_minus(SymMatrix::diag(2.0, 3.0), 1.0, 2.0) == doctest::Approx(5.0));
}

TEST_CASE("pucci identities on random matrices") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-4.0, 4.0), t(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const SymMatrix m(u(rng), u(rng), u(rng)), n(u(rng), u(rng), u(rng));
    const double s = t(rng);
    CHECK(pucci_minus(m, 1.0, 2.0) <= pucci_plus(m, 1.0, 2.0) + 1e-12);
    CHECK(std::abs(pucci_plus(-m, 1.0, 2.0) + pucci_minus(m, 1.0, 2.0)) <= 1e-12);
    CHECK(std::abs(pucci_plus(s * m, 1.0, 2.0) - s * pucci_plus(m, 1.0, 2.0)) <= 1e-12);
    CHECK(pucci_plus(m + n, 1.0, 2.0) <= pucci_plus(m, 1.0, 2.0) + pucci_plus(n, 1.0, 2.0) + 1e-12);
    CHECK(pucci_minus(m + n, 1.0, 2.0) >= pucci_minus(m, 1.0, 2.0) + pucci_minus(n, 1.0, 2.0) - 1e-12);
    CHECK(std::abs(pucci_plus(m, 1.5, 1.5) - 1.5 * m.trace()) <= 1e-12);
  }
}

TEST_CASE("invalid constants and entries are rejected") {
  CHECK_THROWS_AS(pucci_plus(SymMatrix{}, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(pucci_plus(SymMatrix{}, 2.0, 1.0), InputError);
  CHECK_THROWS_AS(pucci_minus(SymMatrix(NAN, 0.0, 0.0), 1.0, 2.0), InputError);
  CHECK_THROWS_AS(make_operator("monge_ampere", 1.0, 2.0), ConfigError);
}

TEST_CASE("eval_operator on the catalog") {
  CHECK(eval_operator(OperatorSpec::laplace(), SymMatrix::diag(2.0, 3.0)) == 5.0);
  CHECK(eval_operator(OperatorSpec::pucci_plus(1.0, 2.0), SymMatrix::diag(1.0, -1.0)) == doctest::Approx(1.0));

  // min over j of trace((A_j + 0) / 2 M), evaluated by hand.
  const auto op = OperatorSpec::isaacs({SymMatrix::identity(), SymMatrix::diag(1.0, 2.0)}, {SymMatrix{}}, 0.5, 1.0);
  const SymMatrix m = SymMatrix::diag(1.0, -1.0);
  const double direct = std::min(0.5 * (1.0 - 1.0), 0.5 * (1.0 - 2.0));
  CHECK(eval_operator(op, m) == doctest::Approx(direct));
  CHECK(direct == -0.5);

  CHECK_THROWS_AS(OperatorSpec::isaacs({SymMatrix::identity()}, {SymMatrix{}}, 1.0, 2.0), ConfigError);
}

TEST_CASE("isaacs catalog instance is neither convex nor concave") {
  const auto op = OperatorSpec::isaacs(1.0, 2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  bool convex_broken = false, concave_broken = false;
  for (int i = 0; i < 4000 && !(convex_broken && concave_broken); ++i) {
    const SymMatrix m(u(rng), u(rng), u(rng)), n(u(rng), u(rng), u(rng));
    const double mid = op(0.5 * (m + n)), avg = 0.5 * (op(m) + op(n));
    if (mid > avg + 1e-9) convex_broken = true;
    if (mid < avg - 1e-9) concave_broken = true;
  }
  CHECK(convex_broken);
  CHECK(concave_broken);
}

TEST_CASE("check_uniform_ellipticity") {
  CHECK(check_uniform_ellipticity(OperatorSpec::laplace(), 1000, 1).pass);
  CHECK(check_uniform_ellipticity(OperatorSpec::pucci_plus(1.0, 2.0), 1000, 1).pass);
  for (const auto& op : operator_catalog(1.0, 2.0)) CHECK(check_uniform_ellipticity(op, 1000, 2).pass);
  const auto cubic = [](const SymMatrix& m) { return std::pow(m.trace(), 3); };
  CHECK_FALSE(check_uniform_ellipticity(cubic, 1.0, 1.0, 1000, 3).pass);
}

TEST_CASE("solve_recession_constant") {
  CHECK(solve_recession_constant(OperatorSpec::laplace(), SymMatrix(1.0, 0.4, 2.0)) == doctest::Approx(-3.0));
  CHECK(solve_recession_constant(OperatorSpec::pucci_plus(1.0, 2.0), SymMatrix{}) == 0.0);

  // Fine-grid scan oracle for t -> F(B + t delta_nn), refined around the sign change.
  const auto op = OperatorSpec::isaacs(1.0, 2.0);
  const SymMatrix b = SymMatrix::diag(1.0, -1.0);
  const auto g = [&](double t) { return op(b + t * SymMatrix::delta_nn()); };
  double lo = -10.0, step = 1e-3;
  for (int pass = 0; pass < 4; ++pass) {
    while (g(lo + step) < 0.0) lo += step;
    step *= 1e-3;
  }
  CHECK(std::abs(solve_recession_constant(op, b, 1e-13) - lo) <= 1e-8);
}

TEST_CASE("translated and shifted operators") {
  const auto base = OperatorSpec::pucci_minus(1.0, 3.0);
  const SymMatrix b(0.2, -0.3, 0.7);
  const auto tr = OperatorSpec::translated(base, b, 0.25);
  const auto sh = OperatorSpec::shifted(base, b, 2.0);
  const SymMatrix m(1.0, 0.5, -2.0);
  CHECK(tr(m) == doctest::Approx(base(m + b) - 0.25));
  CHECK(sh(m) == doctest::Approx((base(2.0 * m + b) - base(b)) / 2.0));
  CHECK(sh(SymMatrix{}) == 0.0);
  CHECK(tr.lambda() == 1.0);
  CHECK(tr.Lambda() == 3.0);
  CHECK(check_uniform_ellipticity(tr, 500, 8).pass);
}
