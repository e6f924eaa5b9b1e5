#include "regulab/elliptic_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "regulab/errors.hpp"

namespace regulab {
namespace {

void check_constants(double lambda, double Lambda) {
  if (!(lambda > 0.0) || !(Lambda >= lambda) || !std::isfinite(Lambda)) {
    throw InputError("ellipticity constants must satisfy 0 < lambda <= Lambda");
  }
}

void check_finite(const SymMatrix& m) {
  if (!m.finite()) throw InputError("matrix has non-finite entries");
}

double isaacs_value(const std::vector<std::vector<SymMatrix>>& coeffs, const SymMatrix& m) {
  double outer = std::numeric_limits<double>::infinity();
  for (const auto& row : coeffs) {
    double inner = -std::numeric_limits<double>::infinity();
    for (const auto& c : row) inner = std::max(inner, c.frobenius_dot(m));
    outer = std::min(outer, inner);
  }
  return outer;
}

}  // namespace

double pucci_plus(const SymMatrix& m, double lambda, double Lambda) {
  check_constants(lambda, Lambda);
  check_finite(m);
  double v = 0.0;
  for (double e : m.eigenvalues()) v += e > 0.0 ? Lambda * e : lambda * e;
  return v;
}

double pucci_minus(const SymMatrix& m, double lambda, double Lambda) {
  check_constants(lambda, Lambda);
  check_finite(m);
  double v = 0.0;
  for (double e : m.eigenvalues()) v += e > 0.0 ? lambda * e : Lambda * e;
  return v;
}

OperatorSpec OperatorSpec::laplace() {
  OperatorSpec op;
  op.kind_ = OperatorKind::laplace;
  return op;
}

OperatorSpec OperatorSpec::pucci_plus(double lambda, double Lambda) {
  check_constants(lambda, Lambda);
  OperatorSpec op;
  op.kind_ = OperatorKind::pucci_plus;
  op.lambda_ = lambda;
  op.Lambda_ = Lambda;
  return op;
}

OperatorSpec OperatorSpec::pucci_minus(double lambda, double Lambda) {
  OperatorSpec op = pucci_plus(lambda, Lambda);
  op.kind_ = OperatorKind::pucci_minus;
  return op;
}

OperatorSpec OperatorSpec::isaacs(double lambda, double Lambda) {
  check_constants(lambda, Lambda);
  const double mid = 0.5 * (lambda + Lambda);
  const double half = 0.5 * (Lambda - lambda);
  // Each family member has spectrum in [lambda, Lambda], so every average does too.
  const std::vector<SymMatrix> a{SymMatrix::diag(lambda, Lambda), SymMatrix(mid, -half, mid)};
  const std::vector<SymMatrix> b{SymMatrix::diag(Lambda, lambda), SymMatrix(mid, 0.8 * half, mid)};
  return isaacs(a, b, lambda, Lambda);
}

OperatorSpec OperatorSpec::isaacs(const std::vector<SymMatrix>& a_family, const std::vector<SymMatrix>& b_family,
                                  double lambda, double Lambda) {
  check_constants(lambda, Lambda);
  if (a_family.empty() || b_family.empty()) throw ConfigError("isaacs families must be non-empty");
  OperatorSpec op;
  op.kind_ = OperatorKind::isaacs_minmax;
  op.lambda_ = lambda;
  op.Lambda_ = Lambda;
  const double slack = 1e-12 * Lambda;
  for (const auto& aj : a_family) {
    std::vector<SymMatrix> row;
    for (const auto& bk : b_family) {
      const SymMatrix c = 0.5 * (aj + bk);
      check_finite(c);
      const auto ev = c.eigenvalues();
      if (ev[0] < lambda - slack || ev[1] > Lambda + slack) {
        throw ConfigError("isaacs coefficient matrix has spectrum outside [lambda, Lambda]");
      }
      row.push_back(c);
    }
    op.coeffs_.push_back(std::move(row));
  }
  return op;
}

OperatorSpec OperatorSpec::shifted(const OperatorSpec& base, const SymMatrix& shift, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("shift scale must be positive");
  check_finite(shift);
  OperatorSpec op;
  op.kind_ = OperatorKind::shifted;
  op.lambda_ = base.lambda_;
  op.Lambda_ = base.Lambda_;
  op.shift_ = shift;
  op.scale_ = scale;
  op.offset_ = base(shift);
  op.base_ = std::make_shared<const OperatorSpec>(base);
  return op;
}

OperatorSpec OperatorSpec::translated(const OperatorSpec& base, const SymMatrix& shift, double offset) {
  check_finite(shift);
  if (!std::isfinite(offset)) throw InputError("offset must be finite");
  OperatorSpec op;
  op.kind_ = OperatorKind::shifted;
  op.lambda_ = base.lambda_;
  op.Lambda_ = base.Lambda_;
  op.shift_ = shift;
  op.scale_ = 1.0;
  op.offset_ = offset;
  op.base_ = std::make_shared<const OperatorSpec>(base);
  return op;
}

std::string OperatorSpec::tag() const {
  switch (kind_) {
    case OperatorKind::laplace: return "laplace";
    case OperatorKind::pucci_plus: return "pucci+";
    case OperatorKind::pucci_minus: return "pucci-";
    case OperatorKind::isaacs_minmax: return "isaacs";
    case OperatorKind::shifted: return "shifted";
  }
  return "unknown";
}

double OperatorSpec::operator()(const SymMatrix& m) const {
  switch (kind_) {
    case OperatorKind::laplace:
      check_finite(m);
      return m.trace();
    case OperatorKind::pucci_plus: return regulab::pucci_plus(m, lambda_, Lambda_);
    case OperatorKind::pucci_minus: return regulab::pucci_minus(m, lambda_, Lambda_);
    case OperatorKind::isaacs_minmax:
      check_finite(m);
      return isaacs_value(coeffs_, m);
    case OperatorKind::shifted: return ((*base_)(scale_ * m + shift_) - offset_) / scale_;
  }
  throw ConfigError("unknown operator kind");
}

double eval_operator(const OperatorSpec& op, const SymMatrix& m) { return op(m); }

OperatorSpec make_operator(std::string_view tag, double lambda, double Lambda) {
  if (tag == "laplace") return OperatorSpec::laplace();
  if (tag == "pucci+" || tag == "pucci_plus") return OperatorSpec::pucci_plus(lambda, Lambda);
  if (tag == "pucci-" || tag == "pucci_minus") return OperatorSpec::pucci_minus(lambda, Lambda);
  if (tag == "isaacs" || tag == "isaacs_minmax") return OperatorSpec::isaacs(lambda, Lambda);
  throw ConfigError("unknown operator tag '" + std::string(tag) + "'");
}

std::vector<OperatorSpec> operator_catalog(double lambda, double Lambda) {
  return {OperatorSpec::laplace(), OperatorSpec::pucci_plus(lambda, Lambda),
          OperatorSpec::pucci_minus(lambda, Lambda), OperatorSpec::isaacs(lambda, Lambda)};
}

EllipticityReport check_uniform_ellipticity(const std::function<double(const SymMatrix&)>& f, double lambda,
                                            double Lambda, int trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("trials must be >= 1");
  constexpr double kTol = 1e-9;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, M_PI);

  EllipticityReport report;
  report.worst_ratio_low = std::numeric_limits<double>::infinity();
  report.worst_ratio_high = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    // Spread M over several magnitudes so polynomial growth is caught.
    const double mag = std::pow(10.0, 2.0 * unit(rng) - 1.0);
    const SymMatrix m(mag * entry(rng), mag * entry(rng), mag * entry(rng));
    const SymMatrix n = SymMatrix::diag(1.0, unit(rng)).rotated(angle(rng));
    const double diff = f(m + n) - f(m);
    const double low = diff / n.spectral_norm();
    const double high = diff / n.trace();
    report.worst_ratio_low = std::min(report.worst_ratio_low, low);
    report.worst_ratio_high = std::max(report.worst_ratio_high, high);
    if (!std::isfinite(diff) || low < lambda - kTol || high > Lambda + kTol) ++report.failures;
  }
  report.pass = report.failures == 0;
  return report;
}

EllipticityReport check_uniform_ellipticity(const OperatorSpec& op, int trials, std::uint64_t seed) {
  return check_uniform_ellipticity([&op](const SymMatrix& m) { return op(m); }, op.lambda(), op.Lambda(), trials,
                                   seed);
}

double solve_recession_constant(const OperatorSpec& op, const SymMatrix& b, double tol) {
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  const auto g = [&](double t) { return op(b + t * SymMatrix::delta_nn()); };
  const double g0 = g(0.0);
  if (g0 == 0.0) return 0.0;
  const double reach = std::abs(g0) / op.lambda();
  double lo = -reach, hi = reach;
  double glo = g(lo), ghi = g(hi);
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(g0) + 1.0);
  if (glo > slack || ghi < -slack) {
    throw NumericalError("recession bracket does not contain a root; operator is not elliptic", std::abs(g0));
  }
  double best = std::abs(glo) < std::abs(ghi) ? lo : hi;
  double best_val = std::min(std::abs(glo), std::abs(ghi));
  for (int it = 0; it < 200 && best_val > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (std::abs(gm) < best_val) {
      best_val = std::abs(gm);
      best = mid;
    }
    if (gm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_val > tol) throw NumericalError("recession constant bisection did not reach tolerance", best_val);
  return best;
}

}  // namespace regulab
