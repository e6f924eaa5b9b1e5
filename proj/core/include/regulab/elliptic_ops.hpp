#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "regulab/sym_matrix.hpp"

namespace regulab {

/// Pucci maximal operator: Lambda * (sum of positive eigenvalues) + lambda * (sum of negative
/// eigenvalues). Throws InputError on non-finite entries or 0 < lambda <= Lambda violated.
double pucci_plus(const SymMatrix& m, double lambda, double Lambda);

/// Pucci minimal operator, equal to -pucci_plus(-m).
double pucci_minus(const SymMatrix& m, double lambda, double Lambda);

enum class OperatorKind { laplace, pucci_plus, pucci_minus, isaacs_minmax, shifted };

/// A uniformly elliptic operator F acting on Hessians.
///
/// Catalog operators satisfy F(0) = 0 exactly. `shifted` operators are
/// F~(M) = (F(s M + B) - c) / s for a base F; the constructor `shifted`
/// picks c = F(B) so that F~(0) = 0, while `translated` leaves c free (the
/// intermediate operators of the normalization chain).
class OperatorSpec {
 public:
  static OperatorSpec laplace();
  static OperatorSpec pucci_plus(double lambda, double Lambda);
  static OperatorSpec pucci_minus(double lambda, double Lambda);
  /// Catalog Isaacs instance: a 2x2 min-max over fixed coefficient matrices
  /// with spectra in [lambda, Lambda]. Neither convex nor concave.
  static OperatorSpec isaacs(double lambda, double Lambda);
  /// F(M) = min_j max_k trace((A_j + B_k) M) / 2. Every averaged matrix must
  /// have its spectrum inside [lambda, Lambda].
  static OperatorSpec isaacs(const std::vector<SymMatrix>& a_family, const std::vector<SymMatrix>& b_family,
                             double lambda, double Lambda);
  /// (F(scale * M + shift) - F(shift)) / scale.
  static OperatorSpec shifted(const OperatorSpec& base, const SymMatrix& shift, double scale);
  /// F(M + shift) - offset. F(0) = F(shift) - offset need not vanish.
  static OperatorSpec translated(const OperatorSpec& base, const SymMatrix& shift, double offset);

  OperatorKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  const SymMatrix& shift_matrix() const { return shift_; }
  double shift_scale() const { return scale_; }
  double offset() const { return offset_; }
  /// Base operator of a shifted operator; null otherwise.
  const std::shared_ptr<const OperatorSpec>& base() const { return base_; }
  /// Averaged coefficient matrices (A_j + B_k)/2, indexed [j][k]. Isaacs only.
  const std::vector<std::vector<SymMatrix>>& isaacs_coefficients() const { return coeffs_; }

  /// Catalog tag: "laplace", "pucci+", "pucci-", "isaacs" or "shifted".
  std::string tag() const;
  /// F(t M) = t F(M) for t >= 0. False for shifted operators.
  bool positively_homogeneous() const { return kind_ != OperatorKind::shifted; }

  double operator()(const SymMatrix& m) const;

 private:
  OperatorSpec() = default;

  OperatorKind kind_ = OperatorKind::laplace;
  double lambda_ = 1.0;
  double Lambda_ = 1.0;
  SymMatrix shift_{};
  double scale_ = 1.0;
  double offset_ = 0.0;
  std::shared_ptr<const OperatorSpec> base_;
  std::vector<std::vector<SymMatrix>> coeffs_;
};

/// Evaluates F(M).
double eval_operator(const OperatorSpec& op, const SymMatrix& m);

/// Catalog lookup by tag ("laplace", "pucci+", "pucci-", "isaacs"). `laplace`
/// ignores the constants and reports (1, 1). Throws ConfigError for unknown tags.
OperatorSpec make_operator(std::string_view tag, double lambda, double Lambda);

/// Every catalog operator for the given constants.
std::vector<OperatorSpec> operator_catalog(double lambda, double Lambda);

struct EllipticityReport {
  bool pass = true;
  double worst_ratio_low = 0.0;   ///< min of (F(M+N) - F(M)) / ||N||, should be >= lambda
  double worst_ratio_high = 0.0;  ///< max of (F(M+N) - F(M)) / trace(N), should be <= Lambda
  int failures = 0;
};

/// Samples (M, N) with N >= 0, ||N|| = 1 and checks
/// lambda ||N|| <= F(M+N) - F(M) <= Lambda trace(N) within 1e-9.
EllipticityReport check_uniform_ellipticity(const std::function<double(const SymMatrix&)>& f, double lambda,
                                            double Lambda, int trials, std::uint64_t seed);
EllipticityReport check_uniform_ellipticity(const OperatorSpec& op, int trials, std::uint64_t seed);

/// Finds t with |F(B + t delta_nn)| <= tol by bisection on [-|F(B)|/lambda, |F(B)|/lambda].
/// Throws NumericalError when the bracket does not straddle a root.
double solve_recession_constant(const OperatorSpec& op, const SymMatrix& b, double tol = 1e-10);

}  // namespace regulab
