#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "regulab/elliptic_ops.hpp"
#include "regulab/grid.hpp"
#include "regulab/pointwise.hpp"
#include "regulab/poly_jet.hpp"
#include "regulab/solver.hpp"

namespace regulab {

/// Dyadic scales eta^k, k = 0..k_max, restricted to [r_floor, r_ceiling].
struct IterationConfig {
  double eta = 0.5;
  double alpha = 0.5;
  int k_max = 0;  ///< 0 picks the last k with eta^k >= r_floor
  double r_floor = 0.0;    ///< smallest trusted radius; 0 means 4h of the grid in use
  double r_ceiling = 1.0;  ///< largest radius analysed

  /// Throws ConfigError for eta, alpha outside (0, 1), r_floor < 4h or
  /// eta^k_max >= r_floor failing.
  void validate(double h) const;
  /// Trusted scales, largest first.
  std::vector<double> scales(double h) const;
};

/// Per-scale fits of a Campanato iteration.
struct JetTrace {
  std::vector<int> k;
  std::vector<double> scales;
  std::vector<PolyJet> coeffs;
  std::vector<double> residuals;             ///< sup over Omega cap B_r of |u - fitted form|
  std::vector<double> constraint_residuals;  ///< |F(D^2 fitted form)|, 0 for C^{1,alpha} traces

  std::size_t size() const { return scales.size(); }
};

struct C1aResult {
  JetTrace trace;
  std::vector<double> a;  ///< a_k
  Vec2 Du0{};             ///< (0, a_last)
};

struct C2aResult {
  JetTrace trace;
  std::vector<double> b1n;
  std::vector<double> bnn;
  Vec2 D2u0_mixed{};  ///< (b_1n, b_nn) at the last scale; D^2 u(0) = [[0, b_1n], [b_1n, 2 b_nn]]
  double residual_slope = 0.0;
  bool precondition_violated = false;  ///< residuals decay slower than r^{1.5}: Du(0) != 0
};

/// Least value and the minimizing a of max_i |v_i - a y_i| (midpoint of the
/// argmin interval when it is not a point).
struct LineMinimax {
  double a = 0.0;
  double value = 0.0;
};
LineMinimax line_minimax(std::span<const double> v, std::span<const double> y);

/// Best a x2 fit of u over Omega cap B_{eta^k} for every trusted scale.
/// Throws NumericalError when fewer than 3 scales are usable.
C1aResult campanato_c1a(const GridFunction& u, const Domain& domain, const IterationConfig& cfg);

/// Best b_1n x1 x2 + b_nn x2^2 fit with F(D^2) = 0 enforced through
/// b_nn = t(b_1n) / 2, t the recession constant of [[0, b_1n], [b_1n, 0]].
C2aResult campanato_c2a(const GridFunction& u, const Domain& domain, const OperatorSpec& op,
                        const IterationConfig& cfg);

/// Largest deviation between the a x2 fit of the rescaled data
/// v(y) = (u(r y) - a_k r y2) / r^{1+alpha} at scale eta and
/// (a_{k+1} - a_k) / r^alpha, over consecutive scale pairs of the trace.
double rescaling_defect(const GridFunction& u, const C1aResult& fit, const IterationConfig& cfg);

/// Cauchy behaviour of a coefficient sequence c_k at scales r_k:
/// |c_k - c_{k-1}| <= C r_k^alpha.
struct CauchyReport {
  double fitted_C = 0.0;     ///< max_k |c_k - c_{k-1}| / r_k^alpha
  double decay_ratio = 0.0;  ///< geometric ratio of |c_k - c_{k-1}| from a log-linear fit
  double max_ratio = 0.0;    ///< max of consecutive ratios
};
CauchyReport cauchy_report(std::span<const double> coeffs, std::span<const double> scales, double alpha);

struct NormalizedProblem {
  GridFunction u3;
  OperatorSpec op4 = OperatorSpec::laplace();
  OperatorSpec op3 = OperatorSpec::laplace();
  double t = 0.0;          ///< coefficient of the added t x2^2
  double F3_at_zero = 0.0;
  double g3_bound = 0.0;   ///< max |u3| / |x|^{2+alpha} over boundary feet
};

/// The C^{2,alpha} normalization chain at 0:
///   u1 = u - g_jet,                      F2(M) = F(M + D^2 g_jet) - f0,
///   u2 = u1 - c (x2 - A x1^2),           F3(M) = F2(M - 2 c diag(A, 0)),
///   u3 = u2 + t x2^2,                    F4(M) = F3(M - 2 t delta_nn), F4(0) = 0,
/// with c = du0_normal and A the chart's tangential matrix. Boundary values
/// are carried along. Throws NumericalError when |t| > |F3(0)| / lambda + 1e-10.
NormalizedProblem normalize_problem(const GridFunction& u, const PolyJet& g_jet, double f0, const OperatorSpec& op,
                                    const BoundaryChart& chart, double du0_normal);

/// normalize_problem with c chosen by a secant iteration so that the
/// campanato_c1a estimate of Du(0) for u3 vanishes to `tol`; the first
/// guess is the c1a estimate for u - g_jet.
NormalizedProblem normalize_with_refinement(const GridFunction& u, const PolyJet& g_jet, double f0,
                                            const OperatorSpec& op, const BoundaryChart& chart, const Domain& domain,
                                            const IterationConfig& cfg, double tol = 1e-6, double* du0_out = nullptr);

/// Data of a localization experiment on Omega cap B_1: constant f, g_inner
/// on the domain boundary and g_outer on the truncation sphere.
struct LocalizationData {
  double f = 0.0;
  PlaneFunction g_inner = [](Vec2) { return 0.0; };
  PlaneFunction g_outer = [](Vec2) { return 0.0; };
  int n_dirs = 16;

  /// |f| = delta, |g_inner| <= delta, g_outer = 1.
  static LocalizationData standard(double delta);
};

struct LocalizationReport {
  double sup_u_on_Omega_delta = 0.0;
  double fitted_C = 0.0;  ///< sup / delta
  double osc = 0.0;       ///< osc of the boundary over B_1
  std::size_t nodes = 0;
};

LocalizationReport localization_experiment(const OperatorSpec& op, const Domain& domain, double delta, double h,
                                           const LocalizationData& data);

/// max |u(x) - u(y)| over node pairs in B(center, radius) with |x - y| <= separation.
/// Throws InputError when no pair qualifies.
double modulus_probe(const GridFunction& u, Vec2 center, double radius, double separation);

struct MembershipReport {
  bool sub = false;    ///< M+_h[u] >= f - tol at every node
  bool super = false;  ///< M-_h[u] <= f + tol at every node
  double worst_sub = 0.0;    ///< min of row-scaled M+_h[u] - f
  double worst_super = 0.0;  ///< max of row-scaled M-_h[u] - f
};

/// Discrete class S(lambda, Lambda, f) test with the wide-stencil Pucci
/// operators; tol applies to row-scaled values as in the solver.
MembershipReport viscosity_membership(const GridFunction& u, std::span<const double> f, double lambda,
                                      double Lambda, double tol, int n_dirs = 16);

struct RateReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double fitted_C = 0.0;  ///< exp(intercept)
  double r1 = 0.0;        ///< largest radius below which every point is within a factor 2 of the fit
  bool exact = false;     ///< every residual vanished; slope is +inf
  int used = 0;
  int zeros_excluded = 0;
};

/// Least squares line through (log r, log residual). Residuals <= zero_tol
/// are excluded. Throws InputError when 1 or 2 positive residuals remain.
RateReport rate_fit(std::span<const double> scales, std::span<const double> residuals, double zero_tol = 0.0);

}  // namespace regulab
