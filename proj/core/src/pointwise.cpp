#include "regulab/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regulab/errors.hpp"
#include "regulab/minimax_lp.hpp"

namespace regulab {
namespace {

int coefficient_count(int k) { return (k + 1) * (k + 2) / 2; }

// Monomials of d up to degree k: 1, d1, d2, d1^2, d1 d2, d2^2.
void monomials(Vec2 d, int k, double* out) {
  out[0] = 1.0;
  if (k >= 1) {
    out[1] = d.x1;
    out[2] = d.x2;
  }
  if (k >= 2) {
    out[3] = d.x1 * d.x1;
    out[4] = d.x1 * d.x2;
    out[5] = d.x2 * d.x2;
  }
}

}  // namespace

FitResult pointwise_fit(std::span<const FitSample> samples, Vec2 x0, int k, double alpha,
                        std::optional<double> pinned_value) {
  if (k < 0 || k > 2) throw InputError("pointwise_fit supports k in {0, 1, 2}");
  if (!(alpha > 0.0) || alpha > 1.0) throw InputError("alpha must lie in (0, 1]");
  const int nb = coefficient_count(k);
  const std::size_t count = samples.size() + (pinned_value ? 1 : 0);
  if (count < static_cast<std::size_t>(nb)) throw InputError("pointwise_fit is under-determined");

  std::vector<double> rows(count * nb), values(count), weights(count);
  std::size_t i = 0;
  for (const auto& s : samples) {
    const Vec2 d = s.point - x0;
    monomials(d, k, &rows[i * nb]);
    values[i] = s.value;
    weights[i] = std::pow(d.norm(), k + alpha);
    ++i;
  }
  if (pinned_value) {
    monomials({0.0, 0.0}, k, &rows[i * nb]);
    values[i] = *pinned_value;
    weights[i] = 0.0;
  }

  const MinimaxFit fit = minimax_fit(nb, rows, values, weights, true);
  FitResult out;
  out.k = k;
  out.alpha = alpha;
  out.K = fit.K;
  out.P0.degree = k;
  out.P0.center = x0;
  out.P0.c0 = fit.coeffs[0];
  if (k >= 1) out.P0.c1 = {fit.coeffs[1], fit.coeffs[2]};
  if (k >= 2) out.P0.c2 = SymMatrix(fit.coeffs[3], 0.5 * fit.coeffs[4], fit.coeffs[5]);
  return out;
}

BoundaryChart classify_boundary_points(std::span<const Vec2> points, int k, double alpha, double ceiling) {
  if (k != 1 && k != 2) throw InputError("classify_boundary supports k in {1, 2}");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  BoundaryChart chart;
  chart.k = k;
  chart.alpha = alpha;
  chart.P.degree = k;

  const double expo = k + alpha;
  std::vector<double> rows, values, weights;
  rows.reserve(points.size());
  values.reserve(points.size());
  weights.reserve(points.size());
  // Points this close to 0 carry no information beyond P(0) = 0 and
  // only inject parametrization roundoff into the weighted fit.
  constexpr double kNearOrigin = 1e-9;
  for (const auto& p : points) {
    if (p.norm() < kNearOrigin) continue;
    const double w = std::abs(p.x1) < kNearOrigin ? 0.0 : std::pow(std::abs(p.x1), expo);
    if (w == 0.0) {
      // A boundary point straight above or below 0 cannot lie on any graph through 0.
      chart.K = std::numeric_limits<double>::infinity();
      chart.is_ck_alpha = false;
      return chart;
    }
    rows.push_back(p.x1 * p.x1);
    values.push_back(p.x2);
    weights.push_back(w);
  }

  if (k == 1) {
    // P(0) = 0 and DP(0) = 0 leave P = 0.
    double kk = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (weights[i] > 0.0) kk = std::max(kk, std::abs(values[i]) / weights[i]);
    }
    chart.K = kk;
  } else {
    const bool any = std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
    if (any) {
      const MinimaxFit fit = minimax_fit(1, rows, values, weights, true);
      chart.P.c2 = SymMatrix(fit.coeffs[0], 0.0, 0.0);
      chart.K = fit.K;
    }
  }
  chart.is_ck_alpha = chart.K <= ceiling;
  return chart;
}

BoundaryChart classify_boundary(const Domain& domain, int k, double alpha, int samples, double ceiling) {
  if (samples < 16) throw InputError("classify_boundary needs at least 16 samples per unit length");
  const auto pts = domain.sample_boundary(1.0, samples);
  return classify_boundary_points(pts, k, alpha, ceiling);
}

}  // namespace regulab
