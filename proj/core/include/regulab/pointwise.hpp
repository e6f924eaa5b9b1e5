#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "regulab/domain.hpp"
#include "regulab/poly_jet.hpp"

namespace regulab {

struct FitSample {
  Vec2 point;
  double value = 0.0;
};

struct FitResult {
  PolyJet P0;
  double K = 0.0;  ///< achieved Hoelder seminorm on the samples
  int k = 0;
  double alpha = 0.0;
};

/// Pointwise C^{k,alpha} fit at x0: the polynomial P of degree <= k
/// minimizing K subject to |f(x) - P(x)| <= K |x - x0|^{k+alpha} on every
/// sample, and among near-minimizers the one of least norm. A sample at x0
/// (or `pinned_value`) pins P(x0).
///
/// Throws InputError when there are fewer samples than coefficients.
FitResult pointwise_fit(std::span<const FitSample> samples, Vec2 x0, int k, double alpha,
                        std::optional<double> pinned_value = std::nullopt);

/// Boundary chart at 0 in the catalog frame: x2 ~ P(x1) with P(0) = 0,
/// DP(0) = 0, and K the least constant with |x2 - P(x1)| <= K |x1|^{k+alpha}
/// on the sampled boundary.
struct BoundaryChart {
  std::array<double, 4> rotation{1.0, 0.0, 0.0, 1.0};  // row-major, identity for catalog domains
  PolyJet P;          ///< only the x1^2 coefficient c2.a11() can be nonzero
  double K = 0.0;
  int k = 1;
  double alpha = 0.5;
  bool is_ck_alpha = true;  ///< false when K exceeds the ceiling

  /// A with P(x') = x'^T A x' (the 1x1 tangential block).
  double tangential_matrix() const { return P.c2.a11(); }
};

BoundaryChart classify_boundary_points(std::span<const Vec2> points, int k, double alpha, double ceiling = 1e3);

/// Samples the boundary inside B_1 at `samples` points per unit parameter
/// length and classifies it.
BoundaryChart classify_boundary(const Domain& domain, int k, double alpha, int samples = 4096,
                                double ceiling = 1e3);

}  // namespace regulab
