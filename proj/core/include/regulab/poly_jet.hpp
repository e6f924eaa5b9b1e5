#pragma once

#include "regulab/sym_matrix.hpp"

namespace regulab {

/// Polynomial of degree <= 2 expanded about `center`:
///   P(x) = c0 + c1 . (x - center) + (x - center)^T c2 (x - center).
///
/// Note that D^2 P = 2 c2.
struct PolyJet {
  int degree = 2;
  double c0 = 0.0;
  Vec2 c1{};
  SymMatrix c2{};
  Vec2 center{};

  double operator()(Vec2 x) const {
    const Vec2 d = x - center;
    return c0 + c1.dot(d) + c2.quad(d);
  }

  Vec2 gradient_at_center() const { return c1; }
  SymMatrix hessian() const { return 2.0 * c2; }

  /// |c0| + |c1|_1 + sum of |c2| entries (off-diagonal counted twice).
  double norm() const;

  friend PolyJet operator+(const PolyJet& a, const PolyJet& b);
  friend PolyJet operator*(double s, const PolyJet& p);
};

}  // namespace regulab
