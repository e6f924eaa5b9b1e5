#include "regulab/poly_jet.hpp"

#include <algorithm>
#include <cmath>

namespace regulab {

double PolyJet::norm() const {
  return std::abs(c0) + std::abs(c1.x1) + std::abs(c1.x2) + c2.entry_l1();
}

PolyJet operator+(const PolyJet& a, const PolyJet& b) {
  // Both jets are taken about a's center; callers only add jets sharing one.
  PolyJet r = a;
  r.degree = std::max(a.degree, b.degree);
  r.c0 += b.c0;
  r.c1 = a.c1 + b.c1;
  r.c2 = a.c2 + b.c2;
  return r;
}

PolyJet operator*(double s, const PolyJet& p) {
  PolyJet r = p;
  r.c0 *= s;
  r.c1 = s * p.c1;
  r.c2 = s * p.c2;
  return r;
}

}  // namespace regulab
