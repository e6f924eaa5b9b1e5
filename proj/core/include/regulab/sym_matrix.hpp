#pragma once

#include <array>
#include <cmath>

namespace regulab {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double a, double b) : x1(a), x2(b) {}

  constexpr double operator[](int i) const { return i == 0 ? x1 : x2; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;

  constexpr double dot(Vec2 o) const { return x1 * o.x1 + x2 * o.x2; }
  double norm() const { return std::hypot(x1, x2); }
};

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
///
/// Hessians, coefficient matrices and the matrix shifts of the normalization
/// chain all live here. Eigenvalues are computed in closed form.
class SymMatrix {
 public:
  constexpr SymMatrix() = default;
  constexpr SymMatrix(double a11, double a12, double a22) : a11_(a11), a12_(a12), a22_(a22) {}

  /// Symmetrizes a general 2x2 matrix given row-major.
  static constexpr SymMatrix from_rows(double m11, double m12, double m21, double m22) {
    return {m11, 0.5 * (m12 + m21), m22};
  }
  static constexpr SymMatrix diag(double d1, double d2) { return {d1, 0.0, d2}; }
  static constexpr SymMatrix identity() { return {1.0, 0.0, 1.0}; }
  /// The matrix delta_nn: a single 1 in the normal-normal slot.
  static constexpr SymMatrix delta_nn() { return {0.0, 0.0, 1.0}; }
  /// e e^T for a (not necessarily unit) vector e.
  static constexpr SymMatrix outer(Vec2 e) { return {e.x1 * e.x1, e.x1 * e.x2, e.x2 * e.x2}; }

  constexpr double a11() const { return a11_; }
  constexpr double a12() const { return a12_; }
  constexpr double a22() const { return a22_; }
  constexpr double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? a11_ : a12_) : (j == 0 ? a12_ : a22_);
  }

  constexpr double trace() const { return a11_ + a22_; }
  constexpr double det() const { return a11_ * a22_ - a12_ * a12_; }
  /// e^T M e.
  constexpr double quad(Vec2 e) const {
    return a11_ * e.x1 * e.x1 + 2.0 * a12_ * e.x1 * e.x2 + a22_ * e.x2 * e.x2;
  }
  constexpr Vec2 apply(Vec2 e) const { return {a11_ * e.x1 + a12_ * e.x2, a12_ * e.x1 + a22_ * e.x2}; }
  /// trace(M N) for symmetric M, N.
  constexpr double frobenius_dot(const SymMatrix& o) const {
    return a11_ * o.a11_ + 2.0 * a12_ * o.a12_ + a22_ * o.a22_;
  }

  /// Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const {
    const double mid = 0.5 * (a11_ + a22_);
    const double rad = std::hypot(0.5 * (a11_ - a22_), a12_);
    return {mid - rad, mid + rad};
  }
  /// Largest absolute eigenvalue.
  double spectral_norm() const {
    auto ev = eigenvalues();
    return std::max(std::abs(ev[0]), std::abs(ev[1]));
  }
  /// Sum of absolute entries (off-diagonal counted twice).
  constexpr double entry_l1() const {
    return (a11_ < 0 ? -a11_ : a11_) + 2.0 * (a12_ < 0 ? -a12_ : a12_) + (a22_ < 0 ? -a22_ : a22_);
  }
  bool finite() const { return std::isfinite(a11_) && std::isfinite(a12_) && std::isfinite(a22_); }

  /// R M R^T for the rotation by angle theta.
  SymMatrix rotated(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double b11 = c * a11_ - s * a12_, b12 = c * a12_ - s * a22_;
    const double b21 = s * a11_ + c * a12_, b22 = s * a12_ + c * a22_;
    return from_rows(b11 * c - b12 * s, b11 * s + b12 * c, b21 * c - b22 * s, b21 * s + b22 * c);
  }

  friend constexpr SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return {a.a11_ + b.a11_, a.a12_ + b.a12_, a.a22_ + b.a22_};
  }
  friend constexpr SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    return {a.a11_ - b.a11_, a.a12_ - b.a12_, a.a22_ - b.a22_};
  }
  friend constexpr SymMatrix operator-(const SymMatrix& a) { return {-a.a11_, -a.a12_, -a.a22_}; }
  friend constexpr SymMatrix operator*(double s, const SymMatrix& a) {
    return {s * a.a11_, s * a.a12_, s * a.a22_};
  }
  friend constexpr bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  double a11_ = 0.0;
  double a12_ = 0.0;
  double a22_ = 0.0;
};

}  // namespace regulab
