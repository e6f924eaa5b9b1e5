#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regulab/sym_matrix.hpp"

namespace regulab {

enum class DomainKind { half_ball, graph_bump, slit_ball, ball };

std::string to_string(DomainKind kind);
/// Throws ConfigError for unknown tags.
DomainKind domain_kind_from_string(std::string_view tag);

/// x2 = offset + amplitude * |x1|^exponent, with the sign of x1 applied when `odd`.
struct GraphProfile {
  double offset = 0.0;
  double amplitude = 0.0;
  double exponent = 1.0;
  bool odd = false;

  double operator()(double x1) const;
};

/// One analytic piece of the boundary: either a graph over an x1 interval
/// or a circular arc over an angle interval.
struct BoundaryPiece {
  enum class Shape { graph, arc };

  Shape shape = Shape::graph;
  double t0 = 0.0;
  double t1 = 0.0;
  GraphProfile profile{};  // graph
  Vec2 center{};           // arc
  double radius = 0.0;     // arc
  std::string name;

  Vec2 point(double t) const;
};

struct Crossing {
  double s = 0.0;  ///< distance along the unit direction
  Vec2 foot{};     ///< point on the boundary
  int piece = -1;  ///< index into Domain::boundary(); -1 for the truncation sphere
};

/// Bounded planar test domain with 0 on its boundary.
///
///  - half_ball:  B_1 cap {x2 > 0}.
///  - graph_bump: B_2 cap {x2 > K sgn(x1) |x1|^p}; params {K, p}, K >= 0, p > 1.
///  - slit_ball:  B(e2, 2) minus the slit {x2 = x1^2/2, |x| <= 1/2}; the
///                slit is two-sided and is the only boundary inside B_1.
///  - ball:       B(e2, 1).
class Domain {
 public:
  Domain(DomainKind kind, std::vector<double> params, std::vector<BoundaryPiece> pieces);

  DomainKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<BoundaryPiece>& boundary() const { return pieces_; }

  bool inside(Vec2 x) const;

  /// First point where the segment x + s*dir, 0 < s <= length, meets the
  /// boundary of the domain or of the sphere |x| = truncation (when positive).
  /// `dir` must be a unit vector and x inside.
  std::optional<Crossing> first_crossing(Vec2 x, Vec2 dir, double length, double truncation = 0.0) const;

  /// Boundary points within the open ball B_r, `density` samples per unit
  /// parameter length per piece, plus the exact points where each piece
  /// leaves B_r.
  std::vector<Vec2> sample_boundary(double r, int density = 4096) const;

  /// The shifted half ball B_1^+ - delta e2 used by the barrier solve. 0 is
  /// an interior point of this domain.
  static Domain shifted_half_ball(double delta);

 private:
  DomainKind kind_;
  std::vector<double> params_;
  std::vector<BoundaryPiece> pieces_;
  double shift_ = 0.0;  // vertical offset of the shifted half ball
};

/// Catalog factory. Throws ConfigError for invalid parameters.
Domain make_domain(DomainKind kind, const std::vector<double>& params = {});

/// sup - inf of x2 over boundary points in B_r.
double osc_boundary(const Domain& domain, double r);

}  // namespace regulab
