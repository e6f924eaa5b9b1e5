#include "regulab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regulab/errors.hpp"

namespace regulab {
namespace {

constexpr double kSlitTolerance = 1e-12;

// Half-width in x1 of the slit {x2 = x1^2/2, |x| <= 1/2}: x1^2 + x1^4/4 = 1/4.
double slit_half_width() { return std::sqrt(std::sqrt(5.0) - 2.0); }

BoundaryPiece graph_piece(GraphProfile profile, double t0, double t1, std::string name) {
  BoundaryPiece p;
  p.shape = BoundaryPiece::Shape::graph;
  p.profile = profile;
  p.t0 = t0;
  p.t1 = t1;
  p.name = std::move(name);
  return p;
}

BoundaryPiece arc_piece(Vec2 center, double radius, double t0, double t1, std::string name) {
  BoundaryPiece p;
  p.shape = BoundaryPiece::Shape::arc;
  p.center = center;
  p.radius = radius;
  p.t0 = t0;
  p.t1 = t1;
  p.name = std::move(name);
  return p;
}

bool angle_in_range(const BoundaryPiece& arc, Vec2 q) {
  if (arc.t1 - arc.t0 >= 2.0 * M_PI - 1e-15) return true;
  double th = std::atan2(q.x2 - arc.center.x2, q.x1 - arc.center.x1);
  while (th < arc.t0) th += 2.0 * M_PI;
  while (th >= arc.t0 + 2.0 * M_PI) th -= 2.0 * M_PI;
  return th <= arc.t1 + 1e-15;
}

// Roots of |x + s d - c| = rho for unit d, ascending.
int circle_roots(Vec2 x, Vec2 d, Vec2 c, double rho, double roots[2]) {
  const Vec2 w = x - c;
  const double b = w.dot(d);
  const double cc = w.dot(w) - rho * rho;
  const double disc = b * b - cc;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  // Stable form of the two roots.
  const double q = b >= 0.0 ? -(b + sq) : -(b - sq);
  double r0 = q, r1 = q != 0.0 ? cc / q : -b;
  if (r0 > r1) std::swap(r0, r1);
  roots[0] = r0;
  roots[1] = r1;
  return 2;
}

struct Hit {
  double s = std::numeric_limits<double>::infinity();
  Vec2 foot{};
};

Hit graph_hit(const BoundaryPiece& piece, Vec2 x, Vec2 d, double length) {
  const GraphProfile& phi = piece.profile;
  const double s_min = 1e-14 * length;
  Hit hit;
  const auto accept = [&](double s) {
    if (s > s_min && s <= length && s < hit.s) {
      const double x1 = x.x1 + s * d.x1;
      if (x1 >= piece.t0 && x1 <= piece.t1) {
        hit.s = s;
        hit.foot = {x1, phi(x1)};
      }
    }
  };

  if (d.x1 == 0.0) {
    if (x.x1 < piece.t0 || x.x1 > piece.t1 || d.x2 == 0.0) return hit;
    const double s = (phi(x.x1) - x.x2) / d.x2;
    if (s > s_min && s <= length) {
      hit.s = s;
      hit.foot = {x.x1, phi(x.x1)};
    }
    return hit;
  }
  if (phi.amplitude == 0.0) {
    if (d.x2 == 0.0) return hit;
    accept((phi.offset - x.x2) / d.x2);
    if (hit.s < std::numeric_limits<double>::infinity()) hit.foot.x2 = phi.offset;
    return hit;
  }
  if (phi.exponent == 2.0 && !phi.odd) {
    // x2 + s d2 = off + a (x1 + s d1)^2, a quadratic in s.
    const double a = phi.amplitude * d.x1 * d.x1;
    const double b = 2.0 * phi.amplitude * x.x1 * d.x1 - d.x2;
    const double c = phi.amplitude * x.x1 * x.x1 + phi.offset - x.x2;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return hit;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    if (q != 0.0) {
      accept(q / a);
      accept(c / q);
    } else {
      accept(0.0);
    }
    return hit;
  }

  // General profile: bracket sign changes of g(s) = x2(s) - phi(x1(s)) and bisect.
  double sa = (piece.t0 - x.x1) / d.x1, sb = (piece.t1 - x.x1) / d.x1;
  if (sa > sb) std::swap(sa, sb);
  sa = std::max(sa, 0.0);
  sb = std::min(sb, length);
  if (sa >= sb) return hit;
  const auto g = [&](double s) { return x.x2 + s * d.x2 - phi(x.x1 + s * d.x1); };
  constexpr int kSub = 64;
  double s_prev = sa, g_prev = g(sa);
  for (int k = 1; k <= kSub; ++k) {
    const double s_next = sa + (sb - sa) * k / kSub;
    const double g_next = g(s_next);
    if (g_next == 0.0 && s_next > s_min) {
      accept(s_next);
      return hit;
    }
    if ((g_prev > 0.0 && g_next < 0.0) || (g_prev < 0.0 && g_next > 0.0)) {
      double lo = s_prev, hi = s_next, glo = g_prev;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      accept(0.5 * (lo + hi));
      return hit;
    }
    s_prev = s_next;
    g_prev = g_next;
  }
  return hit;
}

Hit arc_hit(const BoundaryPiece& piece, Vec2 x, Vec2 d, double length) {
  Hit hit;
  double roots[2];
  if (circle_roots(x, d, piece.center, piece.radius, roots) == 0) return hit;
  const double s_min = 1e-14 * length;
  for (double s : roots) {
    if (s <= s_min || s > length) continue;
    const Vec2 q = x + s * d;
    if (!angle_in_range(piece, q)) continue;
    const Vec2 w = q - piece.center;
    hit.s = s;
    hit.foot = piece.center + (piece.radius / w.norm()) * w;
    return hit;
  }
  return hit;
}

}  // namespace

double GraphProfile::operator()(double x1) const {
  if (amplitude == 0.0) return offset;
  double v = amplitude * std::pow(std::abs(x1), exponent);
  if (odd && x1 < 0.0) v = -v;
  return offset + v;
}

Vec2 BoundaryPiece::point(double t) const {
  if (shape == Shape::graph) return {t, profile(t)};
  return {center.x1 + radius * std::cos(t), center.x2 + radius * std::sin(t)};
}

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::half_ball: return "half_ball";
    case DomainKind::graph_bump: return "graph_bump";
    case DomainKind::slit_ball: return "slit_ball";
    case DomainKind::ball: return "ball";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(std::string_view tag) {
  if (tag == "half_ball") return DomainKind::half_ball;
  if (tag == "graph_bump") return DomainKind::graph_bump;
  if (tag == "slit_ball") return DomainKind::slit_ball;
  if (tag == "ball") return DomainKind::ball;
  throw ConfigError("unknown domain kind '" + std::string(tag) + "'");
}

Domain::Domain(DomainKind kind, std::vector<double> params, std::vector<BoundaryPiece> pieces)
    : kind_(kind), params_(std::move(params)), pieces_(std::move(pieces)) {}

bool Domain::inside(Vec2 x) const {
  switch (kind_) {
    case DomainKind::half_ball: {
      const Vec2 c{0.0, -shift_};
      const Vec2 w = x - c;
      return w.dot(w) < 1.0 && x.x2 > -shift_;
    }
    case DomainKind::graph_bump: return x.dot(x) < 4.0 && x.x2 > pieces_[0].profile(x.x1);
    case DomainKind::slit_ball: {
      const Vec2 w = x - Vec2{0.0, 1.0};
      if (w.dot(w) >= 4.0) return false;
      const bool on_slit = x.norm() <= 0.5 + kSlitTolerance && std::abs(x.x2 - 0.5 * x.x1 * x.x1) <= kSlitTolerance;
      return !on_slit;
    }
    case DomainKind::ball: {
      const Vec2 w = x - Vec2{0.0, 1.0};
      return w.dot(w) < 1.0;
    }
  }
  return false;
}

std::optional<Crossing> Domain::first_crossing(Vec2 x, Vec2 dir, double length, double truncation) const {
  Crossing best;
  best.s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& piece = pieces_[i];
    const Hit hit = piece.shape == BoundaryPiece::Shape::graph ? graph_hit(piece, x, dir, length)
                                                               : arc_hit(piece, x, dir, length);
    if (hit.s < best.s) {
      best.s = hit.s;
      best.foot = hit.foot;
      best.piece = static_cast<int>(i);
    }
  }
  if (truncation > 0.0) {
    BoundaryPiece sphere = arc_piece({0.0, 0.0}, truncation, -M_PI, M_PI, "truncation");
    const Hit hit = arc_hit(sphere, x, dir, length);
    if (hit.s < best.s) {
      best.s = hit.s;
      best.foot = hit.foot;
      best.piece = -1;
    }
  }
  if (!std::isfinite(best.s)) return std::nullopt;
  return best;
}

std::vector<Vec2> Domain::sample_boundary(double r, int density) const {
  std::vector<Vec2> out;
  // The margin keeps arcs of radius r itself out of B_r despite rounding.
  const auto in_ball = [r](Vec2 p) { return p.dot(p) < r * r * (1.0 - 1e-12); };
  for (const auto& piece : pieces_) {
    const double span = piece.t1 - piece.t0;
    const double len = piece.shape == BoundaryPiece::Shape::arc ? span * piece.radius : span;
    const int n = std::max(16, static_cast<int>(std::ceil(density * len)));
    double t_prev = piece.t0;
    bool prev_in = in_ball(piece.point(t_prev));
    if (prev_in) out.push_back(piece.point(t_prev));
    for (int k = 1; k <= n; ++k) {
      const double t = piece.t0 + span * k / n;
      const Vec2 p = piece.point(t);
      const bool now_in = in_ball(p);
      if (now_in != prev_in) {
        // Locate the exact exit from B_r.
        double lo = t_prev, hi = t;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (in_ball(piece.point(mid)) == prev_in ? lo : hi) = mid;
        }
        out.push_back(piece.point(prev_in ? lo : hi));
      }
      if (now_in) out.push_back(p);
      t_prev = t;
      prev_in = now_in;
    }
    // Add the origin exactly when it lies on this piece.
    if (piece.shape == BoundaryPiece::Shape::graph) {
      if (piece.t0 <= 0.0 && piece.t1 >= 0.0 && piece.profile(0.0) == 0.0) out.push_back({0.0, 0.0});
    } else if (std::abs(piece.center.norm() - piece.radius) <= 1e-15 * piece.radius) {
      out.push_back({0.0, 0.0});
    }
  }
  return out;
}

Domain Domain::shifted_half_ball(double delta) {
  if (!(delta >= 0.0) || delta >= 1.0) throw ConfigError("shifted half ball needs 0 <= delta < 1");
  GraphProfile flat;
  flat.offset = -delta;
  std::vector<BoundaryPiece> pieces{graph_piece(flat, -1.0, 1.0, "flat"),
                                    arc_piece({0.0, -delta}, 1.0, 0.0, M_PI, "outer")};
  Domain d(DomainKind::half_ball, {delta}, std::move(pieces));
  d.shift_ = delta;
  return d;
}

Domain make_domain(DomainKind kind, const std::vector<double>& params) {
  switch (kind) {
    case DomainKind::half_ball: {
      if (!params.empty()) throw ConfigError("half_ball takes no parameters");
      Domain d = Domain::shifted_half_ball(0.0);
      return Domain(DomainKind::half_ball, {}, d.boundary());
    }
    case DomainKind::graph_bump: {
      if (params.size() != 2) throw ConfigError("graph_bump needs params {K, exponent}");
      const double k = params[0], p = params[1];
      if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("graph_bump amplitude must be >= 0");
      if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("graph_bump exponent must be > 1");
      GraphProfile phi{0.0, k, p, true};
      // Where the graph leaves the container B_2.
      double lo = 0.0, hi = 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double y = phi(mid);
        (mid * mid + y * y < 4.0 ? lo : hi) = mid;
      }
      const double b = lo;
      const double theta = std::atan2(phi(b), b);
      return Domain(kind, params,
                    {graph_piece(phi, -b, b, "graph"), arc_piece({0.0, 0.0}, 2.0, theta, theta + M_PI, "outer")});
    }
    case DomainKind::slit_ball: {
      if (!params.empty()) throw ConfigError("slit_ball takes no parameters");
      const double s = slit_half_width();
      GraphProfile parabola{0.0, 0.5, 2.0, false};
      return Domain(kind, {},
                    {graph_piece(parabola, -s, s, "slit"), arc_piece({0.0, 1.0}, 2.0, -M_PI, M_PI, "outer")});
    }
    case DomainKind::ball: {
      if (!params.empty()) throw ConfigError("ball takes no parameters");
      return Domain(kind, {}, {arc_piece({0.0, 1.0}, 1.0, -M_PI, M_PI, "sphere")});
    }
  }
  throw ConfigError("unknown domain kind");
}

double osc_boundary(const Domain& domain, double r) {
  if (!(r > 0.0) || r > 1.0) throw InputError("osc_boundary needs 0 < r <= 1");
  const auto pts = domain.sample_boundary(r);
  if (pts.empty()) throw NumericalError("no boundary points in B_r");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : pts) {
    lo = std::min(lo, p.x2);
    hi = std::max(hi, p.x2);
  }
  return hi - lo;
}

}  // namespace regulab
