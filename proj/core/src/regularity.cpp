#include "regulab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regulab/errors.hpp"

namespace regulab {
namespace {

double effective_floor(const IterationConfig& cfg, double h) { return cfg.r_floor > 0.0 ? cfg.r_floor : 4.0 * h; }

int effective_kmax(const IterationConfig& cfg, double h) {
  if (cfg.k_max > 0) return cfg.k_max;
  return static_cast<int>(std::floor(std::log(effective_floor(cfg, h)) / std::log(cfg.eta) + 1e-9));
}

struct Window {
  std::vector<std::size_t> nodes;
};

Window window(const Grid& g, double r) {
  Window w;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (g.nodes[i].dot(g.nodes[i]) < r * r) w.nodes.push_back(i);
  }
  return w;
}

struct IntervalMinimax {
  double lo = 0.0, hi = 0.0, value = 0.0;
  bool empty_lines = false;
};

// Argmin interval of max_i |v_i - a y_i|.
IntervalMinimax interval_minimax(std::span<const double> v, std::span<const double> y) {
  double c0 = 0.0;
  std::vector<double> w, t;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (y[i] == 0.0) {
      c0 = std::max(c0, std::abs(v[i]));
    } else {
      w.push_back(std::abs(y[i]));
      t.push_back(v[i] / y[i]);
    }
  }
  IntervalMinimax out;
  if (w.empty()) {
    out.empty_lines = true;
    out.value = c0;
    return out;
  }
  const auto up = [&](double a, std::size_t* arg) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double val = w[i] * (a - t[i]);
      if (val > m) {
        m = val;
        if (arg) *arg = i;
      }
    }
    return m;
  };
  const auto down = [&](double a, std::size_t* arg) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double val = w[i] * (t[i] - a);
      if (val > m) {
        m = val;
        if (arg) *arg = i;
      }
    }
    return m;
  };
  double lo = *std::min_element(t.begin(), t.end());
  double hi = *std::max_element(t.begin(), t.end());
  for (int it = 0; it < 200 && lo < hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (up(mid, nullptr) < down(mid, nullptr) ? lo : hi) = mid;
  }
  // Intersect the two active lines.
  std::size_t iu = 0, id = 0;
  up(lo, &iu);
  down(hi, &id);
  double a = (w[iu] * t[iu] + w[id] * t[id]) / (w[iu] + w[id]);
  const auto g = [&](double x) { return std::max(up(x, nullptr), down(x, nullptr)); };
  for (double cand : {lo, hi, 0.5 * (lo + hi)}) {
    if (g(cand) < g(a)) a = cand;
  }
  const double m = g(a);
  if (c0 > m) {
    double alo = -std::numeric_limits<double>::infinity(), ahi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
      alo = std::max(alo, t[i] - c0 / w[i]);
      ahi = std::min(ahi, t[i] + c0 / w[i]);
    }
    out.lo = alo;
    out.hi = ahi;
    out.value = c0;
  } else {
    out.lo = out.hi = a;
    out.value = m;
  }
  return out;
}

double sup_deviation(std::span<const double> v, std::span<const double> y, double a) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i] - a * y[i]));
  return m;
}

// Minimizer over a half-line {sign * a >= 0} of max_i |v_i - a y_i|.
LineMinimax half_line_minimax(std::span<const double> v, std::span<const double> y, double sign) {
  const IntervalMinimax im = interval_minimax(v, y);
  LineMinimax out;
  if (im.empty_lines) {
    out.value = im.value;
    return out;
  }
  double lo = sign > 0 ? std::max(im.lo, 0.0) : im.lo;
  double hi = sign > 0 ? im.hi : std::min(im.hi, 0.0);
  out.a = lo <= hi ? 0.5 * (lo + hi) : 0.0;
  out.value = lo <= hi ? im.value : sup_deviation(v, y, 0.0);
  if (lo <= hi && lo != hi) out.value = sup_deviation(v, y, out.a);
  return out;
}

PolyJet linear_jet(double a) {
  PolyJet p;
  p.degree = 1;
  p.c1 = {0.0, a};
  return p;
}

PolyJet mixed_jet(double b1n, double bnn) {
  PolyJet p;
  p.degree = 2;
  p.c2 = SymMatrix(0.0, 0.5 * b1n, bnn);
  return p;
}

void transform(GridFunction& u, const std::function<double(Vec2)>& delta) {
  const Grid& g = *u.grid;
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += delta(g.nodes[i]);
  for (std::size_t s = 0; s < u.boundary.size(); ++s) {
    if (g.arms[s].cut()) u.boundary[s] += delta(g.arms[s].foot);
  }
}

}  // namespace

void IterationConfig::validate(double h) const {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (k_max < 0) throw ConfigError("k_max must be >= 0");
  if (!(r_ceiling > 0.0)) throw ConfigError("r_ceiling must be positive");
  const double floor = effective_floor(*this, h);
  if (floor < 4.0 * h * (1.0 - 1e-12)) throw ConfigError("r_floor must be >= 4h");
  if (k_max > 0 && std::pow(eta, k_max) < floor * (1.0 - 1e-12))
    throw ConfigError("eta^k_max falls below r_floor");
}

std::vector<double> IterationConfig::scales(double h) const {
  validate(h);
  const double floor = effective_floor(*this, h);
  std::vector<double> out;
  for (int k = 0; k <= effective_kmax(*this, h); ++k) {
    const double r = std::pow(eta, k);
    if (r <= r_ceiling * (1.0 + 1e-12) && r >= floor * (1.0 - 1e-12)) out.push_back(r);
  }
  return out;
}

LineMinimax line_minimax(std::span<const double> v, std::span<const double> y) {
  if (v.size() != y.size()) throw InputError("line_minimax needs matching spans");
  const IntervalMinimax im = interval_minimax(v, y);
  LineMinimax out;
  out.value = im.value;
  out.a = im.empty_lines ? 0.0 : 0.5 * (im.lo + im.hi);
  return out;
}

C1aResult campanato_c1a(const GridFunction& u, const Domain& domain, const IterationConfig& cfg) {
  (void)domain;
  const Grid& g = *u.grid;
  C1aResult res;
  const auto scales = cfg.scales(g.h);
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double r = scales[s];
    const Window w = window(g, r);
    if (w.nodes.empty()) continue;
    std::vector<double> v, y;
    for (std::size_t i : w.nodes) {
      v.push_back(u.values[i]);
      y.push_back(g.nodes[i].x2);
    }
    const LineMinimax lm = line_minimax(v, y);
    res.trace.k.push_back(static_cast<int>(std::lround(std::log(r) / std::log(cfg.eta))));
    res.trace.scales.push_back(r);
    res.trace.coeffs.push_back(linear_jet(lm.a));
    res.trace.residuals.push_back(lm.value);
    res.trace.constraint_residuals.push_back(0.0);
    res.a.push_back(lm.a);
  }
  if (res.trace.size() < 3) throw NumericalError("fewer than 3 usable scales");
  res.Du0 = {0.0, res.a.back()};
  return res;
}

C2aResult campanato_c2a(const GridFunction& u, const Domain& domain, const OperatorSpec& op,
                        const IterationConfig& cfg) {
  (void)domain;
  const Grid& g = *u.grid;
  const auto scales = cfg.scales(g.h);
  const double rec_tol = 1e-12;
  const auto tau = [&](double b) {
    return 0.5 * solve_recession_constant(op, SymMatrix(0.0, b, 0.0), rec_tol);
  };
  const bool homogeneous = op.positively_homogeneous();
  const double tau_pos = homogeneous ? tau(1.0) : 0.0;
  const double tau_neg = homogeneous ? tau(-1.0) : 0.0;

  C2aResult res;
  for (double r : scales) {
    const Window w = window(g, r);
    if (w.nodes.empty()) continue;
    std::vector<double> v, xy, yy;
    double vmax = 0.0;
    for (std::size_t i : w.nodes) {
      v.push_back(u.values[i]);
      xy.push_back(g.nodes[i].x1 * g.nodes[i].x2);
      yy.push_back(g.nodes[i].x2 * g.nodes[i].x2);
      vmax = std::max(vmax, std::abs(v.back()));
    }
    double b = 0.0, bnn = 0.0, value = 0.0;
    if (homogeneous) {
      std::vector<double> yp(v.size()), yn(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        yp[i] = xy[i] + tau_pos * yy[i];
        yn[i] = xy[i] - tau_neg * yy[i];
      }
      const LineMinimax p = half_line_minimax(v, yp, 1.0);
      const LineMinimax n = half_line_minimax(v, yn, -1.0);
      if (n.value < p.value) {
        b = n.a;
        bnn = -n.a * tau_neg;
        value = n.value;
      } else {
        b = p.a;
        bnn = p.a * tau_pos;
        value = p.value;
      }
    } else {
      const auto G = [&](double bb, double* tt) {
        const double t = tau(bb);
        if (tt) *tt = t;
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i] - bb * xy[i] - t * yy[i]));
        return m;
      };
      const double bm = 8.0 * vmax / (r * r) + 1e-12;
      const int n_scan = 40;
      int best = 0;
      double best_v = std::numeric_limits<double>::infinity();
      for (int s = 0; s <= n_scan; ++s) {
        const double bb = -bm + 2.0 * bm * s / n_scan;
        const double gv = G(bb, nullptr);
        if (gv < best_v) {
          best_v = gv;
          best = s;
        }
      }
      double lo = -bm + 2.0 * bm * std::max(0, best - 1) / n_scan;
      double hi = -bm + 2.0 * bm * std::min(n_scan, best + 1) / n_scan;
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      double f1 = G(x1, nullptr), f2 = G(x2, nullptr);
      for (int it = 0; it < 100 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = G(x1, nullptr);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = G(x2, nullptr);
        }
      }
      b = f1 <= f2 ? x1 : x2;
      double t = 0.0;
      value = G(b, &t);
      bnn = t;
    }
    const PolyJet jet = mixed_jet(b, bnn);
    res.trace.k.push_back(static_cast<int>(std::lround(std::log(r) / std::log(cfg.eta))));
    res.trace.scales.push_back(r);
    res.trace.coeffs.push_back(jet);
    res.trace.residuals.push_back(value);
    res.trace.constraint_residuals.push_back(std::abs(op(jet.hessian())));
    res.b1n.push_back(b);
    res.bnn.push_back(bnn);
  }
  if (res.trace.size() < 3) throw NumericalError("fewer than 3 usable scales");
  res.D2u0_mixed = {res.b1n.back(), res.bnn.back()};
  double umax = 0.0;
  for (double x : u.values) umax = std::max(umax, std::abs(x));
  const RateReport rate = rate_fit(res.trace.scales, res.trace.residuals, 1e-13 * umax);
  res.residual_slope = rate.slope;
  res.precondition_violated = !rate.exact && rate.slope < 1.5;
  return res;
}

double rescaling_defect(const GridFunction& u, const C1aResult& fit, const IterationConfig& cfg) {
  const Grid& g = *u.grid;
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < fit.trace.size(); ++k) {
    const double r = fit.trace.scales[k];
    const double next = fit.trace.scales[k + 1];
    if (std::abs(next - cfg.eta * r) > 1e-12 * r) continue;
    const double a = fit.a[k];
    const double scale = std::pow(r, 1.0 + cfg.alpha);
    std::vector<double> v, y;
    for (std::size_t i : window(g, next).nodes) {
      const Vec2 yv = (1.0 / r) * g.nodes[i];
      v.push_back((u.values[i] - a * r * yv.x2) / scale);
      y.push_back(yv.x2);
    }
    const double got = line_minimax(v, y).a;
    const double want = (fit.a[k + 1] - a) / std::pow(r, cfg.alpha);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return worst;
}

CauchyReport cauchy_report(std::span<const double> coeffs, std::span<const double> scales, double alpha) {
  CauchyReport rep;
  std::vector<double> xs, ys;
  double prev = 0.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    const double d = std::abs(coeffs[k] - coeffs[k - 1]);
    rep.fitted_C = std::max(rep.fitted_C, d / std::pow(scales[k], alpha));
    if (k >= 2 && prev > 0.0) rep.max_ratio = std::max(rep.max_ratio, d / prev);
    prev = d;
    if (d > 0.0) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(d));
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    rep.decay_ratio = std::exp(sxy / sxx);
  }
  return rep;
}

NormalizedProblem normalize_problem(const GridFunction& u, const PolyJet& g_jet, double f0, const OperatorSpec& op,
                                    const BoundaryChart& chart, double du0_normal) {
  const double a = chart.tangential_matrix();
  const double c = du0_normal;
  const OperatorSpec f2 = OperatorSpec::translated(op, g_jet.hessian(), f0);
  const OperatorSpec f3 = OperatorSpec::translated(f2, -2.0 * c * SymMatrix::diag(a, 0.0), 0.0);
  const double f3_0 = f3(SymMatrix{});
  // F3 is evaluated through two translations; its roundoff floor scales with them.
  const double magnitude = 1.0 + std::abs(f0) + g_jet.hessian().spectral_norm() + 2.0 * std::abs(c * a);
  const double s = solve_recession_constant(f3, SymMatrix{}, 1e-12 * magnitude);
  const double t = -0.5 * s;
  if (std::abs(t) > std::abs(f3_0) / op.lambda() + 1e-10)
    throw NumericalError("recession shift violates |t| <= |F3(0)|/lambda", std::abs(t));

  NormalizedProblem out{u, OperatorSpec::translated(f3, -2.0 * t * SymMatrix::delta_nn(), 0.0), f3, t, f3_0, 0.0};
  transform(out.u3, [&](Vec2 x) { return -g_jet(x) - c * (x.x2 - a * x.x1 * x.x1) + t * x.x2 * x.x2; });

  const Grid& g = *u.grid;
  for (std::size_t s2 = 0; s2 < g.arms.size(); ++s2) {
    const Arm& arm = g.arms[s2];
    if (!arm.cut() || arm.piece < 0) continue;
    const double r = arm.foot.norm();
    if (r < 1e-12 || r > 1.0) continue;
    out.g3_bound = std::max(out.g3_bound, std::abs(out.u3.boundary[s2]) / std::pow(r, 2.0 + chart.alpha));
  }
  return out;
}

NormalizedProblem normalize_with_refinement(const GridFunction& u, const PolyJet& g_jet, double f0,
                                            const OperatorSpec& op, const BoundaryChart& chart, const Domain& domain,
                                            const IterationConfig& cfg, double tol, double* du0_out) {
  GridFunction u1 = u;
  transform(u1, [&](Vec2 x) { return -g_jet(x); });
  const auto phi = [&](double c, NormalizedProblem* keep) {
    NormalizedProblem np = normalize_problem(u, g_jet, f0, op, chart, c);
    const double d = campanato_c1a(np.u3, domain, cfg).Du0.x2;
    if (keep) *keep = std::move(np);
    return d;
  };
  NormalizedProblem best;
  double c0 = campanato_c1a(u1, domain, cfg).Du0.x2;
  double p0 = phi(c0, &best);
  double c1 = c0 + p0;
  NormalizedProblem cand = best;
  double p1 = phi(c1, &cand);
  double best_abs = std::abs(p0);
  if (std::abs(p1) < best_abs) {
    best = cand;
    best_abs = std::abs(p1);
  }
  for (int it = 0; it < 40 && best_abs > tol; ++it) {
    if (p1 == p0) break;
    const double c2 = c1 - p1 * (c1 - c0) / (p1 - p0);
    c0 = c1;
    p0 = p1;
    c1 = c2;
    p1 = phi(c1, &cand);
    if (std::abs(p1) < best_abs) {
      best = cand;
      best_abs = std::abs(p1);
    }
  }
  if (du0_out) *du0_out = best_abs;
  return best;
}

LocalizationData LocalizationData::standard(double delta) {
  LocalizationData d;
  d.f = delta;
  d.g_inner = [delta](Vec2 x) { return delta * (0.5 + 0.5 * std::cos(5.0 * x.x1)); };
  d.g_outer = [](Vec2) { return 1.0; };
  return d;
}

LocalizationReport localization_experiment(const OperatorSpec& op, const Domain& domain, double delta, double h,
                                           const LocalizationData& data) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  const auto grid = build_grid(domain, h, 1.0, data.n_dirs);
  const auto sys = discretize(op, grid, op.kind() == OperatorKind::laplace ? 4 : data.n_dirs);
  const std::vector<double> f(grid->num_nodes(), data.f);
  auto bnd = boundary_values(*grid, [&](Vec2 p, int piece) { return piece < 0 ? data.g_outer(p) : data.g_inner(p); });
  const GridFunction u = solve(sys, f, std::move(bnd));
  LocalizationReport rep;
  rep.sup_u_on_Omega_delta = u.sup_norm(delta);
  rep.fitted_C = rep.sup_u_on_Omega_delta / delta;
  rep.osc = osc_boundary(domain, 1.0);
  rep.nodes = grid->num_nodes();
  return rep;
}

double modulus_probe(const GridFunction& u, Vec2 center, double radius, double separation) {
  const Grid& g = *u.grid;
  const int reach = static_cast<int>(std::floor(separation / g.h + 1e-9));
  const auto in_region = [&](std::size_t i) {
    const Vec2 d = g.nodes[i] - center;
    return d.dot(d) < radius * radius;
  };
  const int side = 2 * g.half_width + 1;
  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (!in_region(i)) continue;
    const auto [li, lj] = g.lattice[i];
    for (int dj = 0; dj <= reach; ++dj) {
      for (int di = -reach; di <= reach; ++di) {
        if (dj == 0 && di <= 0) continue;
        if ((di * di + dj * dj) * g.h * g.h > separation * separation * (1.0 + 1e-12)) continue;
        const int ni = li + di, nj = lj + dj;
        if (ni < -g.half_width || ni > g.half_width || nj > g.half_width) continue;
        const int nb = g.index[static_cast<std::size_t>(nj + g.half_width) * side + (ni + g.half_width)];
        if (nb < 0 || !in_region(nb)) continue;
        any = true;
        worst = std::max(worst, std::abs(u.values[i] - u.values[nb]));
      }
    }
  }
  if (!any) throw InputError("no node pairs within the separation");
  return worst;
}

MembershipReport viscosity_membership(const GridFunction& u, std::span<const double> f, double lambda,
                                      double Lambda, double tol, int n_dirs) {
  if (f.size() != u.values.size()) throw InputError("membership needs f on the grid of u");
  const auto plus = discretize(OperatorSpec::pucci_plus(lambda, Lambda), u.grid, n_dirs);
  const auto minus = discretize(OperatorSpec::pucci_minus(lambda, Lambda), u.grid, n_dirs);
  const auto mp = apply_operator(plus, u);
  const auto mm = apply_operator(minus, u);
  MembershipReport rep;
  rep.worst_sub = std::numeric_limits<double>::infinity();
  rep.worst_super = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    rep.worst_sub = std::min(rep.worst_sub, plus.row_scale[i] * (mp[i] - f[i]));
    rep.worst_super = std::max(rep.worst_super, minus.row_scale[i] * (mm[i] - f[i]));
  }
  rep.sub = rep.worst_sub >= -tol;
  rep.super = rep.worst_super <= tol;
  return rep;
}

RateReport rate_fit(std::span<const double> scales, std::span<const double> residuals, double zero_tol) {
  if (scales.size() != residuals.size()) throw InputError("rate_fit needs matching spans");
  std::vector<double> x, y;
  RateReport rep;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw InputError("scales must be positive");
    if (residuals[i] > zero_tol) {
      x.push_back(std::log(scales[i]));
      y.push_back(std::log(residuals[i]));
    } else {
      ++rep.zeros_excluded;
    }
  }
  rep.used = static_cast<int>(x.size());
  if (x.empty()) {
    rep.exact = true;
    rep.slope = std::numeric_limits<double>::infinity();
    rep.r2 = 1.0;
    rep.r1 = scales.empty() ? 0.0 : *std::max_element(scales.begin(), scales.end());
    return rep;
  }
  if (x.size() < 3) throw InputError("rate_fit needs at least 3 positive residuals");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InputError("rate_fit needs distinct scales");
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (rep.intercept + rep.slope * x[i]);
    ss_res += e * e;
  }
  rep.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  rep.fitted_C = std::exp(rep.intercept);

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  for (std::size_t i : order) {
    if (std::abs(y[i] - (rep.intercept + rep.slope * x[i])) > std::log(2.0)) break;
    rep.r1 = std::exp(x[i]);
  }
  return rep;
}

}  // namespace regulab
