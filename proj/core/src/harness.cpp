#include "regulab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "regulab/errors.hpp"

namespace regulab {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Rethrows the active exception with a stage prefix, keeping its type.
[[noreturn]] void rethrow_tagged(const std::string& stage) {
  const std::string tag = "[" + stage + "] ";
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const InputError& e) {
    throw InputError(tag + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what(), e.residual());
  } catch (const std::exception& e) {
    throw NumericalError(tag + e.what());
  }
}

template <class F>
auto staged(const std::string& stage, F&& fn) {
  try {
    return fn();
  } catch (...) {
    rethrow_tagged(stage);
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

PolySpec poly_from_json(const json& j, const std::string& where) {
  check_keys(j, {"c0", "c1", "c2", "cubic", "holder"}, where);
  PolySpec p;
  p.c0 = j.value("c0", 0.0);
  if (j.contains("c1")) {
    const auto v = j.at("c1").get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(where + ".c1 needs 2 entries");
    p.c1 = {v[0], v[1]};
  }
  if (j.contains("c2")) {
    const auto m = j.at("c2").get<std::vector<std::vector<double>>>();
    if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2) throw ConfigError(where + ".c2 must be 2x2");
    p.c2 = SymMatrix::from_rows(m[0][0], m[0][1], m[1][0], m[1][1]);
  }
  if (j.contains("cubic")) {
    const auto v = j.at("cubic").get<std::vector<double>>();
    if (v.size() != 4) throw ConfigError(where + ".cubic needs 4 entries");
    std::copy(v.begin(), v.end(), p.cubic.begin());
  }
  if (j.contains("holder")) {
    const json& h = j.at("holder");
    check_keys(h, {"amplitude", "exponent"}, where + ".holder");
    p.holder_amplitude = h.value("amplitude", 0.0);
    p.holder_exponent = h.value("exponent", 2.5);
  }
  return p;
}

json poly_to_json(const PolySpec& p) {
  json j;
  j["c0"] = p.c0;
  j["c1"] = {p.c1.x1, p.c1.x2};
  j["c2"] = {{p.c2.a11(), p.c2.a12()}, {p.c2.a12(), p.c2.a22()}};
  j["cubic"] = p.cubic;
  j["holder"] = {{"amplitude", p.holder_amplitude}, {"exponent", p.holder_exponent}};
  return j;
}

json jet_to_json(const PolyJet& p) {
  return {{"c0", p.c0},
          {"c1", {p.c1.x1, p.c1.x2}},
          {"c2", {{p.c2.a11(), p.c2.a12()}, {p.c2.a12(), p.c2.a22()}}}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json rate_to_json(const RateReport& r) {
  return {{"slope", number_or_null(r.slope)}, {"intercept", r.intercept}, {"r2", r.r2},   {"fitted_C", r.fitted_C},
          {"r1", r.r1},                       {"exact", r.exact},         {"used", r.used}, {"zeros_excluded", r.zeros_excluded}};
}

json cauchy_to_json(const CauchyReport& c) {
  return {{"fitted_C", c.fitted_C}, {"decay_ratio", c.decay_ratio}, {"max_ratio", c.max_ratio}};
}

double umax(const GridFunction& u) { return std::max(1.0, u.sup_norm()); }

}  // namespace

double PolySpec::operator()(Vec2 x) const {
  const double x1 = x.x1, x2 = x.x2;
  double v = c0 + c1.dot(x) + c2.quad(x);
  v += cubic[0] * x1 * x1 * x1 + cubic[1] * x1 * x1 * x2 + cubic[2] * x1 * x2 * x2 + cubic[3] * x2 * x2 * x2;
  if (holder_amplitude != 0.0) v += holder_amplitude * x2 * std::pow(x.norm(), holder_exponent - 1.0);
  return v;
}

SymMatrix PolySpec::hessian(Vec2 x) const {
  const double x1 = x.x1, x2 = x.x2;
  SymMatrix h = 2.0 * c2;
  h = h + SymMatrix(6.0 * cubic[0] * x1 + 2.0 * cubic[1] * x2, 2.0 * cubic[1] * x1 + 2.0 * cubic[2] * x2,
                    2.0 * cubic[2] * x1 + 6.0 * cubic[3] * x2);
  const double r = x.norm();
  if (holder_amplitude != 0.0 && r > 0.0) {
    // D^2 of x2 r^q.
    const double q = holder_exponent - 1.0;
    const double a = std::pow(r, q - 2.0), b = (q - 2.0) * std::pow(r, q - 4.0);
    const double h11 = x2 * q * (a + b * x1 * x1);
    const double h12 = q * a * x1 + x2 * q * b * x1 * x2;
    const double h22 = 2.0 * q * a * x2 + x2 * q * (a + b * x2 * x2);
    h = h + holder_amplitude * SymMatrix(h11, h12, h22);
  }
  return h;
}

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  if (name.empty()) throw ConfigError("name must not be empty");
  (void)make_operator(op_tag, lambda, Lambda);
  (void)make_domain(domain, domain_params);
  if (!(grid.h > 0.0) || !(grid.R > 0.0) || grid.h > grid.R / 8.0) throw ConfigError("grid needs 0 < h <= R/8");
  if (grid.n_dirs < 4 || grid.n_dirs % 4 != 0) throw ConfigError("n_dirs must be a positive multiple of 4");
  iteration.validate(grid.h);
  for (const auto& a : analyzers) {
    if (a != "c1a" && a != "c2a") throw ConfigError("unknown analyzer '" + a + "'");
  }
  if (!std::isfinite(data.scale)) throw ConfigError("data.scale must be finite");
}

ExperimentConfig ExperimentConfig::scaled(double c) const {
  ExperimentConfig out = *this;
  out.data.scale *= c;
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  try {
    const json j = json::parse(text);
    check_keys(j, {"schema_version", "name", "operator", "domain", "data", "grid", "iteration", "analyzers", "seed",
                   "outputs"},
               "config");
    ExperimentConfig cfg;
    if (!j.contains("schema_version")) throw ConfigError("config lacks schema_version");
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != ExperimentConfig::kSchemaVersion)
      throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
    cfg.name = j.value("name", cfg.name);

    const json& op = j.at("operator");
    check_keys(op, {"tag", "lambda", "Lambda"}, "operator");
    cfg.op_tag = op.at("tag").get<std::string>();
    cfg.lambda = op.value("lambda", 1.0);
    cfg.Lambda = op.value("Lambda", cfg.lambda);

    const json& dom = j.at("domain");
    check_keys(dom, {"kind", "params"}, "domain");
    cfg.domain = domain_kind_from_string(dom.at("kind").get<std::string>());
    cfg.domain_params = dom.value("params", std::vector<double>{});

    if (j.contains("data")) {
      const json& d = j.at("data");
      check_keys(d, {"g", "g_outer", "f", "scale"}, "data");
      if (d.contains("g")) cfg.data.g = poly_from_json(d.at("g"), "data.g");
      if (d.contains("g_outer") && !d.at("g_outer").is_null())
        cfg.data.g_outer = poly_from_json(d.at("g_outer"), "data.g_outer");
      if (d.contains("f")) {
        const json& f = d.at("f");
        check_keys(f, {"constant", "K_f", "exponent", "manufactured"}, "data.f");
        cfg.data.f.constant = f.value("constant", 0.0);
        cfg.data.f.K_f = f.value("K_f", 0.0);
        cfg.data.f.exponent = f.value("exponent", 1.0);
        cfg.data.f.manufactured = f.value("manufactured", false);
      }
      cfg.data.scale = d.value("scale", 1.0);
    }

    const json& g = j.at("grid");
    check_keys(g, {"h", "R", "n_dirs"}, "grid");
    cfg.grid.h = g.at("h").get<double>();
    cfg.grid.R = g.value("R", 1.0);
    cfg.grid.n_dirs = g.value("n_dirs", 16);

    if (j.contains("iteration")) {
      const json& it = j.at("iteration");
      check_keys(it, {"eta", "alpha", "k_max", "r_floor", "r_ceiling"}, "iteration");
      cfg.iteration.eta = it.value("eta", 0.5);
      cfg.iteration.alpha = it.value("alpha", 0.5);
      cfg.iteration.k_max = it.value("k_max", 0);
      cfg.iteration.r_floor = it.value("r_floor", 0.0);
      cfg.iteration.r_ceiling = it.value("r_ceiling", 1.0);
    }
    if (j.contains("analyzers")) cfg.analyzers = j.at("analyzers").get<std::vector<std::string>>();
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.outputs = j.value("outputs", cfg.outputs);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["name"] = cfg.name;
  j["operator"] = {{"tag", cfg.op_tag}, {"lambda", cfg.lambda}, {"Lambda", cfg.Lambda}};
  j["domain"] = {{"kind", to_string(cfg.domain)}, {"params", cfg.domain_params}};
  json d;
  d["g"] = poly_to_json(cfg.data.g);
  if (cfg.data.g_outer) d["g_outer"] = poly_to_json(*cfg.data.g_outer);
  d["f"] = {{"constant", cfg.data.f.constant},
            {"K_f", cfg.data.f.K_f},
            {"exponent", cfg.data.f.exponent},
            {"manufactured", cfg.data.f.manufactured}};
  d["scale"] = cfg.data.scale;
  j["data"] = d;
  j["grid"] = {{"h", cfg.grid.h}, {"R", cfg.grid.R}, {"n_dirs", cfg.grid.n_dirs}};
  j["iteration"] = {{"eta", cfg.iteration.eta},
                    {"alpha", cfg.iteration.alpha},
                    {"k_max", cfg.iteration.k_max},
                    {"r_floor", cfg.iteration.r_floor},
                    {"r_ceiling", cfg.iteration.r_ceiling}};
  j["analyzers"] = cfg.analyzers;
  j["seed"] = cfg.seed;
  j["outputs"] = cfg.outputs;
  return j.dump(2) + "\n";
}

ExperimentResult execute(const ExperimentConfig& cfg) {
  staged("config", [&] {
    cfg.validate();
    return 0;
  });
  ExperimentResult res;
  res.config = cfg;
  const Domain domain = staged("domain", [&] { return make_domain(cfg.domain, cfg.domain_params); });
  const OperatorSpec op = staged("operator", [&] { return make_operator(cfg.op_tag, cfg.lambda, cfg.Lambda); });
  res.grid = staged("grid", [&] { return build_grid(domain, cfg.grid.h, cfg.grid.R, cfg.grid.n_dirs); });

  const double c = cfg.data.scale;
  const PolySpec& g = cfg.data.g;
  const PolySpec& g_out = cfg.data.g_outer ? *cfg.data.g_outer : cfg.data.g;
  res.u = staged("solve", [&] {
    const auto sys = discretize(op, res.grid, cfg.grid.n_dirs);
    res.f.grid = res.grid;
    res.f.values.resize(res.grid->num_nodes());
    for (std::size_t i = 0; i < res.f.values.size(); ++i) {
      const Vec2 x = res.grid->nodes[i];
      res.f.values[i] = cfg.data.f.manufactured
                            ? op(c * g.hessian(x))
                            : c * (cfg.data.f.constant + cfg.data.f.K_f * std::pow(x.norm(), cfg.data.f.exponent));
    }
    auto bnd = boundary_values(*res.grid, [&](Vec2 p, int piece) { return c * (piece < 0 ? g_out(p) : g(p)); });
    return solve(sys, res.f.values, std::move(bnd), {}, &res.solve);
  });

  staged("analysis", [&] {
    const double zero_tol = 1e-12 * umax(res.u);
    for (const auto& a : cfg.analyzers) {
      if (a == "c1a") {
        res.c1a = campanato_c1a(res.u, domain, cfg.iteration);
        res.c1a_rate = rate_fit(res.c1a->trace.scales, res.c1a->trace.residuals, zero_tol);
        res.c1a_cauchy = cauchy_report(res.c1a->a, res.c1a->trace.scales, cfg.iteration.alpha);
        res.rescaling_defect = rescaling_defect(res.u, *res.c1a, cfg.iteration);
      } else if (a == "c2a") {
        res.c2a = campanato_c2a(res.u, domain, op, cfg.iteration);
        res.c2a_rate = rate_fit(res.c2a->trace.scales, res.c2a->trace.residuals, zero_tol);
        res.c2a_cauchy = cauchy_report(res.c2a->b1n, res.c2a->trace.scales, cfg.iteration.alpha);
      }
    }
    return 0;
  });
  return res;
}

std::string summary_json(const ExperimentResult& res) {
  const Grid& g = *res.grid;
  json j;
  j["name"] = res.config.name;
  j["schema_version"] = res.config.schema_version;
  j["operator"] = res.config.op_tag;
  j["domain"] = to_string(res.config.domain);
  j["grid"] = {{"h", g.h},
               {"R", g.R},
               {"n_dirs", res.config.grid.n_dirs},
               {"interior", g.num_nodes()},
               {"boundary_adjacent", g.boundary_adjacent_count()},
               {"exterior", g.exterior_count()}};
  j["solve"] = {{"residual", res.solve.residual}, {"linear_solves", res.solve.linear_solves}};
  if (res.c1a) {
    json c;
    c["Du0"] = {res.c1a->Du0.x1, res.c1a->Du0.x2};
    c["a"] = res.c1a->a;
    c["rate"] = rate_to_json(*res.c1a_rate);
    c["cauchy"] = cauchy_to_json(*res.c1a_cauchy);
    c["rescaling_defect"] = res.rescaling_defect;
    j["c1a"] = c;
  }
  if (res.c2a) {
    json c;
    c["D2u0_mixed"] = {res.c2a->D2u0_mixed.x1, res.c2a->D2u0_mixed.x2};
    c["b1n"] = res.c2a->b1n;
    c["bnn"] = res.c2a->bnn;
    c["jet"] = jet_to_json(res.c2a->trace.coeffs.back());
    c["rate"] = rate_to_json(*res.c2a_rate);
    c["cauchy"] = cauchy_to_json(*res.c2a_cauchy);
    c["precondition_violated"] = res.c2a->precondition_violated;
    double worst = 0.0;
    for (double v : res.c2a->trace.constraint_residuals) worst = std::max(worst, v);
    c["max_constraint_residual"] = worst;
    j["c2a"] = c;
  }
  return j.dump(2) + "\n";
}

std::string trace_csv(const ExperimentResult& res) {
  const JetTrace* t = res.c2a ? &res.c2a->trace : res.c1a ? &res.c1a->trace : nullptr;
  std::string out = "k,scale,c0,c1_x1,c1_x2,c2_11,c2_12,c2_22,residual,constraint_residual\n";
  if (!t) return out;
  for (std::size_t i = 0; i < t->size(); ++i) {
    const PolyJet& p = t->coeffs[i];
    out += std::to_string(t->k[i]);
    for (double v : {t->scales[i], p.c0, p.c1.x1, p.c1.x2, p.c2.a11(), p.c2.a12(), p.c2.a22(), t->residuals[i],
                     t->constraint_residuals[i]})
      out += "," + fmt(v);
    out += "\n";
  }
  return out;
}

std::string rates_svg(const ExperimentResult& res) {
  struct Series {
    std::string label;
    const JetTrace* trace;
    const RateReport* rate;
    const char* color;
  };
  std::vector<Series> series;
  if (res.c1a) series.push_back({"C1a: |u - a x2|", &res.c1a->trace, &*res.c1a_rate, "#1f77b4"});
  if (res.c2a) series.push_back({"C2a: |u - P|", &res.c2a->trace, &*res.c2a_rate, "#d62728"});

  const double W = 480, H = 360, L = 60, B = 40, T = 30, Rm = 20;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.trace->size(); ++i) {
      if (!(s.trace->residuals[i] > 0.0)) continue;
      xmin = std::min(xmin, std::log10(s.trace->scales[i]));
      xmax = std::max(xmax, std::log10(s.trace->scales[i]));
      ymin = std::min(ymin, std::log10(s.trace->residuals[i]));
      ymax = std::max(ymax, std::log10(s.trace->residuals[i]));
    }
  }
  if (xmin > xmax) xmin = -2, xmax = 0, ymin = -16, ymax = 0;
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  const auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - Rm); };
  const auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - B - T); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
  s += "<!-- data: series,scale,residual\n";
  for (const auto& se : series) {
    for (std::size_t i = 0; i < se.trace->size(); ++i)
      s += se.label + "," + fmt(se.trace->scales[i]) + "," + fmt(se.trace->residuals[i]) + "\n";
  }
  s += "-->\n";
  s += "<rect x=\"0\" y=\"0\" width=\"480\" height=\"360\" fill=\"white\"/>\n";
  s += "<text x=\"240\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
       res.config.name + "</text>\n";
  s += "<line x1=\"" + fmt(L, "%.2f") + "\" y1=\"" + fmt(H - B, "%.2f") + "\" x2=\"" + fmt(W - Rm, "%.2f") +
       "\" y2=\"" + fmt(H - B, "%.2f") + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(L, "%.2f") + "\" y1=\"" + fmt(T, "%.2f") + "\" x2=\"" + fmt(L, "%.2f") + "\" y2=\"" +
       fmt(H - B, "%.2f") + "\" stroke=\"black\"/>\n";
  s += "<text x=\"240\" y=\"352\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">log10 r</text>\n";
  s += "<text x=\"14\" y=\"180\" transform=\"rotate(-90 14 180)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"11\">log10 residual</text>\n";
  int row = 0;
  for (const auto& se : series) {
    std::string pts;
    for (std::size_t i = 0; i < se.trace->size(); ++i) {
      if (!(se.trace->residuals[i] > 0.0)) continue;
      const double x = px(std::log10(se.trace->scales[i])), y = py(std::log10(se.trace->residuals[i]));
      s += "<circle cx=\"" + fmt(x, "%.2f") + "\" cy=\"" + fmt(y, "%.2f") + "\" r=\"3\" fill=\"" + se.color + "\"/>\n";
    }
    if (!se.rate->exact) {
      const double l10 = std::log(10.0);
      const auto fit = [&](double lx) { return (se.rate->intercept + se.rate->slope * lx * l10) / l10; };
      pts = fmt(px(xmin), "%.2f") + "," + fmt(py(fit(xmin)), "%.2f") + " " + fmt(px(xmax), "%.2f") + "," +
            fmt(py(fit(xmax)), "%.2f");
      s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + se.color + "\" stroke-dasharray=\"4 3\"/>\n";
    }
    const std::string slope = se.rate->exact ? "exact" : "slope " + fmt(se.rate->slope, "%.3f");
    s += "<text x=\"" + fmt(L + 10, "%.2f") + "\" y=\"" + fmt(T + 14 + 14 * row, "%.2f") +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + se.color + "\">" + se.label + " (" + slope +
         ")</text>\n";
    ++row;
  }
  s += "</svg>\n";
  return s;
}

std::string field_csv(const GridFunction& u) {
  std::string out = "x1,x2,value\n";
  for (std::size_t i = 0; i < u.values.size(); ++i)
    out += fmt(u.grid->nodes[i].x1) + "," + fmt(u.grid->nodes[i].x2) + "," + fmt(u.values[i]) + "\n";
  return out;
}

std::string grid_json(const Grid& grid) {
  json j = {{"h", grid.h},
            {"R", grid.R},
            {"counts",
             {{"interior", grid.num_nodes()},
              {"boundary_adjacent", grid.boundary_adjacent_count()},
              {"exterior", grid.exterior_count()}}}};
  return j.dump(2) + "\n";
}

std::string run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const ExperimentResult res = execute(cfg);
  const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.outputs) : out_dir;
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(dir);
    const std::string summary = summary_json(res);
    const std::pair<const char*, std::string> files[] = {
        {"trace.csv", trace_csv(res)}, {"summary.json", summary}, {"rates.svg", rates_svg(res)}};
    for (const auto& [name, text] : files) {
      const auto path = dir / name;
      std::ofstream out(path, std::ios::binary);
      written.push_back(path);
      out << text;
      if (!out) throw NumericalError("cannot write " + path.string());
    }
    return summary;
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    rethrow_tagged("output");
  }
}

}  // namespace regulab
