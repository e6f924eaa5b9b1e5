// Command-line front end: solve, classify, rates, barrier, suite, selftest.
//
// Exit codes: 0 ok, 1 numerical failure (or a failing suite/selftest),
// 2 usage or configuration error.
#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "json.hpp"
#include "regulab/acceptance.hpp"
#include "regulab/errors.hpp"
#include "regulab/harness.hpp"
#include "regulab/pointwise.hpp"
#include "regulab/regularity.hpp"
#include "regulab/solver.hpp"

namespace fs = std::filesystem;
using namespace regulab;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw NumericalError("cannot write " + path.string());
}

ExperimentConfig load_checked(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  return load_config(path);
}

int cmd_solve(const std::string& config, const std::string& out) {
  ExperimentConfig cfg = load_checked(config);
  cfg.analyzers.clear();
  const fs::path dir = out.empty() ? fs::path(cfg.outputs) : fs::path(out);
  const ExperimentResult res = execute(cfg);
  fs::create_directories(dir);
  write_file(dir / "field.csv", field_csv(res.u));
  write_file(dir / "grid.json", grid_json(*res.grid));
  std::printf("%s: %zu nodes, residual %.3e, %d linear solves -> %s\n", cfg.name.c_str(), res.u.values.size(),
              res.solve.residual, res.solve.linear_solves, dir.string().c_str());
  return 0;
}

int cmd_classify(const std::string& domain, int k, double alpha, const std::vector<double>& params, int samples) {
  const Domain dom = make_domain(domain_kind_from_string(domain), params);
  const BoundaryChart chart = classify_boundary(dom, k, alpha, samples);
  nlohmann::ordered_json j;
  j["domain"] = domain;
  j["k"] = chart.k;
  j["alpha"] = chart.alpha;
  j["rotation"] = chart.rotation;
  j["coeffs"] = nlohmann::ordered_json::object();
  if (chart.k == 2) j["coeffs"]["x1^2"] = chart.P.c2.a11();
  j["K"] = std::isfinite(chart.K) ? nlohmann::ordered_json(chart.K) : nlohmann::ordered_json("inf");
  j["is_ck_alpha"] = chart.is_ck_alpha;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_rates(const std::string& config, const std::string& out) {
  const ExperimentConfig cfg = load_checked(config);
  std::cout << run_experiment(cfg, out.empty() ? fs::path{} : fs::path(out));
  return 0;
}

int cmd_barrier(const std::vector<double>& deltas, double lambda, double Lambda) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (double delta : deltas) {
    const double h = delta / 4.0;
    const GridFunction v = solve_barrier(delta, h, lambda, Lambda);
    double sup = 0.0;
    const auto [lo, hi] = std::minmax_element(v.values.begin(), v.values.end());
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      const Vec2 x = v.grid->nodes[i];
      if (Vec2{x.x1, x.x2 + delta}.norm() < 4.0 * delta) sup = std::max(sup, v.values[i]);
    }
    const Domain bump = make_domain(DomainKind::graph_bump, {0.5 * delta, 1.5});
    const LocalizationReport loc = localization_experiment(OperatorSpec::isaacs(lambda, Lambda), bump, delta, h,
                                                           LocalizationData::standard(delta));
    rows.push_back({{"delta", delta},
                    {"h", h},
                    {"barrier_min", *lo},
                    {"barrier_max", *hi},
                    {"barrier_sup_4delta", sup},
                    {"barrier_ratio", sup / delta},
                    {"localization_sup", loc.sup_u_on_Omega_delta},
                    {"localization_ratio", loc.fitted_C},
                    {"osc", loc.osc},
                    {"nodes", loc.nodes}});
  }
  std::cout << rows.dump(2) << "\n";
  return 0;
}

int cmd_suite(const std::string& out) {
  const fs::path dir = out.empty() ? fs::path("out") : fs::path(out);
  fs::create_directories(dir);
  const auto experiments = suite_experiments();
  std::vector<std::string> errors(experiments.size());
  const auto run_one = [&](std::size_t i) {
    try {
      run_experiment(experiments[i], dir / experiments[i].name);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  const int threads = worker_count();
  if (threads <= 1) {
    for (std::size_t i = 0; i < experiments.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(threads, experiments.size()); ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < experiments.size(); i = next++) run_one(i);
      });
    for (auto& th : pool) th.join();
  }
  bool ok = true;
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    if (!errors[i].empty()) {
      std::fprintf(stderr, "experiment %s failed: %s\n", experiments[i].name.c_str(), errors[i].c_str());
      ok = false;
    }
  }
  const auto results = run_acceptance();
  for (const auto& r : results) {
    std::printf("%s  criterion %2d  %-38s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  write_file(dir / "suite_report.json", suite_report_json(results));
  return ok ? 0 : 1;
}

int cmd_selftest() {
  const SelftestResult res = run_selftest();
  for (const auto& f : res.failures) std::printf("FAIL  %s\n", f.c_str());
  std::printf("%d checks, %zu failures\n", res.checks, res.failures.size());
  return res.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary regularity experiments for fully nonlinear elliptic equations"};
  app.require_subcommand(1);

  std::string config, out;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the PDE of a config and write field.csv and grid.json");
  solve_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
  solve_cmd->add_option("--out", out, "Output directory (default: the config's outputs)");

  std::string domain;
  int k = 1, samples = 4096;
  double alpha = 0.5;
  std::vector<double> params;
  auto* classify_cmd = app.add_subcommand("classify", "Fit a pointwise boundary chart at 0 and print it as JSON");
  classify_cmd->add_option("--domain", domain, "half_ball, graph_bump, slit_ball or ball")->required();
  classify_cmd->add_option("--k", k, "Order 1 or 2")->required();
  classify_cmd->add_option("--alpha", alpha, "Hoelder exponent in (0, 1)")->required();
  classify_cmd->add_option("--params", params, "Domain parameters");
  classify_cmd->add_option("--samples", samples, "Boundary samples per unit length");

  auto* rates_cmd = app.add_subcommand("rates", "Run the configured analyzers and write trace.csv, summary.json, rates.svg");
  rates_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
  rates_cmd->add_option("--out", out, "Output directory (default: the config's outputs)");

  std::vector<double> deltas{1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0};
  double lambda = 1.0, Lambda = 2.0;
  auto* barrier_cmd = app.add_subcommand("barrier", "Barrier and localization sweep over delta");
  barrier_cmd->add_option("--delta", deltas, "Values of delta in (0, 1/4)");
  barrier_cmd->add_option("--lambda", lambda, "Lower ellipticity constant");
  barrier_cmd->add_option("--Lambda", Lambda, "Upper ellipticity constant");

  auto* suite_cmd = app.add_subcommand("suite", "Run the suite experiments and the acceptance battery");
  suite_cmd->add_option("--out", out, "Output directory (default: out)");

  auto* selftest_cmd = app.add_subcommand("selftest", "Operator and fit property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve_cmd) return cmd_solve(config, out);
    if (*classify_cmd) return cmd_classify(domain, k, alpha, params, samples);
    if (*rates_cmd) return cmd_rates(config, out);
    if (*barrier_cmd) return cmd_barrier(deltas, lambda, Lambda);
    if (*suite_cmd) return cmd_suite(out);
    if (*selftest_cmd) return cmd_selftest();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s (residual %.3e)\n", e.what(), e.residual());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
