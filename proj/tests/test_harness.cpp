#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "regulab/acceptance.hpp"
#include "regulab/errors.hpp"
#include "regulab/harness.hpp"

namespace fs = std::filesystem;
using namespace regulab;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("regulab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kMinimal = R"({
  "schema_version": 1,
  "name": "minimal",
  "operator": {"tag": "laplace"},
  "domain": {"kind": "half_ball"},
  "data": {"g": {"c1": [0.0, 1.0]}},
  "grid": {"h": 0.03125, "n_dirs": 4}
})";

}  // namespace

TEST_CASE("parse_config") {
  const ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.name == "minimal");
  CHECK(cfg.op_tag == "laplace");
  CHECK(cfg.grid.h == 0.03125);

  const ExperimentConfig back = parse_config(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));

  auto j = nlohmann::json::parse(kMinimal);
  j["operator"]["tag"] = "monge_ampere";
  CHECK_THROWS_AS(parse_config(j.dump()).validate(), ConfigError);
  j = nlohmann::json::parse(kMinimal);
  j["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(kMinimal);
  j["grid"]["spacing"] = 0.1;
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("definitely/missing.json"), ConfigError);
}

TEST_CASE("execute keeps the error type and tags the stage") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.op_tag = "monge_ampere";
  try {
    execute(cfg);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find('[') == 0);
  }
}

TEST_CASE("minimal config is flagged exact") {
  const ExperimentResult res = execute(parse_config(kMinimal));
  REQUIRE(res.c1a_rate);
  CHECK(res.c1a_rate->exact);
  CHECK(res.c1a->Du0.x2 == doctest::Approx(1.0));
  const auto summary = nlohmann::json::parse(summary_json(res));
  CHECK(summary["c1a"]["rate"]["exact"] == true);
}

TEST_CASE("run_experiment outputs are byte-stable") {
  const ExperimentConfig cfg = load_config(fs::path(REGULAB_CONFIG_DIR) / "c1alpha_bump.json");
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  run_experiment(cfg, a);
  run_experiment(cfg, b);
  for (const char* f : {"trace.csv", "summary.json", "rates.svg"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // One CSV row per usable scale.
  const std::string csv = slurp(a / "trace.csv");
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  const ExperimentResult res = execute(cfg);
  CHECK(rows == static_cast<long>(res.c1a->trace.size()));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("failed runs leave no outputs") {
  auto j = nlohmann::json::parse(kMinimal);
  j["iteration"] = {{"r_floor", 0.001}};
  const fs::path dir = scratch_dir("fail");
  CHECK_THROWS_AS(run_experiment(parse_config(j.dump()), dir), ConfigError);
  CHECK_FALSE(fs::exists(dir / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "trace.csv"));
}

TEST_CASE("scaling a config scales the solution") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.data.g.c2 = SymMatrix(0.0, 0.5, 0.0);
  const ExperimentResult one = execute(cfg);
  const ExperimentResult three = execute(cfg.scaled(3.0));
  for (std::size_t i = 0; i < one.u.values.size(); ++i)
    CHECK(three.u.values[i] == doctest::Approx(3.0 * one.u.values[i]).epsilon(1e-12));
}

TEST_CASE("suite manifest and report") {
  const auto suite = suite_experiments();
  CHECK(suite.size() == 4);
  for (const auto& cfg : suite) CHECK_NOTHROW(cfg.validate());
  const std::vector<CriterionResult> results{{1, "a", true, "ok"}, {2, "b", false, "bad"}};
  const auto j = nlohmann::json::parse(suite_report_json(results));
  CHECK(j["pass"] == false);
  CHECK(j["criteria"].size() == 2);
}

TEST_CASE("selftest passes") {
  const SelftestResult res = run_selftest();
  CHECK(res.failures.empty());
  CHECK(res.checks > 10);
}
