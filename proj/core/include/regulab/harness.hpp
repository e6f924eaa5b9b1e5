#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regulab/domain.hpp"
#include "regulab/elliptic_ops.hpp"
#include "regulab/regularity.hpp"
#include "regulab/solver.hpp"

namespace regulab {

/// Boundary data g = jet + cubic + A x2 |x|^{p-1}.
struct PolySpec {
  double c0 = 0.0;
  Vec2 c1{};
  SymMatrix c2{};                    ///< quadratic part x^T c2 x
  std::array<double, 4> cubic{};     ///< coefficients of x1^3, x1^2 x2, x1 x2^2, x2^3
  double holder_amplitude = 0.0;
  double holder_exponent = 2.5;      ///< p; the term is homogeneous of degree p

  double operator()(Vec2 x) const;
  SymMatrix hessian(Vec2 x) const;
};

/// f = constant + K_f |x|^exponent, or F(D^2 g) when `manufactured`.
struct FSpec {
  double constant = 0.0;
  double K_f = 0.0;
  double exponent = 1.0;
  bool manufactured = false;
};

struct DataSpec {
  PolySpec g;                        ///< on the boundary of the domain
  std::optional<PolySpec> g_outer;   ///< on the truncation sphere |x| = R; defaults to g
  FSpec f;
  double scale = 1.0;                ///< multiplies f and g
};

struct GridSpec {
  double h = 1.0 / 64.0;
  double R = 1.0;
  int n_dirs = 16;
};

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  std::string op_tag = "laplace";
  double lambda = 1.0;
  double Lambda = 1.0;
  DomainKind domain = DomainKind::half_ball;
  std::vector<double> domain_params;
  DataSpec data;
  GridSpec grid;
  IterationConfig iteration;
  std::vector<std::string> analyzers{"c1a"};  ///< "c1a", "c2a"
  std::uint64_t seed = 0;
  std::string outputs = "out";

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  /// The same experiment with f and g multiplied by c.
  ExperimentConfig scaled(double c) const;
};

/// Throws ConfigError on malformed JSON, schema mismatch or unknown keys.
ExperimentConfig parse_config(std::string_view json_text);
/// Throws ConfigError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& cfg);

struct ExperimentResult {
  ExperimentConfig config;
  std::shared_ptr<const Grid> grid;
  GridFunction u;
  GridFunction f;
  SolveInfo solve;
  std::optional<C1aResult> c1a;
  std::optional<RateReport> c1a_rate;
  std::optional<CauchyReport> c1a_cauchy;
  double rescaling_defect = 0.0;
  std::optional<C2aResult> c2a;
  std::optional<RateReport> c2a_rate;
  std::optional<CauchyReport> c2a_cauchy;
};

/// Builds domain, grid and data, solves, and runs the configured analyzers.
/// Errors carry a "[stage]" prefix and keep their type.
ExperimentResult execute(const ExperimentConfig& cfg);

/// execute, then writes trace.csv, summary.json and rates.svg into
/// `out_dir` (cfg.outputs when empty). Partial outputs are removed on error.
/// Returns the summary JSON text.
std::string run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});

std::string summary_json(const ExperimentResult& res);
std::string trace_csv(const ExperimentResult& res);
std::string rates_svg(const ExperimentResult& res);
/// Nodal values as CSV (x1, x2, value).
std::string field_csv(const GridFunction& u);
/// {h, R, counts} of a grid.
std::string grid_json(const Grid& grid);

}  // namespace regulab
