#pragma once

#include "fairalloc/algorithms.hpp"
#include "fairalloc/instance.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/oracle.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairalloc {

// ---- generic config-driven experiments ----

struct GeneratorSpec {
  std::string name;
  std::map<std::string, double> params;
};

/// Known generator names: exponential_envy, envy_table, sublinear_pathology,
/// uniform_eps, diag_stochastic, random_veps, random_unit. `seed` feeds the
/// stochastic ones. Throws UnknownGenerator or ConfigError for missing params.
Instance generate(const GeneratorSpec& spec, std::uint64_t seed = 0);
std::vector<std::string_view> generator_names();
bool generator_is_stochastic(std::string_view name);

enum class OracleChoice { none, divisible, integral, both };
OracleChoice parse_oracle_choice(std::string_view name);
std::string_view to_string(OracleChoice choice);

/// How PACE's utility floor is set when the config asks for it automatically.
enum class EllRule { fixed, auto_envy, auto_cr };

struct PolicySpec {
  PolicyConfig config;
  // PACE given by rates: a = B/r, b = B/ell (ell may be derived per instance).
  std::optional<double> ell;
  std::optional<double> r;
  EllRule ell_rule = EllRule::fixed;
  double ell_fraction = kDefaultEllFraction;
};

struct ExperimentConfig {
  std::string name;
  GeneratorSpec generator;
  std::optional<std::filesystem::path> instance_path;  // replaces the generator
  PolicySpec policy;
  OracleChoice oracle = OracleChoice::divisible;
  OracleOptions oracle_options;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir = "out";
  ReportConfig report;  // slack overrides; policy is filled per run
};

/// Parses the JSON experiment config. Throws ConfigError.
ExperimentConfig parse_experiment_config(std::string_view text);

/// Resolves the concrete policy for an instance (PACE rates and automatic ell).
PolicyConfig resolve_policy(const PolicySpec& spec, const Instance& instance,
                            std::optional<double>* ell_used = nullptr);

struct SeedOutcome {
  std::uint64_t seed = 0;
  MetricsReport report;
};

struct ExperimentOutcome {
  std::vector<SeedOutcome> runs;
  bool all_checks_pass() const;
};

/// Runs every seed (in parallel), writing seed_<s>.csv and seed_<s>.report.json
/// plus an aggregated report.json into output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

// ---- acceptance criteria and named experiments ----

/// Certificates of every divisible-oracle solve made while running criteria.
class OracleAudit {
public:
  void record(int criterion, const EquilibriumResult& result);
  std::size_t count() const;
  double max_kkt_residual() const;
  double max_budget_error() const;
  bool covers(int criterion) const;

private:
  mutable std::mutex mutex_;
  std::size_t count_ = 0;
  double max_kkt_ = 0.0;
  double max_budget_ = 0.0;
  std::vector<int> criteria_;
};

struct ExperimentContext {
  std::optional<std::filesystem::path> output_dir;  // per-criterion artifacts
  OracleAudit audit;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
  bool within_time() const { return seconds <= time_limit; }
};

inline constexpr int kCriteriaCount = 11;

CriterionResult run_criterion(int id, ExperimentContext& context);

std::vector<std::string_view> named_experiments();
/// Criteria bundled by a named experiment. Throws ConfigError.
std::vector<int> named_experiment_criteria(std::string_view name);

}  // namespace fairalloc
