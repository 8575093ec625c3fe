#pragma once

#include "fairalloc/algorithms.hpp"
#include "fairalloc/instance.hpp"
#include "fairalloc/matrix.hpp"
#include "fairalloc/oracle.hpp"
#include "fairalloc/run.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairalloc {

struct EnvyMatrix {
  Matrix envy;                     // n x n, +inf where the envier has zero utility
  std::vector<bool> zero_utility;  // per envier
  double max_envy = 0.0;           // max over i != j; 0 for a single agent
};

/// Envy_ij = (B_i/B_j) (sum_t x_j^t v_i^t) / (sum_t x_i^t v_i^t).
EnvyMatrix envy_matrix(const Instance& instance, const Allocation& allocation);

/// Weighted geometric mean prod U_i^{B_i / sum B}, computed in log space.
double nash_welfare(std::span<const double> utilities, std::span<const double> weights);

/// NW(oracle) / NW(algorithm) >= 1 when the oracle is optimal; +inf when the
/// algorithm's NW is 0.
double competitive_ratio(std::span<const double> algorithm_utilities,
                         std::span<const double> oracle_utilities,
                         std::span<const double> weights);

/// |C_i ∩ A_j| / U_i(A_i) for an integral allocation. Throws ZeroUtility.
double items_envied_ratio(const Instance& instance, const Allocation& allocation,
                          std::size_t i, std::size_t j);

/// 3 + (4/delta) vbar_max + 2 ln(1 + v_max/delta) + 2 ln T. Throws InvalidParameters.
double seeded_bound(double delta, double horizon, double v_max, double v_bar_max);

struct ProportionalityResult {
  double d_measured = 0.0;
  bool passes = false;
};

inline constexpr double kDefaultKappa = 0.1;

/// d = min_i U_i / T; passes iff d > 0 and d / c >= kappa / n.
ProportionalityResult proportionality_check(std::span<const double> utilities,
                                            double horizon, double c, double epsilon,
                                            std::size_t agents, double kappa = kDefaultKappa);

struct BoundCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool passed = false;
  double margin() const { return bound + slack - measured; }
};

struct ReportConfig {
  PolicyConfig policy;
  std::optional<double> ell;      // PACE utility floor actually used (equal weights)
  std::optional<double> slack_envy;   // default 5/sqrt(T) for PACE, 0 for greedy
  std::optional<double> slack_items;  // default 5/sqrt(T)
  double cr_slack = 0.05;
  double kappa = kDefaultKappa;
};

struct MetricsReport {
  std::size_t agents = 0;
  std::size_t horizon = 0;
  std::string policy;
  Matrix envy_matrix;
  std::vector<bool> zero_utility;
  double max_envy = 0.0;
  std::vector<double> utilities;
  double nash_welfare = 0.0;
  std::optional<double> cr_vs_divisible;
  std::optional<double> cr_vs_divisible_inverse;
  std::optional<double> cr_vs_integral;
  std::optional<double> r_delta;
  std::vector<double> proportionality;  // U_i / T
  std::optional<ProportionalityResult> proportionality_result;  // PACE only
  double epsilon_used = 1.0;  // declared epsilon, else inferred
  double c_used = 1.0;        // declared c, else inferred
  std::optional<double> bound_envy;  // absent when no bound covers the policy
  std::optional<double> bound_cr;
  std::optional<double> bound_r_delta;
  std::optional<double> cr_over_nfact;  // measured CR / (n!)^{1/n}
  std::optional<double> max_items_envied_ratio;
  std::optional<double> oracle_kkt_residual;
  std::optional<double> oracle_budget_error;
  InputClassReport assumption_flags;
  bool agent_starvation = false;  // some agent valued items but received nothing
  std::optional<double> ell;
  bool ell_valid_envy = false;  // PACE: ell below pace_ell_bound(n, eps)
  bool ell_valid_cr = false;    // PACE: ell below pace_ell_bound(n, eps, c)
  std::vector<BoundCheck> checks;

  bool all_checks_pass() const;
};

struct OracleOutputs {
  const EquilibriumResult* divisible = nullptr;
  const IntegralOptimum* integral = nullptr;
};

MetricsReport build_report(const Instance& instance, const PolicyRun& run,
                           const OracleOutputs& oracle, const ReportConfig& config);

/// (n!)^{1/n}
double nfact_root(std::size_t n);

}  // namespace fairalloc
