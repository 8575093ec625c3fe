#pragma once

#include "fairalloc/instance.hpp"
#include "fairalloc/run.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace fairalloc {

enum class PolicyKind { greedy, seeded_greedy, pace, pace_unprojected };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::greedy;
  double delta = 0.0;  // seed utility, seeded_greedy only
  double a = 0.0;      // multiplier bounds, pace only
  double b = 0.0;

  static PolicyConfig greedy() { return {}; }
  static PolicyConfig pace_unprojected() { return {PolicyKind::pace_unprojected}; }
  static PolicyConfig seeded(double delta);
  static PolicyConfig pace(double a, double b);
  /// Utility-rate bounds (ell, r) under equal weights `budget`: a = budget/r, b = budget/ell.
  static PolicyConfig pace_rates(double ell, double r, double budget = 1.0);

  /// Throws NonpositiveDelta / InvalidProjection.
  void validate() const;
};

// Single-round decisions. Each returns the winner and updates `state`
// (utilities, round, and for PACE the running average and next multipliers).
// Ties go to the smallest index; agents with zero value never win.

/// Weight-adapted integral greedy: argmax B_i v_i / U_i. Agents with U_i = 0 and
/// v_i > 0 beat every agent with positive utility (smallest index among them).
std::size_t greedy_step(RunState& state, std::span<const double> values,
                        std::span<const double> weights);

/// argmax v_i / (delta + U_i), equal weights.
std::size_t seeded_greedy_step(RunState& state, std::span<const double> values, double delta);

/// PACE with multipliers projected to [a, b]; multipliers start at 1.
std::size_t pace_step(RunState& state, std::span<const double> values,
                      std::span<const double> weights, double a, double b);

/// PACE without projection: bids B_i v_i / ubar_i, same zero-utility tier as greedy.
std::size_t pace_unprojected_step(RunState& state, std::span<const double> values,
                                  std::span<const double> weights);

/// Initial state for a policy (multipliers, seed, projection set up).
RunState initial_state(const PolicyConfig& config, std::size_t agents);

/// Step function bound to a policy and weight vector.
StepFn make_step(const PolicyConfig& config, std::vector<double> weights);

struct PolicyRun {
  Allocation allocation;
  Matrix utility_trajectory;
  std::optional<Matrix> avg_utility_trajectory;
  std::optional<Matrix> multiplier_trajectory;
  std::optional<std::vector<std::vector<bool>>> multiplier_from_zero;
  std::vector<double> final_utilities;
};

PolicyRun run_policy(const Instance& instance, const PolicyConfig& config);

/// Repackages a raw online trace.
PolicyRun to_policy_run(RunTrace trace);

/// Strict upper bound on the PACE utility floor ell: the envy-guarantee bound
/// eps^2 / (eps + 1 + (n-1)(1 + ln 1/eps)), or with `c` the competitive-ratio bound
/// c eps^2 / (1 + eps + (n-1)(1 + ln 1/eps)). Throws InvalidEpsilon.
double pace_ell_bound(std::size_t agents, double epsilon, std::optional<double> c = std::nullopt);

/// Fraction of pace_ell_bound used when an experiment does not pin ell.
inline constexpr double kDefaultEllFraction = 0.99;

}  // namespace fairalloc
