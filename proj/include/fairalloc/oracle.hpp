#pragma once

#include "fairalloc/instance.hpp"
#include "fairalloc/matrix.hpp"
#include "fairalloc/run.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace fairalloc {

/// Divisible Nash-welfare optimum (Fisher market equilibrium) with its certificate.
struct EquilibriumResult {
  Matrix fractions;              // T x n
  std::vector<double> utilities;
  std::vector<double> prices;    // per item
  std::size_t iterations = 0;
  /// max over (i,t) with x > 1e-6 of 1 - (v_i^t/p_t) / max_s (v_i^s/p_s)
  double kkt_residual = 0.0;
  /// max_i |sum_t p_t x_i^t - B_i| / B_i
  double budget_error = 0.0;
};

enum class OracleMethod {
  /// Pure proportional-response dynamics, run until the max relative bid change
  /// (over bids with share above kSupportThreshold) falls below tol.
  proportional_response,
  /// Short proportional-response warm start, then Newton on the dual smoothed with
  /// an l_{1/mu} norm, mu decreasing to tol/10. Falls back to proportional
  /// response if the certificate misses 10 * tol.
  smoothed_newton,
};

std::string_view to_string(OracleMethod method);

struct OracleOptions {
  OracleMethod method = OracleMethod::smoothed_newton;
  std::size_t max_iters = 100000;
  double tol = 1e-9;
};

inline constexpr double kSupportThreshold = 1e-6;

/// Throws DegenerateAgent if an agent values nothing and NoConvergence if the
/// KKT residual or the budget error ends above 10 * tol.
EquilibriumResult divisible_nw_optimum(const Instance& instance, const OracleOptions& options = {});

/// Recomputes the certificate (kkt_residual, budget_error) of a fractional solution.
void certify(const Instance& instance, EquilibriumResult& result);

struct IntegralOptimum {
  Allocation allocation;
  std::vector<double> utilities;
  double nash_welfare = 0.0;
};

inline constexpr double kEnumerationCap = 1e7;

/// Exhaustive search over all n^T integral allocations (lexicographically first
/// maximizer). Throws InstanceTooLarge above kEnumerationCap.
IntegralOptimum integral_nw_optimum(const Instance& instance);

/// Exact supremum over hindsight allocations of (1/n) sum_i (U~_i + delta)/(U_i + delta).
/// The objective is linear in the allocation, so each item goes to
/// argmax_i v_i^t / (U_i + delta). Throws NonpositiveDelta.
double r_delta(const Instance& instance, std::span<const double> algorithm_utilities,
               double delta);

/// 1 + 2 ln(1/eps). Throws InvalidEpsilon.
double canonical_envy_bound(double epsilon);
/// (1/eps)(1 + ln(1/eps)). Throws InvalidEpsilon.
double canonical_items_bound(double epsilon);
/// 1 + 2 ln(1/eps) + (1+eps^4)(1+eps^2)/(eps^6 T) + (1+eps^2)^2/(eps^8 T^2).
double envy_bound_finite_T(double epsilon, double horizon);

}  // namespace fairalloc
