#include "fairalloc/metrics.hpp"

#include "fairalloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fairalloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weight_total(std::span<const double> weights) {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double log_nash_welfare(std::span<const double> utilities, std::span<const double> weights) {
  if (utilities.size() != weights.size())
    throw Error(ErrorCode::DimensionMismatch, "utilities and weights differ in length");
  const double total = weight_total(weights);
  double s = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    if (utilities[i] <= 0.0) return -kInf;
    s += weights[i] / total * std::log(utilities[i]);
  }
  return s;
}

BoundCheck make_check(std::string name, double measured, double bound, double slack) {
  return BoundCheck{std::move(name), measured, bound, slack, measured <= bound + slack};
}

}  // namespace

EnvyMatrix envy_matrix(const Instance& instance, const Allocation& allocation) {
  const std::size_t n = instance.agents();
  if (allocation.agents != n || allocation.horizon() != instance.horizon())
    throw Error(ErrorCode::DimensionMismatch, "allocation does not match the instance");
  // bundle(i, j) = value agent i assigns to agent j's bundle
  Matrix bundle(n, n);
  for (std::size_t t = 0; t < instance.horizon(); ++t)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = allocation.fraction(t, j);
      if (x == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) bundle(i, j) += x * instance.value(t, i);
    }

  const auto weights = instance.weights();
  EnvyMatrix result;
  result.envy = Matrix(n, n);
  result.zero_utility.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    result.zero_utility[i] = bundle(i, i) == 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = result.zero_utility[i]
                           ? kInf
                           : weights[i] / weights[j] * bundle(i, j) / bundle(i, i);
      result.envy(i, j) = e;
      if (i != j) result.max_envy = std::max(result.max_envy, e);
    }
  }
  return result;
}

double nash_welfare(std::span<const double> utilities, std::span<const double> weights) {
  const double s = log_nash_welfare(utilities, weights);
  return s == -kInf ? 0.0 : std::exp(s);
}

double competitive_ratio(std::span<const double> algorithm_utilities,
                         std::span<const double> oracle_utilities,
                         std::span<const double> weights) {
  if (algorithm_utilities.size() != oracle_utilities.size())
    throw Error(ErrorCode::DimensionMismatch, "utility vectors differ in length");
  const double algorithm = log_nash_welfare(algorithm_utilities, weights);
  if (algorithm == -kInf) return kInf;
  const double oracle = log_nash_welfare(oracle_utilities, weights);
  return oracle == -kInf ? 0.0 : std::exp(oracle - algorithm);
}

double items_envied_ratio(const Instance& instance, const Allocation& allocation, std::size_t i,
                          std::size_t j) {
  const std::size_t n = instance.agents();
  if (i >= n || j >= n) throw Error(ErrorCode::IndexOutOfRange, "agent index out of range");
  if (allocation.kind != AllocationKind::integral)
    throw Error(ErrorCode::InvalidParameters, "items_envied_ratio needs an integral allocation");
  if (allocation.horizon() != instance.horizon())
    throw Error(ErrorCode::DimensionMismatch, "allocation does not match the instance");
  double own = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < instance.horizon(); ++t) {
    const std::size_t w = allocation.winners[t];
    if (w == i) own += instance.value(t, i);
    if (w == j && instance.value(t, i) > 0.0) ++count;
  }
  if (own == 0.0) throw Error(ErrorCode::ZeroUtility, "agent " + std::to_string(i));
  return static_cast<double>(count) / own;
}

double seeded_bound(double delta, double horizon, double v_max, double v_bar_max) {
  if (!(delta > 0.0) || !(horizon >= 1.0) || v_max < 0.0 || v_bar_max < 0.0)
    throw Error(ErrorCode::InvalidParameters, "seeded_bound needs delta > 0 and T >= 1");
  return 3.0 + 4.0 / delta * v_bar_max + 2.0 * std::log(1.0 + v_max / delta) +
         2.0 * std::log(horizon);
}

ProportionalityResult proportionality_check(std::span<const double> utilities, double horizon,
                                            double c, double epsilon, std::size_t agents,
                                            double kappa) {
  (void)epsilon;
  if (utilities.empty() || !(horizon > 0.0) || !(c > 0.0) || agents == 0)
    throw Error(ErrorCode::InvalidParameters, "proportionality_check needs T, c, n > 0");
  ProportionalityResult result;
  result.d_measured = *std::min_element(utilities.begin(), utilities.end()) / horizon;
  result.passes =
      result.d_measured > 0.0 && result.d_measured / c >= kappa / static_cast<double>(agents);
  return result;
}

double nfact_root(std::size_t n) {
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0) / static_cast<double>(n));
}

bool MetricsReport::all_checks_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
}

MetricsReport build_report(const Instance& instance, const PolicyRun& run,
                           const OracleOutputs& oracle, const ReportConfig& config) {
  const std::size_t n = instance.agents();
  const double horizon = static_cast<double>(instance.horizon());
  const auto weights = instance.weights();
  const PolicyKind kind = config.policy.kind;
  const bool greedy_like = kind == PolicyKind::greedy || kind == PolicyKind::pace_unprojected;
  const bool equal_weights =
      std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights[0]; });

  MetricsReport report;
  report.agents = n;
  report.horizon = instance.horizon();
  report.policy = std::string(to_string(kind));

  auto envy = envy_matrix(instance, run.allocation);
  report.envy_matrix = std::move(envy.envy);
  report.zero_utility = std::move(envy.zero_utility);
  report.max_envy = envy.max_envy;
  report.utilities = run.final_utilities;
  report.nash_welfare = nash_welfare(report.utilities, weights);
  for (double u : report.utilities) report.proportionality.push_back(u / horizon);

  report.assumption_flags = infer_epsilon(instance);
  report.epsilon_used = instance.epsilon().value_or(report.assumption_flags.epsilon_inferred);
  report.c_used = instance.c().value_or(report.assumption_flags.c_inferred);
  for (std::size_t i = 0; i < n; ++i)
    if (report.utilities[i] == 0.0 && report.assumption_flags.monopolistic_utilities[i] > 0.0)
      report.agent_starvation = true;

  if (oracle.divisible) {
    report.cr_vs_divisible =
        competitive_ratio(report.utilities, oracle.divisible->utilities, weights);
    report.cr_vs_divisible_inverse = 1.0 / *report.cr_vs_divisible;
    report.oracle_kkt_residual = oracle.divisible->kkt_residual;
    report.oracle_budget_error = oracle.divisible->budget_error;
  }
  if (oracle.integral)
    report.cr_vs_integral = competitive_ratio(report.utilities, oracle.integral->utilities, weights);
  const std::optional<double> cr = report.cr_vs_divisible ? report.cr_vs_divisible
                                                          : report.cr_vs_integral;
  if (cr) report.cr_over_nfact = *cr / nfact_root(n);

  const double eps = report.epsilon_used;
  const double root_t = std::sqrt(horizon);

  if (greedy_like) {
    report.bound_envy = envy_bound_finite_T(eps, horizon);
    report.checks.push_back(
        make_check("envy", report.max_envy, *report.bound_envy, config.slack_envy.value_or(0.0)));
    if (equal_weights && run.allocation.kind == AllocationKind::integral && n > 1) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (report.utilities[i] == 0.0) {
          worst = kInf;
          continue;
        }
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) worst = std::max(worst, items_envied_ratio(instance, run.allocation, i, j));
      }
      report.max_items_envied_ratio = worst;
      report.checks.push_back(make_check("items_envied", worst, canonical_items_bound(eps),
                                         config.slack_items.value_or(5.0 / root_t)));
    }
    // The CR constant is explicit only at eps = 1.
    if (eps == 1.0 && cr) {
      report.bound_cr = nfact_root(n);
      report.checks.push_back(make_check("cr", *cr, *report.bound_cr, config.cr_slack));
    }
  }

  if (kind == PolicyKind::seeded_greedy) {
    double v_max = 0.0, v_bar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double agent_max = 0.0;
      for (std::size_t t = 0; t < instance.horizon(); ++t)
        agent_max = std::max(agent_max, instance.value(t, i));
      v_max = std::max(v_max, agent_max);
      v_bar += agent_max / static_cast<double>(n);
    }
    report.r_delta = r_delta(instance, report.utilities, config.policy.delta);
    report.bound_r_delta = seeded_bound(config.policy.delta, horizon, v_max, v_bar);
    report.checks.push_back(make_check("r_delta", *report.r_delta, *report.bound_r_delta, 0.0));
  }

  if (kind == PolicyKind::pace && equal_weights) {
    report.ell = config.ell.value_or(weights[0] / config.policy.b);
    report.ell_valid_envy = *report.ell < pace_ell_bound(n, eps);
    report.ell_valid_cr = *report.ell < pace_ell_bound(n, eps, report.c_used);
    if (report.ell_valid_envy) {
      report.bound_envy = canonical_envy_bound(eps);
      report.checks.push_back(make_check("envy", report.max_envy, *report.bound_envy,
                                         config.slack_envy.value_or(5.0 / root_t)));
    }
    if (report.ell_valid_cr) {
      report.proportionality_result = proportionality_check(report.utilities, horizon,
                                                            report.c_used, eps, n, config.kappa);
      if (cr) {
        report.bound_cr = canonical_envy_bound(eps) / report.c_used;
        report.checks.push_back(make_check("cr", *cr, *report.bound_cr, 0.0));
      }
    }
  }
  return report;
}

}  // namespace fairalloc
