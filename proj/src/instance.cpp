#include "fairalloc/instance.hpp"

#include "fairalloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fairalloc {

namespace {

void check_unit_interval(std::optional<double> x, const char* name) {
  if (x && !(*x > 0.0 && *x <= 1.0))
    throw Error(ErrorCode::InvalidEpsilon,
                std::string(name) + " must lie in (0, 1], got " + std::to_string(*x));
}

std::vector<double> agent_maxima(const Matrix& values) {
  std::vector<double> max(values.cols(), 0.0);
  for (std::size_t t = 0; t < values.rows(); ++t)
    for (std::size_t i = 0; i < values.cols(); ++i) max[i] = std::max(max[i], values(t, i));
  return max;
}

}  // namespace

Instance build_instance(Matrix values, std::vector<double> weights, std::optional<double> epsilon,
                        std::optional<double> c, InstanceMeta meta) {
  const std::size_t n = values.cols();
  const std::size_t horizon = values.rows();
  if (n == 0 || horizon == 0)
    throw Error(ErrorCode::DimensionMismatch, "instance needs at least one agent and one round");
  if (weights.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "weights have " + std::to_string(weights.size()) + " entries for " +
                    std::to_string(n) + " agents");
  for (std::size_t i = 0; i < n; ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(ErrorCode::InvalidWeight, "weight of agent " + std::to_string(i) +
                                                " must be positive and finite");
  for (std::size_t t = 0; t < horizon; ++t) {
    bool any_positive = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = values(t, i);
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteValue,
                    "round " + std::to_string(t) + ", agent " + std::to_string(i));
      if (v < 0.0)
        throw Error(ErrorCode::NegativeValue,
                    "round " + std::to_string(t) + ", agent " + std::to_string(i));
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) throw Error(ErrorCode::AllZeroRound, "round " + std::to_string(t));
  }
  check_unit_interval(epsilon, "epsilon");
  check_unit_interval(c, "c");
  if (epsilon) {
    const auto max = agent_maxima(values);
    for (std::size_t t = 0; t < horizon; ++t)
      for (std::size_t i = 0; i < n; ++i) {
        const double v = values(t, i);
        if (v > 0.0 && v / max[i] < *epsilon)
          throw Error(ErrorCode::DeclaredEpsilonViolated,
                      "round " + std::to_string(t) + ", agent " + std::to_string(i) +
                          " normalized value " + std::to_string(v / max[i]));
      }
  }

  Instance instance;
  instance.values_ = std::move(values);
  instance.weights_ = std::move(weights);
  instance.epsilon_ = epsilon;
  instance.c_ = c;
  instance.meta_ = std::move(meta);
  return instance;
}

Instance build_instance(Matrix values) {
  std::vector<double> weights(values.cols(), 1.0);
  return build_instance(std::move(values), std::move(weights));
}

InputClassReport infer_epsilon(const Instance& instance) {
  const std::size_t n = instance.agents();
  const std::size_t horizon = instance.horizon();
  const auto max = agent_maxima(instance.values());
  for (std::size_t i = 0; i < n; ++i)
    if (max[i] == 0.0) throw Error(ErrorCode::AgentAllZero, "agent " + std::to_string(i));

  InputClassReport report;
  report.monopolistic_utilities.assign(n, 0.0);
  std::vector<double> normalized_total(n, 0.0);
  double epsilon = 1.0;
  for (std::size_t t = 0; t < horizon; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      const double v = instance.value(t, i);
      if (v == 0.0) continue;
      report.monopolistic_utilities[i] += v;
      const double normalized = v / max[i];
      normalized_total[i] += normalized;
      epsilon = std::min(epsilon, normalized);
    }
  report.epsilon_inferred = epsilon;
  report.c_inferred =
      *std::min_element(normalized_total.begin(), normalized_total.end()) /
      static_cast<double>(horizon);
  report.satisfies_assumption1 =
      !instance.epsilon() || report.epsilon_inferred >= *instance.epsilon();
  report.satisfies_assumption3 =
      report.satisfies_assumption1 && (!instance.c() || report.c_inferred >= *instance.c());
  return report;
}

double monopolistic_utility(const Instance& instance, std::size_t agent) {
  if (agent >= instance.agents())
    throw Error(ErrorCode::IndexOutOfRange, "agent " + std::to_string(agent) + " of " +
                                                std::to_string(instance.agents()));
  double total = 0.0;
  for (std::size_t t = 0; t < instance.horizon(); ++t) total += instance.value(t, agent);
  return total;
}

}  // namespace fairalloc
