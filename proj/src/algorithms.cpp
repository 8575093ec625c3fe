#include "fairalloc/algorithms.hpp"

#include "fairalloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fairalloc {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void check_sizes(const RunState& state, std::span<const double> values) {
  if (state.utilities.size() != values.size())
    throw Error(ErrorCode::DimensionMismatch,
                "state has " + std::to_string(state.utilities.size()) + " agents, round has " +
                    std::to_string(values.size()) + " values");
}

void check_weights(std::span<const double> values, std::span<const double> weights) {
  if (weights.size() != values.size())
    throw Error(ErrorCode::DimensionMismatch, "weights do not match the number of agents");
}

[[noreturn]] void all_zero(const RunState& state) {
  throw Error(ErrorCode::AllZeroValues, "round " + std::to_string(state.round + 1));
}

// Strict > keeps the smallest index on ties.
template <class Score>
std::size_t min_argmax(std::span<const double> values, Score score) {
  std::size_t best = kNone;
  double best_score = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) continue;
    const double s = score(i);
    if (best == kNone || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

// argmax B_i v_i / U_i with the zero-utility tier in front.
std::size_t ratio_winner(const RunState& state, std::span<const double> values,
                         std::span<const double> weights) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] > 0.0 && state.utilities[i] == 0.0) return i;
  return min_argmax(values,
                    [&](std::size_t i) { return weights[i] * values[i] / state.utilities[i]; });
}

void award(RunState& state, std::size_t winner, std::span<const double> values) {
  state.utilities[winner] += values[winner];
  ++state.round;
}

// ubar^t = x v / t + (t-1)/t ubar^{t-1}, applied literally.
void update_average(RunState& state, std::size_t winner, std::span<const double> values) {
  const std::size_t n = values.size();
  if (state.avg_utility.size() != n) state.avg_utility.assign(n, 0.0);
  const double t = static_cast<double>(state.round);
  for (std::size_t i = 0; i < n; ++i) {
    const double gained = i == winner ? values[i] : 0.0;
    state.avg_utility[i] = gained / t + (t - 1.0) / t * state.avg_utility[i];
  }
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::seeded_greedy: return "seeded_greedy";
    case PolicyKind::pace: return "pace";
    case PolicyKind::pace_unprojected: return "pace_unprojected";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto kind : {PolicyKind::greedy, PolicyKind::seeded_greedy, PolicyKind::pace,
                    PolicyKind::pace_unprojected})
    if (to_string(kind) == name) return kind;
  throw Error(ErrorCode::ConfigError, "unknown policy '" + std::string(name) + "'");
}

PolicyConfig PolicyConfig::seeded(double delta) {
  PolicyConfig config;
  config.kind = PolicyKind::seeded_greedy;
  config.delta = delta;
  config.validate();
  return config;
}

PolicyConfig PolicyConfig::pace(double a, double b) {
  PolicyConfig config;
  config.kind = PolicyKind::pace;
  config.a = a;
  config.b = b;
  config.validate();
  return config;
}

PolicyConfig PolicyConfig::pace_rates(double ell, double r, double budget) {
  if (!(ell > 0.0) || !(r > 0.0) || !(budget > 0.0))
    throw Error(ErrorCode::InvalidProjection, "ell, r and the budget must be positive");
  return pace(budget / r, budget / ell);
}

void PolicyConfig::validate() const {
  if (kind == PolicyKind::seeded_greedy && !(delta > 0.0 && std::isfinite(delta)))
    throw Error(ErrorCode::NonpositiveDelta, "seed utility must be positive, got " +
                                                 std::to_string(delta));
  if (kind == PolicyKind::pace) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(b))
      throw Error(ErrorCode::InvalidProjection, "multiplier bounds must be positive and finite");
    if (a > b)
      throw Error(ErrorCode::InvalidProjection,
                  "a = " + std::to_string(a) + " exceeds b = " + std::to_string(b));
  }
}

std::size_t greedy_step(RunState& state, std::span<const double> values,
                        std::span<const double> weights) {
  check_sizes(state, values);
  check_weights(values, weights);
  const std::size_t winner = ratio_winner(state, values, weights);
  if (winner == kNone) all_zero(state);
  award(state, winner, values);
  return winner;
}

std::size_t seeded_greedy_step(RunState& state, std::span<const double> values, double delta) {
  check_sizes(state, values);
  if (!(delta > 0.0)) throw Error(ErrorCode::NonpositiveDelta, "seed utility must be positive");
  state.seed_utility = delta;
  const std::size_t winner =
      min_argmax(values, [&](std::size_t i) { return values[i] / (delta + state.utilities[i]); });
  if (winner == kNone) all_zero(state);
  award(state, winner, values);
  return winner;
}

std::size_t pace_step(RunState& state, std::span<const double> values,
                      std::span<const double> weights, double a, double b) {
  check_sizes(state, values);
  check_weights(values, weights);
  if (!(a > 0.0) || a > b)
    throw Error(ErrorCode::InvalidProjection,
                "a = " + std::to_string(a) + ", b = " + std::to_string(b));
  const std::size_t n = values.size();
  if (state.multipliers.size() != n) {
    state.multipliers.assign(n, 1.0);
    state.multiplier_from_zero.assign(n, false);
  }
  state.projection = Projection{a, b};

  const std::size_t winner =
      min_argmax(values, [&](std::size_t i) { return state.multipliers[i] * values[i]; });
  if (winner == kNone) all_zero(state);
  award(state, winner, values);
  update_average(state, winner, values);
  for (std::size_t i = 0; i < n; ++i) {
    const bool from_zero = state.avg_utility[i] == 0.0;
    state.multiplier_from_zero[i] = from_zero;
    state.multipliers[i] = from_zero ? b : std::clamp(weights[i] / state.avg_utility[i], a, b);
  }
  return winner;
}

std::size_t pace_unprojected_step(RunState& state, std::span<const double> values,
                                  std::span<const double> weights) {
  check_sizes(state, values);
  check_weights(values, weights);
  // The bid B_i v_i / ubar_i equals (t-1) B_i v_i / U_i; the common factor t-1 is
  // dropped so the decision is computed from the same ratios as greedy.
  const std::size_t winner = ratio_winner(state, values, weights);
  if (winner == kNone) all_zero(state);
  award(state, winner, values);
  update_average(state, winner, values);
  const std::size_t n = values.size();
  state.multipliers.resize(n);
  state.multiplier_from_zero.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool from_zero = state.avg_utility[i] == 0.0;
    state.multiplier_from_zero[i] = from_zero;
    state.multipliers[i] = from_zero ? std::numeric_limits<double>::infinity()
                                     : weights[i] / state.avg_utility[i];
  }
  return winner;
}

RunState initial_state(const PolicyConfig& config, std::size_t agents) {
  config.validate();
  RunState state = RunState::fresh(agents);
  switch (config.kind) {
    case PolicyKind::greedy: break;
    case PolicyKind::seeded_greedy: state.seed_utility = config.delta; break;
    case PolicyKind::pace:
      state.avg_utility.assign(agents, 0.0);
      state.multipliers.assign(agents, 1.0);
      state.multiplier_from_zero.assign(agents, false);
      state.projection = Projection{config.a, config.b};
      break;
    case PolicyKind::pace_unprojected:
      state.avg_utility.assign(agents, 0.0);
      state.multipliers.assign(agents, std::numeric_limits<double>::infinity());
      state.multiplier_from_zero.assign(agents, true);
      break;
  }
  return state;
}

StepFn make_step(const PolicyConfig& config, std::vector<double> weights) {
  config.validate();
  switch (config.kind) {
    case PolicyKind::greedy:
      return [w = std::move(weights)](RunState& s, std::span<const double> v) {
        return greedy_step(s, v, w);
      };
    case PolicyKind::seeded_greedy:
      return [delta = config.delta](RunState& s, std::span<const double> v) {
        return seeded_greedy_step(s, v, delta);
      };
    case PolicyKind::pace:
      return [w = std::move(weights), a = config.a, b = config.b](RunState& s,
                                                                  std::span<const double> v) {
        return pace_step(s, v, w, a, b);
      };
    case PolicyKind::pace_unprojected:
      return [w = std::move(weights)](RunState& s, std::span<const double> v) {
        return pace_unprojected_step(s, v, w);
      };
  }
  throw Error(ErrorCode::ConfigError, "unknown policy kind");
}

PolicyRun to_policy_run(RunTrace trace) {
  PolicyRun run;
  run.allocation = std::move(trace.allocation);
  run.utility_trajectory = std::move(trace.utility_trajectory);
  run.avg_utility_trajectory = std::move(trace.avg_utility_trajectory);
  run.multiplier_trajectory = std::move(trace.multiplier_trajectory);
  run.multiplier_from_zero = std::move(trace.multiplier_from_zero);
  run.final_utilities = std::move(trace.final_state.utilities);
  return run;
}

PolicyRun run_policy(const Instance& instance, const PolicyConfig& config) {
  const bool seeded = config.kind == PolicyKind::seeded_greedy;
  if (seeded && std::any_of(instance.weights().begin(), instance.weights().end(),
                            [&](double w) { return w != instance.weights()[0]; }))
    throw Error(ErrorCode::InvalidParameters, "seeded greedy is defined for equal weights only");
  InstanceSource source(instance);
  const bool pace_like =
      config.kind == PolicyKind::pace || config.kind == PolicyKind::pace_unprojected;
  const std::vector<double> weights(instance.weights().begin(), instance.weights().end());
  return to_policy_run(run_online(source, make_step(config, weights),
                                  initial_state(config, instance.agents()), pace_like));
}

double pace_ell_bound(std::size_t agents, double epsilon, std::optional<double> c) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error(ErrorCode::InvalidEpsilon, "epsilon must lie in (0, 1]");
  if (agents == 0) throw Error(ErrorCode::InvalidParameters, "need at least one agent");
  if (c && !(*c > 0.0 && *c <= 1.0)) throw Error(ErrorCode::InvalidEpsilon, "c must lie in (0, 1]");
  const double spread = static_cast<double>(agents - 1) * (1.0 + std::log(1.0 / epsilon));
  const double eps2 = epsilon * epsilon;
  return c ? *c * eps2 / (1.0 + epsilon + spread) : eps2 / (epsilon + 1.0 + spread);
}

}  // namespace fairalloc
