#include "fairalloc/adversaries.hpp"

#include "detail/rng.hpp"
#include "fairalloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fairalloc {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error(ErrorCode::InvalidEpsilon, "epsilon must lie in (0, 1], got " +
                                               std::to_string(epsilon));
}

InstanceMeta meta(std::string generator, std::vector<std::pair<std::string, double>> params) {
  return InstanceMeta{std::move(generator), std::move(params), {}};
}

std::vector<double> equal_weights(std::size_t n) { return std::vector<double>(n, 1.0); }

constexpr double kSubnormalCap = 1e-300;
constexpr int kRoundRetries = 1000;
constexpr int kMatrixRetries = 100;

}  // namespace

Instance gen_exponential_envy(std::size_t horizon, double base) {
  if (horizon < 2) throw Error(ErrorCode::InvalidParameters, "need T >= 2");
  if (!(base > 2.0) || !std::isfinite(base))
    throw Error(ErrorCode::InvalidBase, "base must exceed 2, got " + std::to_string(base));
  Matrix values(horizon, 2);
  auto info = meta("exponential_envy", {{"T", double(horizon)}, {"a", base}});
  bool capped = false;
  for (std::size_t t = 0; t < horizon; ++t) {
    values(t, 0) = 1.0;
    double v = std::pow(base, static_cast<double>(t + 1) - static_cast<double>(horizon));
    if (v < kSubnormalCap) {
      v = 0.0;
      capped = true;
    }
    values(t, 1) = v;
  }
  if (capped) info.flags.push_back("values_below_1e-300_zeroed");
  return build_instance(std::move(values), equal_weights(2), std::nullopt, std::nullopt,
                        std::move(info));
}

EnvyTableLayout envy_table_layout(std::size_t t0, double base, double epsilon) {
  check_epsilon(epsilon);
  if (!(base > 1.0) || !std::isfinite(base))
    throw Error(ErrorCode::InvalidBase, "base must exceed 1, got " + std::to_string(base));
  if (t0 == 0) throw Error(ErrorCode::InvalidParameters, "T0 must be positive");

  EnvyTableLayout layout;
  const double k = std::round(std::log(1.0 / epsilon) / std::log(base));
  layout.k = static_cast<std::size_t>(k);
  if (epsilon < 1.0 && layout.k == 0)
    throw Error(ErrorCode::InvalidParameters, "log(1/eps)/log(a) rounds to 0; use a smaller base");
  // eps * base^k = 1 exactly with the effective ratio.
  layout.base = layout.k == 0 ? base : std::pow(1.0 / epsilon, 1.0 / k);
  layout.a_length = t0;
  const double shrink = 1.0 - 1.0 / layout.base;
  layout.b_length = static_cast<std::size_t>(std::floor(shrink * static_cast<double>(t0)));
  layout.c_length =
      static_cast<std::size_t>(std::floor(shrink / epsilon * static_cast<double>(t0)));
  if (layout.k > 0 && (layout.b_length == 0 || layout.c_length == 0))
    throw Error(ErrorCode::InvalidParameters, "T0 too small for the B and C phases");

  std::size_t end = 0;
  for (int phase = 0; phase < 2; ++phase) layout.phase_ends.push_back(end += t0);
  for (std::size_t m = 0; m < layout.k; ++m) layout.phase_ends.push_back(end += layout.b_length);
  for (std::size_t m = 0; m < layout.k; ++m) layout.phase_ends.push_back(end += layout.c_length);
  return layout;
}

Instance gen_envy_table(std::size_t t0, double base, double epsilon) {
  const auto layout = envy_table_layout(t0, base, epsilon);
  Matrix values(layout.phase_ends.back(), 2);
  auto level = [&](std::size_t m) {
    return m == layout.k ? 1.0 : std::min(1.0, epsilon * std::pow(layout.base, double(m)));
  };
  std::size_t t = 0;
  auto fill = [&](std::size_t length, double v0, double v1) {
    for (std::size_t s = 0; s < length; ++s, ++t) {
      values(t, 0) = v0;
      values(t, 1) = v1;
    }
  };
  fill(t0, 0.0, 1.0);
  fill(t0, epsilon, 1.0);
  for (std::size_t m = 1; m <= layout.k; ++m) fill(layout.b_length, level(m), 1.0);
  for (std::size_t m = 1; m <= layout.k; ++m) fill(layout.c_length, level(m), epsilon);

  auto info = meta("envy_table", {{"T0", double(t0)},
                                  {"a", base},
                                  {"epsilon", epsilon},
                                  {"k", double(layout.k)},
                                  {"a_effective", layout.base}});
  return build_instance(std::move(values), equal_weights(2), epsilon, std::nullopt,
                        std::move(info));
}

Instance gen_sublinear_pathology(std::size_t agents, std::size_t horizon, double epsilon,
                                 double ell) {
  check_epsilon(epsilon);
  if (agents <= 2) throw Error(ErrorCode::InvalidParameters, "need more than two agents");
  if (horizon == 0) throw Error(ErrorCode::InvalidParameters, "need T >= 1");
  if (!(ell > 0.0 && ell < epsilon))
    throw Error(ErrorCode::InvalidParameters, "ell must lie in (0, eps)");
  const double head = (1.0 - ell / epsilon) * static_cast<double>(horizon);
  const auto silent = std::min<std::size_t>(
      horizon, static_cast<std::size_t>(std::ceil(head - 1e-9 * static_cast<double>(horizon))));
  Matrix values(horizon, agents, 1.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double v = t < silent ? 0.0 : epsilon;
    values(t, 0) = v;
    values(t, 1) = v;
  }
  auto info = meta("sublinear_pathology", {{"n", double(agents)},
                                           {"T", double(horizon)},
                                           {"epsilon", epsilon},
                                           {"ell", ell}});
  if (silent == horizon) info.flags.push_back("agents_0_1_value_nothing");
  return build_instance(std::move(values), equal_weights(agents), std::nullopt, std::nullopt,
                        std::move(info));
}

Instance gen_uniform_eps(std::size_t agents, std::size_t horizon, double epsilon) {
  check_epsilon(epsilon);
  if (agents < 2) throw Error(ErrorCode::InvalidParameters, "need at least two agents");
  if (horizon == 0) throw Error(ErrorCode::InvalidParameters, "need T >= 1");
  return build_instance(
      Matrix(horizon, agents, epsilon), equal_weights(agents), 1.0, 1.0,
      meta("uniform_eps", {{"n", double(agents)}, {"T", double(horizon)}, {"epsilon", epsilon}}));
}

Instance gen_diag_stochastic(std::size_t agents, std::size_t horizon, double off_value,
                             std::uint64_t seed) {
  if (!(off_value > 0.0 && off_value < 1.0))
    throw Error(ErrorCode::InvalidParameters, "off_value must lie in (0, 1)");
  if (agents == 0 || horizon == 0) throw Error(ErrorCode::InvalidParameters, "empty instance");
  detail::Rng rng(seed);
  Matrix values(horizon, agents, off_value);
  for (std::size_t t = 0; t < horizon; ++t) values(t, rng.index(agents)) = 1.0;
  return build_instance(std::move(values), equal_weights(agents), off_value, std::nullopt,
                        meta("diag_stochastic", {{"n", double(agents)},
                                                 {"T", double(horizon)},
                                                 {"off_value", off_value},
                                                 {"seed", double(seed)}}));
}

Instance gen_random_veps(std::size_t agents, std::size_t horizon, double epsilon, double density,
                         std::uint64_t seed) {
  check_epsilon(epsilon);
  if (!(density > 0.0 && density <= 1.0))
    throw Error(ErrorCode::InvalidParameters, "density must lie in (0, 1]");
  if (agents == 0 || horizon == 0) throw Error(ErrorCode::InvalidParameters, "empty instance");
  detail::Rng rng(seed);
  Matrix values(horizon, agents);
  for (int attempt = 0; attempt < kMatrixRetries; ++attempt) {
    for (std::size_t t = 0; t < horizon; ++t) {
      bool any = false;
      for (int retry = 0; retry < kRoundRetries && !any; ++retry)
        for (std::size_t i = 0; i < agents; ++i) {
          const bool present = rng.uniform() < density;
          values(t, i) = present ? epsilon + (1.0 - epsilon) * rng.uniform() : 0.0;
          any = any || present;
        }
      if (!any) throw Error(ErrorCode::InfeasibleDensity, "could not draw a nonzero round");
    }
    bool every_agent = true;
    for (std::size_t i = 0; i < agents && every_agent; ++i) {
      bool seen = false;
      for (std::size_t t = 0; t < horizon && !seen; ++t) seen = values(t, i) > 0.0;
      every_agent = seen;
    }
    if (every_agent)
      return build_instance(std::move(values), equal_weights(agents), epsilon, std::nullopt,
                            meta("random_veps", {{"n", double(agents)},
                                                 {"T", double(horizon)},
                                                 {"epsilon", epsilon},
                                                 {"density", density},
                                                 {"seed", double(seed)}}));
  }
  throw Error(ErrorCode::InfeasibleDensity, "some agent values nothing after " +
                                                std::to_string(kMatrixRetries) + " redraws");
}

Instance gen_random_unit(std::size_t agents, std::size_t horizon, std::uint64_t seed) {
  if (agents == 0 || horizon == 0) throw Error(ErrorCode::InvalidParameters, "empty instance");
  detail::Rng rng(seed);
  Matrix values(horizon, agents);
  for (std::size_t t = 0; t < horizon; ++t) {
    bool any = false;
    while (!any)
      for (std::size_t i = 0; i < agents; ++i) {
        values(t, i) = rng.uniform();
        any = any || values(t, i) > 0.0;
      }
  }
  return build_instance(std::move(values), equal_weights(agents), std::nullopt, std::nullopt,
                        meta("random_unit", {{"n", double(agents)},
                                             {"T", double(horizon)},
                                             {"seed", double(seed)}}));
}

AdaptiveAdversary::AdaptiveAdversary(std::size_t agents, std::vector<std::size_t> phase_lengths)
    : agents_(agents), phase_lengths_(std::move(phase_lengths)) {
  if (agents == 0 || phase_lengths_.size() != agents)
    throw Error(ErrorCode::InvalidPhases, "need exactly one phase per agent");
  for (std::size_t k = 0; k < phase_lengths_.size(); ++k) {
    if (phase_lengths_[k] == 0) throw Error(ErrorCode::InvalidPhases, "empty phase");
    if (k > 0 && phase_lengths_[k] <= phase_lengths_[k - 1])
      throw Error(ErrorCode::InvalidPhases, "phase lengths must strictly increase");
    phase_ends_.push_back(horizon_ += phase_lengths_[k]);
  }
  active_.assign(agents, true);
  row_.assign(agents, 1.0);
}

std::size_t AdaptiveAdversary::active_count() const {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
}

std::span<const double> AdaptiveAdversary::values(std::size_t t) {
  if (t >= horizon_) throw Error(ErrorCode::IndexOutOfRange, "round past the horizon");
  for (std::size_t i = 0; i < agents_; ++i) row_[i] = active_[i] ? 1.0 : 0.0;
  return row_;
}

void AdaptiveAdversary::observe(std::size_t t, std::size_t winner, const RunState& state) {
  (void)winner;
  if (phase_ >= phase_ends_.size() || t + 1 != phase_ends_[phase_]) return;
  std::size_t lowest = agents_;
  for (std::size_t i = 0; i < agents_; ++i)
    if (active_[i] && (lowest == agents_ || state.utilities[i] < state.utilities[lowest]))
      lowest = i;
  eliminated_.push_back(lowest);
  // The survivor of the last phase stays active.
  if (phase_ + 1 < phase_ends_.size()) active_[lowest] = false;
  ++phase_;
}

AdaptiveAdversary adaptive_phase_adversary(std::size_t agents,
                                           std::vector<std::size_t> phase_lengths) {
  return AdaptiveAdversary(agents, std::move(phase_lengths));
}

std::vector<std::size_t> geometric_phases(std::size_t agents, std::size_t base, double ratio) {
  if (base == 0 || !(ratio > 1.0))
    throw Error(ErrorCode::InvalidPhases, "need a positive base and a ratio above 1");
  std::vector<std::size_t> lengths;
  double length = static_cast<double>(base);
  for (std::size_t k = 0; k < agents; ++k, length *= ratio)
    lengths.push_back(static_cast<std::size_t>(std::llround(length)));
  return lengths;
}

AdversaryRun run_adaptive(AdaptiveAdversary& adversary, const PolicyConfig& config) {
  const std::size_t n = adversary.agents();
  auto trace = run_online(adversary, make_step(config, equal_weights(n)),
                          initial_state(config, n),
                          config.kind == PolicyKind::pace ||
                              config.kind == PolicyKind::pace_unprojected);
  std::vector<std::pair<std::string, double>> params{{"n", double(n)}};
  for (std::size_t k = 0; k < adversary.phase_lengths().size(); ++k)
    params.emplace_back("T" + std::to_string(k + 1), double(adversary.phase_lengths()[k]));
  Instance realized = build_instance(trace.realized_values, equal_weights(n), std::nullopt,
                                     std::nullopt, meta("adaptive_phase", std::move(params)));
  std::vector<std::size_t> order = adversary.elimination_order();
  return AdversaryRun{to_policy_run(std::move(trace)), std::move(realized), std::move(order)};
}

}  // namespace fairalloc
