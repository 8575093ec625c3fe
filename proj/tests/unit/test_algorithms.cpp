#include "helpers.hpp"

#include "fairalloc/adversaries.hpp"
#include "fairalloc/algorithms.hpp"
#include "fairalloc/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace fairalloc;
using test::make;

namespace {

std::size_t greedy_with(std::vector<double> utilities, std::vector<double> values,
                        std::vector<double> weights = {}) {
  if (weights.empty()) weights.assign(values.size(), 1.0);
  auto state = RunState::fresh(values.size());
  state.utilities = std::move(utilities);
  return greedy_step(state, values, weights);
}

std::size_t seeded_with(std::vector<double> utilities, std::vector<double> values, double delta) {
  auto state = RunState::fresh(values.size());
  state.utilities = std::move(utilities);
  return seeded_greedy_step(state, values, delta);
}

// Straightforward restatement of the greedy rule, kept independent of the library.
std::vector<std::size_t> reference_greedy(const Instance& x) {
  const std::size_t n = x.agents();
  std::vector<double> u(n, 0.0);
  std::vector<std::size_t> winners;
  for (std::size_t t = 0; t < x.horizon(); ++t) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n && best == n; ++i)
      if (u[i] == 0.0 && x.value(t, i) > 0.0) best = i;
    if (best == n) {
      double top = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = x.weights()[i] * x.value(t, i) / u[i];
        if (x.value(t, i) > 0.0 && r > top) top = r, best = i;
      }
    }
    u[best] += x.value(t, best);
    winners.push_back(best);
  }
  return winners;
}

Instance restrict(const Instance& x, const std::vector<std::size_t>& winners,
                  const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < x.horizon(); ++t)
    if (std::find(subset.begin(), subset.end(), winners[t]) != subset.end()) kept.push_back(t);
  Matrix m(kept.size(), subset.size());
  for (std::size_t r = 0; r < kept.size(); ++r)
    for (std::size_t k = 0; k < subset.size(); ++k) m(r, k) = x.value(kept[r], subset[k]);
  return build_instance(std::move(m));
}

}  // namespace

TEST_CASE("greedy step") {
  CHECK(greedy_with({0, 0}, {0.5, 0.9}) == 0);
  CHECK(greedy_with({1, 2}, {0.6, 1.0}) == 0);
  CHECK(greedy_with({4, 1}, {1, 1}, {2, 1}) == 1);
  CHECK(greedy_with({0, 5}, {0.1, 100}) == 0);
  CHECK(greedy_with({0, 0}, {0.0, 0.2}) == 1);
  CHECK(greedy_with({3, 3}, {0.7, 0.7}) == 0);

  auto state = RunState::fresh(2);
  const std::vector<double> values{0.5, 0.9}, weights{1, 1};
  greedy_step(state, values, weights);
  CHECK(state.utilities == std::vector<double>{0.5, 0.0});
  CHECK(state.round == 1);
}

TEST_CASE("seeded greedy step") {
  CHECK(seeded_with({0, 0}, {0.5, 0.9}, 1.0) == 1);
  // 1/10.01 = 0.0999... against 0.001/0.01 = 0.1
  CHECK(seeded_with({10, 0}, {1, 0.001}, 0.01) == 1);
  CHECK(seeded_with({2, 2}, {0.4, 0.4}, 0.5) == 0);
  CHECK_THROWS_AS(PolicyConfig::seeded(0.0), Error);
}

TEST_CASE("pace step") {
  auto state = initial_state(PolicyConfig::pace(0.1, 10), 2);
  const std::vector<double> values{0.3, 0.7}, weights{1, 1};
  CHECK(pace_step(state, values, weights, 0.1, 10) == 1);
  CHECK(state.avg_utility == std::vector<double>{0.0, 0.7});
  // agent 0's average is 0: multiplier clamps to b and is flagged
  CHECK(state.multipliers[0] == 10.0);
  CHECK(state.multiplier_from_zero[0]);
  CHECK(state.multipliers[1] == doctest::Approx(1.0 / 0.7));
  CHECK_FALSE(state.multiplier_from_zero[1]);
}

TEST_CASE("pace configuration") {
  CHECK_THROWS_AS(PolicyConfig::pace(0.0, 1.0).validate(), Error);
  CHECK_THROWS_AS(PolicyConfig::pace(2.0, 1.0).validate(), Error);
  const auto rates = PolicyConfig::pace_rates(0.1, 1.0);
  CHECK(rates.a == 1.0);
  CHECK(rates.b == doctest::Approx(10.0));
  CHECK(parse_policy_kind(to_string(PolicyKind::pace_unprojected)) == PolicyKind::pace_unprojected);
  CHECK_THROWS_AS(parse_policy_kind("round_robin"), Error);
}

TEST_CASE("pace_ell_bound") {
  CHECK(pace_ell_bound(1, 1.0) == doctest::Approx(0.5));
  CHECK(pace_ell_bound(2, 1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(pace_ell_bound(4, 0.1, 0.5) == doctest::Approx(0.00045422521424934325).epsilon(1e-12));
  CHECK_THROWS_AS(pace_ell_bound(2, 0.0), Error);
  CHECK_THROWS_AS(pace_ell_bound(2, 0.5, 1.5), Error);
}

TEST_CASE("greedy matches an independent restatement") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = gen_random_veps(3, 50, 0.2, 0.7, seed);
    CHECK(run_policy(x, PolicyConfig::greedy()).allocation.winners == reference_greedy(x));
  }
  const auto weighted = build_instance(gen_random_veps(3, 80, 0.5, 1.0, 3).values(), {1, 2, 0.5});
  CHECK(run_policy(weighted, PolicyConfig::greedy()).allocation.winners ==
        reference_greedy(weighted));
}

TEST_CASE("greedy maximizes the one-step log welfare gain") {
  const auto x = gen_random_veps(4, 200, 0.3, 0.8, 5);
  const auto run = run_policy(x, PolicyConfig::greedy());
  for (std::size_t t = 1; t < x.horizon(); ++t) {
    const auto u = run.utility_trajectory.row(t - 1);
    if (std::any_of(u.begin(), u.end(), [](double v) { return v == 0.0; })) continue;
    std::size_t best = 0;
    for (std::size_t i = 1; i < x.agents(); ++i)
      if (std::log1p(x.value(t, i) / u[i]) > std::log1p(x.value(t, best) / u[best])) best = i;
    CHECK(run.allocation.winners[t] == best);
  }
}

TEST_CASE("unprojected pace and greedy choose the same winners") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 1 + seed % 5;
    const auto x = gen_random_veps(n, 1 + seed % 100, seed % 3 ? 0.5 : 1.0, 0.7, 100 + seed);
    CHECK(run_policy(x, PolicyConfig::greedy()).allocation.winners ==
          run_policy(x, PolicyConfig::pace_unprojected()).allocation.winners);
  }
}

TEST_CASE("wide-bound pace decides like greedy once every utility is positive") {
  const auto x = gen_random_veps(2, 200, 0.5, 1.0, 17);
  const std::vector<double> weights{1, 1};
  auto state = initial_state(PolicyConfig::pace(1e-9, 1e9), 2);
  std::size_t compared = 0;
  for (std::size_t t = 0; t < x.horizon(); ++t) {
    const auto values = x.round_values(t);
    const bool positive = std::all_of(state.utilities.begin(), state.utilities.end(),
                                      [](double u) { return u > 0.0; });
    auto shadow = state;
    const std::size_t paced = pace_step(state, values, weights, 1e-9, 1e9);
    if (positive) {
      CHECK(greedy_step(shadow, values, weights) == paced);
      ++compared;
    }
  }
  CHECK(compared >= 190);

  // Round 1 differs: pace bids its raw values, greedy serves the zero-utility tier.
  const auto first = make({{0.3, 0.7}});
  CHECK(run_policy(first, PolicyConfig::pace(1e-9, 1e9)).allocation.winners[0] == 1);
  CHECK(run_policy(first, PolicyConfig::greedy()).allocation.winners[0] == 0);
}

TEST_CASE("single agent takes everything") {
  const auto x = gen_random_veps(1, 30, 0.5, 1.0, 2);
  for (const auto& config : {PolicyConfig::greedy(), PolicyConfig::seeded(1.0),
                             PolicyConfig::pace(0.5, 2.0), PolicyConfig::pace_unprojected()}) {
    const auto run = run_policy(x, config);
    CHECK(std::all_of(run.allocation.winners.begin(), run.allocation.winners.end(),
                      [](std::size_t w) { return w == 0; }));
    CHECK(run.final_utilities[0] == doctest::Approx(monopolistic_utility(x, 0)));
  }
}

TEST_CASE("runs are feasible and utilities are monotone") {
  const auto x = gen_random_veps(4, 300, 0.2, 0.6, 8);
  for (const auto& config : {PolicyConfig::greedy(), PolicyConfig::seeded(0.5),
                             PolicyConfig::pace_rates(0.05, 1.0), PolicyConfig::pace_unprojected()}) {
    const auto run = run_policy(x, config);
    CHECK_NOTHROW(run.allocation.validate());
    for (std::size_t t = 0; t < x.horizon(); ++t) {
      double total = 0.0;
      for (std::size_t i = 0; i < x.agents(); ++i) {
        total += run.allocation.fraction(t, i);
        if (t > 0) CHECK(run.utility_trajectory(t, i) >= run.utility_trajectory(t - 1, i));
      }
      CHECK(total == 1.0);
    }
  }
}

TEST_CASE("pace average times t equals utility") {
  const auto x = gen_random_veps(3, 500, 0.5, 0.8, 4);
  const auto run = run_policy(x, PolicyConfig::pace_rates(0.05, 1.0));
  REQUIRE(run.avg_utility_trajectory);
  for (std::size_t t = 0; t < x.horizon(); ++t)
    for (std::size_t i = 0; i < x.agents(); ++i) {
      const double u = run.utility_trajectory(t, i);
      const double scaled = double(t + 1) * (*run.avg_utility_trajectory)(t, i);
      CHECK(std::abs(scaled - u) <= 1e-9 * std::max(1.0, u));
    }
}

TEST_CASE("pace multipliers stay inside the projection") {
  const auto x = gen_random_veps(3, 400, 0.1, 0.5, 9);
  const auto config = PolicyConfig::pace(0.5, 4.0);
  const auto run = run_policy(x, config);
  for (std::size_t t = 1; t < x.horizon(); ++t)
    for (std::size_t i = 0; i < x.agents(); ++i) {
      const double beta = (*run.multiplier_trajectory)(t, i);
      CHECK(beta >= 0.5);
      CHECK(beta <= 4.0);
    }
}

TEST_CASE("greedy ignores per-agent scaling once utilities are positive") {
  const auto x = gen_random_veps(3, 150, 0.5, 1.0, 21);
  const auto base = run_policy(x, PolicyConfig::greedy());
  Matrix scaled = x.values();
  for (std::size_t t = 0; t < x.horizon(); ++t) scaled(t, 1) *= 7.5;
  for (const auto kind : {PolicyKind::greedy, PolicyKind::pace_unprojected}) {
    PolicyConfig config;
    config.kind = kind;
    const auto other = run_policy(build_instance(scaled), config);
    CHECK(other.allocation.winners == base.allocation.winners);
  }
}

TEST_CASE("greedy restricted to a subset of agents reproduces their rounds") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 2 + seed % 4;
    const auto x = gen_random_veps(n, 10 + seed * 5 % 51, 0.5, 0.7, 300 + seed);
    const auto winners = run_policy(x, PolicyConfig::greedy()).allocation.winners;
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) subset.push_back(i);
      std::vector<std::size_t> expected;
      for (auto w : winners)
        if (mask >> w & 1)
          expected.push_back(std::find(subset.begin(), subset.end(), w) - subset.begin());
      if (expected.empty()) continue;
      const auto sub = restrict(x, winners, subset);
      CHECK(run_policy(sub, PolicyConfig::greedy()).allocation.winners == expected);
    }
  }
}

TEST_CASE("seeded greedy needs equal weights") {
  const auto x = make({{1, 1}}, {1, 2});
  CHECK_THROWS_AS(run_policy(x, PolicyConfig::seeded(1.0)), Error);
}
