#include "helpers.hpp"

#include "fairalloc/adversaries.hpp"
#include "fairalloc/algorithms.hpp"
#include "fairalloc/error.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace fairalloc;

TEST_CASE("exponential envy instance") {
  const auto x = gen_exponential_envy(3, 4.0);
  CHECK(x.value(0, 1) == 1.0 / 16);
  CHECK(x.value(1, 1) == 1.0 / 4);
  CHECK(x.value(2, 1) == 1.0);
  CHECK(x.value(1, 0) == 1.0);
  CHECK(infer_epsilon(x).epsilon_inferred == doctest::Approx(1.0 / 16));
  CHECK_THROWS_AS(gen_exponential_envy(10, 1.5), Error);

  const auto big = gen_exponential_envy(100, 4.0);
  const auto run = run_policy(big, PolicyConfig::greedy());
  CHECK(envy_matrix(big, run.allocation).envy(0, 1) >= 50.0);

  const auto tiny = gen_exponential_envy(2000, 4.0);
  CHECK(std::find(tiny.meta().flags.begin(), tiny.meta().flags.end(),
                  "values_below_1e-300_zeroed") != tiny.meta().flags.end());
}

TEST_CASE("envy table layout") {
  const auto layout = envy_table_layout(10000, 1.05, 0.1);
  CHECK(layout.k == 47);
  CHECK(std::pow(layout.base, double(layout.k)) == doctest::Approx(10.0));
  const auto flat = envy_table_layout(100, 1.05, 1.0);
  CHECK(flat.k == 0);
  const auto x = gen_envy_table(100, 1.05, 1.0);
  const auto run = run_policy(x, PolicyConfig::greedy());
  CHECK(envy_matrix(x, run.allocation).envy(1, 0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("envy table under greedy") {
  const auto x = gen_envy_table(10000, 1.05, 0.1);
  const auto run = run_policy(x, PolicyConfig::greedy());
  double a1_value = 0.0;
  for (std::size_t t = 0; t < 10000; ++t) {
    CHECK(run.allocation.winners[t] == 1);
    a1_value += x.value(t, 1);
  }
  for (std::size_t t = 10000; t < x.horizon(); ++t) REQUIRE(run.allocation.winners[t] == 0);
  CHECK(run.final_utilities[1] == a1_value);

  const double envy = envy_matrix(x, run.allocation).envy(1, 0);
  const double target = 1.0 + 2.0 * std::log(10.0);
  CHECK(envy >= 0.9 * target);
  CHECK(envy <= target);
  CHECK(items_envied_ratio(x, run.allocation, 1, 0) <= 10.0 * (1.0 + std::log(10.0)));
}

TEST_CASE("envy table approaches the target from below") {
  double previous = 0.0;
  for (std::size_t t0 : {100u, 300u, 1000u, 3000u, 10000u}) {
    const auto x = gen_envy_table(t0, 1.05, 0.1);
    const double envy = envy_matrix(x, run_policy(x, PolicyConfig::greedy()).allocation).envy(1, 0);
    CHECK(envy >= previous);
    CHECK(envy <= 1.0 + 2.0 * std::log(10.0));
    previous = envy;
  }
}

TEST_CASE("sublinear pathology starves an agent under pace") {
  const auto x = gen_sublinear_pathology(3, 10000, 0.5, 0.1);
  const auto paced = run_policy(x, PolicyConfig::pace_rates(0.1, 1.0));
  CHECK(paced.final_utilities[1] == 0.0);
  const auto greedy = run_policy(x, PolicyConfig::greedy());
  CHECK(greedy.final_utilities[1] > 0.0);
  CHECK_THROWS_AS(gen_sublinear_pathology(2, 100, 0.5, 0.1), Error);
  CHECK_THROWS_AS(gen_sublinear_pathology(3, 100, 0.5, 0.6), Error);

  const auto report = proportionality_check(paced.final_utilities, 10000, 1.0, 0.5, 3);
  CHECK(report.d_measured == 0.0);
  CHECK_FALSE(report.passes);
}

TEST_CASE("uniform instance") {
  const auto x = gen_uniform_eps(2, 1000, 0.5);
  const auto above = run_policy(x, PolicyConfig::pace_rates(0.6, 1.0));
  CHECK(above.final_utilities[1] == 0.0);

  // ell = eps / 2 sits on the symmetric split
  const auto below = run_policy(x, PolicyConfig::pace_rates(0.25, 1.0));
  const auto wins0 = std::count(below.allocation.winners.begin(), below.allocation.winners.end(), 0u);
  CHECK(std::abs(double(wins0) - 500.0) <= 1.0);
  const auto prop = proportionality_check(below.final_utilities, 1000, 1.0, 0.5, 2);
  CHECK(prop.d_measured == doctest::Approx(0.25).epsilon(0.01));

  const auto greedy = run_policy(x, PolicyConfig::greedy());
  for (std::size_t t = 0; t < x.horizon(); ++t) CHECK(greedy.allocation.winners[t] == t % 2);
  CHECK(std::abs(greedy.final_utilities[0] - greedy.final_utilities[1]) <= 0.5);
}

TEST_CASE("diagonal stochastic instance") {
  const auto one = gen_diag_stochastic(1, 50, 0.01, 1);
  CHECK(std::all_of(one.values().data().begin(), one.values().data().end(),
                    [](double v) { return v == 1.0; }));
  const auto x = gen_diag_stochastic(4, 1000, 0.01, 5);
  for (std::size_t t = 0; t < x.horizon(); ++t) {
    const auto row = x.round_values(t);
    CHECK(std::count(row.begin(), row.end(), 1.0) == 1);
    CHECK(std::count(row.begin(), row.end(), 0.01) == 3);
  }
}

TEST_CASE("random eps instances") {
  const auto x = gen_random_veps(3, 200, 1.0, 0.5, 4);
  for (double v : x.values().data()) CHECK((v == 0.0 || v == 1.0));
  const auto y = gen_random_veps(3, 200, 0.3, 0.5, 4);
  for (double v : y.values().data()) CHECK((v == 0.0 || (v >= 0.3 && v <= 1.0)));
  CHECK(y.epsilon() == 0.3);
  CHECK_THROWS_AS(gen_random_veps(3, 10, 0.5, 0.0, 1), Error);
}

TEST_CASE("adaptive adversary") {
  CHECK(geometric_phases(3, 10, 10.0) == std::vector<std::size_t>{10, 100, 1000});
  CHECK_THROWS_AS(AdaptiveAdversary(2, {10, 10}), Error);
  CHECK_THROWS_AS(AdaptiveAdversary(3, {10, 100}), Error);

  auto single = adaptive_phase_adversary(1, {25});
  const auto solo = run_adaptive(single, PolicyConfig::greedy());
  CHECK(solo.run.final_utilities[0] == 25.0);

  auto two = adaptive_phase_adversary(2, {10, 100});
  const auto out = run_adaptive(two, PolicyConfig::greedy());
  CHECK(std::min(out.run.utility_trajectory(9, 0), out.run.utility_trajectory(9, 1)) <= 5.0);
  CHECK(two.active_count() == 1);
  CHECK(out.elimination_order.size() == 2);

  auto three = adaptive_phase_adversary(3, geometric_phases(3, 10, 10.0));
  const auto run3 = run_adaptive(three, PolicyConfig::greedy());
  CHECK(three.active_count() == 1);
  const auto eq = divisible_nw_optimum(run3.realized);
  const std::vector<std::size_t> lengths{10, 100, 1000};
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(eq.utilities[run3.elimination_order[k]] >= 0.99 * double(lengths[k]));
  const double cr = competitive_ratio(run3.run.final_utilities, eq.utilities, run3.realized.weights());
  CHECK(cr >= 0.9 * std::cbrt(6.0));
}

TEST_CASE("pace share error shrinks with the horizon") {
  // Mean-square error of U_i/T against 1/n on i.i.d. diagonal types, fitted on log-log axes.
  constexpr std::size_t n = 4, kSeeds = 10;
  const std::vector<double> horizons{1e3, 3e3, 1e4, 3e4, 1e5};
  std::vector<double> lx, ly;
  for (double horizon : horizons) {
    double mse = 0.0;
    for (std::size_t s = 0; s < kSeeds; ++s) {
      const auto x = gen_diag_stochastic(n, std::size_t(horizon), 0.01, 500 + s);
      const auto run = run_policy(x, PolicyConfig::pace(1e-9, 1e9));
      for (double u : run.final_utilities) mse += std::pow(u / horizon - 1.0 / n, 2);
    }
    lx.push_back(std::log(horizon));
    ly.push_back(std::log(mse / double(n * kSeeds)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / double(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / double(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  CHECK(sxy / sxx <= -0.8);
}

TEST_CASE("pace utilities outgrow the floor on V_eps_c inputs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = gen_random_veps(3, 5000, 0.5, 0.6, 60 + seed);
    const double c = infer_epsilon(x).c_inferred;
    const double ell = 0.99 * pace_ell_bound(3, 0.5, c);
    const auto run = run_policy(x, PolicyConfig::pace_rates(ell, 1.0));
    for (double u : run.final_utilities) CHECK(u >= ell * 5000.0);
  }
}
