#include "helpers.hpp"

#include "fairalloc/adversaries.hpp"
#include "fairalloc/algorithms.hpp"
#include "fairalloc/error.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fairalloc;
using test::make;

namespace {

double log_nw(const std::vector<double>& u) {
  double s = 0.0;
  for (double x : u) s += std::log(x);
  return s / double(u.size());
}

}  // namespace

TEST_CASE("single buyer market") {
  const auto x = build_instance(test::rows({{0.5}, {1.0}, {0.25}}), {2.0});
  const auto eq = divisible_nw_optimum(x);
  CHECK(eq.utilities[0] == doctest::Approx(1.75));
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(eq.fractions(t, 0) == doctest::Approx(1.0));
    CHECK(eq.prices[t] == doctest::Approx(2.0 * x.value(t, 0) / 1.75));
  }
}

TEST_CASE("identical agents split evenly") {
  const auto x = make({{0.3, 0.3}, {1, 1}, {0.7, 0.7}, {0.1, 0.1}});
  const auto eq = divisible_nw_optimum(x);
  CHECK(eq.utilities[0] == doctest::Approx(1.05).epsilon(1e-8));
  CHECK(eq.utilities[1] == doctest::Approx(1.05).epsilon(1e-8));
}

TEST_CASE("divisible optimum matches a grid search") {
  const auto x = make({{1, 0}, {0.5, 0.5}, {0, 1}});
  const auto eq = divisible_nw_optimum(x);
  // Independent oracle: 200^3 grid over agent 0's share of each item.
  constexpr int kSteps = 200;
  double best = -1.0;
  for (int a = 0; a <= kSteps; ++a)
    for (int b = 0; b <= kSteps; ++b)
      for (int c = 0; c <= kSteps; c += kSteps) {  // item 2 is worthless to agent 0
        const double f0 = double(a) / kSteps, f1 = double(b) / kSteps, f2 = double(c) / kSteps;
        const double u0 = f0 * 1.0 + f1 * 0.5;
        const double u1 = (1 - f0) * 0.0 + (1 - f1) * 0.5 + (1 - f2) * 1.0;
        best = std::max(best, std::sqrt(u0 * u1));
      }
  CHECK(best == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(nash_welfare(eq.utilities, x.weights()) == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("divisible optimum beats random feasible allocations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = gen_random_veps(3, 6, 0.2, 0.8, 40 + seed);
    const auto eq = divisible_nw_optimum(x);
    const double optimum = log_nw(eq.utilities);
    for (int sample = 0; sample < 1000; ++sample) {
      std::vector<double> u(3, 0.0);
      for (std::size_t t = 0; t < x.horizon(); ++t) {
        double w[3], total = 0.0;
        for (double& v : w) total += v = unit(rng);
        for (std::size_t i = 0; i < 3; ++i) u[i] += w[i] / total * x.value(t, i);
      }
      CHECK(log_nw(u) <= optimum + 1e-9);
    }
  }
}

TEST_CASE("divisible certificate") {
  const auto x = gen_random_veps(3, 2000, 0.5, 0.6, 77);
  const auto eq = divisible_nw_optimum(x);
  CHECK(eq.kkt_residual <= 1e-8);
  CHECK(eq.budget_error <= 1e-8);
  for (std::size_t t = 0; t < x.horizon(); ++t) {
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) total += eq.fractions(t, i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto again = divisible_nw_optimum(x);
  CHECK(again.utilities == eq.utilities);
  CHECK(again.prices == eq.prices);
}

TEST_CASE("proportional response agrees with newton") {
  const auto x = gen_random_veps(3, 60, 0.5, 0.8, 12);
  OracleOptions pr;
  pr.method = OracleMethod::proportional_response;
  pr.tol = 1e-9;
  pr.max_iters = 2000000;
  const auto a = divisible_nw_optimum(x, pr);
  const auto b = divisible_nw_optimum(x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.utilities[i] == doctest::Approx(b.utilities[i]).epsilon(1e-6));
}

TEST_CASE("oracle errors") {
  CHECK_THROWS_AS(divisible_nw_optimum(make({{1, 0}, {1, 0}})), Error);
  OracleOptions starved;
  starved.method = OracleMethod::proportional_response;
  starved.max_iters = 1;
  starved.tol = 1e-14;
  try {
    divisible_nw_optimum(gen_random_veps(3, 50, 0.5, 0.8, 1), starved);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("integral optimum") {
  const auto identity = make({{1, 0}, {0, 1}});
  const auto best = integral_nw_optimum(identity);
  CHECK(best.allocation.winners == std::vector<std::size_t>{0, 1});
  CHECK(best.nash_welfare == 1.0);

  CHECK(integral_nw_optimum(make({{0.4, 0.9, 0.2}})).nash_welfare == 0.0);

  const auto x = gen_random_veps(2, 8, 0.3, 1.0, 9);
  const auto opt = integral_nw_optimum(x);
  const auto greedy = run_policy(x, PolicyConfig::greedy());
  CHECK(opt.nash_welfare >= nash_welfare(greedy.final_utilities, x.weights()));
  CHECK(nash_welfare(divisible_nw_optimum(x).utilities, x.weights()) >=
        opt.nash_welfare * (1 - 1e-9));

  CHECK_THROWS_AS(integral_nw_optimum(gen_random_veps(3, 20, 0.5, 1.0, 1)), Error);
}

TEST_CASE("r_delta closed form") {
  Matrix ones(50, 1, 0.5);
  const auto solo = build_instance(ones);
  CHECK(r_delta(solo, run_policy(solo, PolicyConfig::seeded(1.0)).final_utilities, 1.0) ==
        doctest::Approx(1.0));

  Matrix flat(100, 2, 1.0);
  const auto uniform = build_instance(flat);
  const auto run = run_policy(uniform, PolicyConfig::seeded(1.0));
  CHECK(run.final_utilities == std::vector<double>{50, 50});
  CHECK(r_delta(uniform, run.final_utilities, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(r_delta(uniform, run.final_utilities, 0.0), Error);
}

TEST_CASE("bound evaluators") {
  CHECK(canonical_envy_bound(1.0) == 1.0);
  CHECK(canonical_items_bound(1.0) == 1.0);
  CHECK(canonical_envy_bound(std::exp(-1.0)) == doctest::Approx(3.0));
  CHECK(canonical_envy_bound(0.1) == doctest::Approx(5.605170185988092).epsilon(1e-14));
  CHECK(envy_bound_finite_T(1.0, 1.0) == doctest::Approx(9.0));
  CHECK(envy_bound_finite_T(1.0, 1e12) == doctest::Approx(1.0));
  CHECK_THROWS_AS(canonical_envy_bound(0.0), Error);
}
