#include "helpers.hpp"

#include "fairalloc/adversaries.hpp"
#include "fairalloc/error.hpp"
#include "fairalloc/instance_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

using namespace fairalloc;
using test::make;
using test::rows;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("identity instance") {
  const auto x = make({{1, 0}, {0, 1}}, {1, 1});
  CHECK(x.agents() == 2);
  CHECK(x.horizon() == 2);
  CHECK(x.weights()[1] == 1.0);
}

TEST_CASE("instance validation") {
  CHECK(code_of([] { make({{1, 0}, {0, 0}}); }) == ErrorCode::AllZeroRound);
  CHECK(code_of([] { make({{1, -0.1}}); }) == ErrorCode::NegativeValue);
  CHECK(code_of([] { make({{1, std::numeric_limits<double>::infinity()}}); }) ==
        ErrorCode::NonFiniteValue);
  CHECK(code_of([] { make({{1, 1}}, {1, 0}); }) == ErrorCode::InvalidWeight);
  CHECK(code_of([] { make({{1, 1}}, {1}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { build_instance(rows({{1, 1}}), {1, 1}, 1.5); }) == ErrorCode::InvalidEpsilon);
  CHECK(code_of([] { build_instance(rows({{1, 1}, {0.2, 1}}), {1, 1}, 0.5); }) ==
        ErrorCode::DeclaredEpsilonViolated);
}

TEST_CASE("inferred epsilon and c") {
  const auto ones = make({{1, 1}, {1, 1}, {1, 1}});
  auto info = infer_epsilon(ones);
  CHECK(info.epsilon_inferred == 1.0);
  CHECK(info.c_inferred == 1.0);

  info = infer_epsilon(make({{0.25, 1}, {1, 1}}));
  CHECK(info.epsilon_inferred <= 0.25);

  info = infer_epsilon(gen_diag_stochastic(4, 200, 0.01, 3));
  CHECK(info.epsilon_inferred == doctest::Approx(0.01));
}

TEST_CASE("monopolistic utility") {
  Matrix ones(100, 1, 1.0);
  CHECK(monopolistic_utility(build_instance(ones), 0) == 100.0);
  CHECK(monopolistic_utility(make({{1, 0}, {1, 0.5}, {1, 0}}), 1) == 0.5);
  // Direct summation of 4^-k, k = 0..9.
  const auto decay = gen_exponential_envy(10, 4.0);
  CHECK(monopolistic_utility(decay, 1) == doctest::Approx(1.3333320617675781).epsilon(1e-12));
  CHECK(code_of([&] { monopolistic_utility(decay, 2); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("instance text round trip") {
  const auto table = gen_envy_table(10000, 1.05, 0.1);
  const auto text = serialize_instance(table);
  CHECK(parse_instance(text) == table);

  const auto odd = build_instance(rows({{0.1, 1e-300}, {1.0 / 3.0, 2.5e-7}}), {2, 0.5});
  CHECK(parse_instance(serialize_instance(odd)) == odd);

  const auto path = std::filesystem::temp_directory_path() / "fairalloc_roundtrip.fai";
  write_instance(table, path);
  CHECK(read_instance(path) == table);
  std::filesystem::remove(path);
}

TEST_CASE("instance parse errors") {
  CHECK(code_of([] { parse_instance("not json\n1 2\n"); }) == ErrorCode::ParseError);
  const auto good = serialize_instance(make({{1, 0}, {0, 1}}));
  const auto truncated = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
  CHECK(code_of([&] { parse_instance(truncated); }) == ErrorCode::ParseError);
  const auto wide = good.substr(0, good.size() - 1) + " 0\n";
  CHECK(code_of([&] { parse_instance(wide); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("generators are deterministic") {
  CHECK(serialize_instance(gen_diag_stochastic(4, 100000, 0.01, 7)) ==
        serialize_instance(gen_diag_stochastic(4, 100000, 0.01, 7)));
  CHECK(serialize_instance(gen_random_veps(2, 50, 0.5, 1.0, 11)) ==
        serialize_instance(gen_random_veps(2, 50, 0.5, 1.0, 11)));
  CHECK(gen_random_veps(2, 50, 0.5, 1.0, 11) != gen_random_veps(2, 50, 0.5, 1.0, 12));
}

TEST_CASE("epsilon inference ignores per-agent scaling") {
  const auto x = gen_random_veps(3, 300, 0.2, 0.6, 14);
  const auto base = infer_epsilon(x);
  for (double k : {1e-3, 0.37, 5.0, 1e4}) {
    Matrix scaled = x.values();
    for (std::size_t t = 0; t < x.horizon(); ++t) scaled(t, 2) *= k;
    const auto info = infer_epsilon(build_instance(scaled));
    CHECK(std::abs(info.epsilon_inferred - base.epsilon_inferred) <= 1e-12);
    CHECK(std::abs(info.c_inferred - base.c_inferred) <= 1e-12);
  }
}

TEST_CASE("monopolistic utilities cover every round") {
  const auto x = gen_random_veps(4, 500, 0.3, 0.4, 15);
  double total = 0.0, floor = 0.0;
  for (std::size_t i = 0; i < x.agents(); ++i) total += monopolistic_utility(x, i);
  for (std::size_t t = 0; t < x.horizon(); ++t) {
    const auto row = x.round_values(t);
    floor = t == 0 ? *std::max_element(row.begin(), row.end())
                   : std::min(floor, *std::max_element(row.begin(), row.end()));
  }
  CHECK(total >= double(x.horizon()) * floor);
  CHECK(floor > 0.0);
}
