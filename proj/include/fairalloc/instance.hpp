#pragma once

#include "fairalloc/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairalloc {

/// Provenance recorded by generators; carried through serialization.
struct InstanceMeta {
  std::string generator;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::string> flags;

  bool operator==(const InstanceMeta&) const = default;
};

/// Immutable valuation matrix (T rounds x n agents) with agent weights and
/// optional declared input-class parameters. Construct through build_instance.
class Instance {
public:
  std::size_t agents() const noexcept { return values_.cols(); }
  std::size_t horizon() const noexcept { return values_.rows(); }

  const Matrix& values() const noexcept { return values_; }
  std::span<const double> round_values(std::size_t t) const { return values_.row(t); }
  double value(std::size_t t, std::size_t i) const { return values_(t, i); }

  std::span<const double> weights() const noexcept { return weights_; }
  std::optional<double> epsilon() const noexcept { return epsilon_; }
  std::optional<double> c() const noexcept { return c_; }
  const InstanceMeta& meta() const noexcept { return meta_; }

  bool operator==(const Instance&) const = default;

private:
  friend Instance build_instance(Matrix, std::vector<double>, std::optional<double>,
                                 std::optional<double>, InstanceMeta);
  Instance() = default;

  Matrix values_;
  std::vector<double> weights_;
  std::optional<double> epsilon_;
  std::optional<double> c_;
  InstanceMeta meta_;
};

/// Validates and freezes an instance.
///
/// Throws DimensionMismatch, NonFiniteValue, NegativeValue, AllZeroRound,
/// InvalidWeight, InvalidEpsilon (declared value outside (0,1]) and
/// DeclaredEpsilonViolated (a normalized nonzero value below the declared epsilon).
Instance build_instance(Matrix values, std::vector<double> weights,
                        std::optional<double> epsilon = std::nullopt,
                        std::optional<double> c = std::nullopt, InstanceMeta meta = {});

/// Equal unit weights.
Instance build_instance(Matrix values);

struct InputClassReport {
  double epsilon_inferred = 0.0;
  bool satisfies_assumption1 = false;
  bool satisfies_assumption3 = false;
  std::vector<double> monopolistic_utilities;  // raw V_i
  double c_inferred = 0.0;
};

/// Infers epsilon and c from per-agent max-normalized values. Assumption flags are
/// checked against the declared epsilon / c when present, otherwise they hold
/// trivially for the inferred values. Throws AgentAllZero.
InputClassReport infer_epsilon(const Instance& instance);

/// V_i, the agent's total value over the whole horizon. Throws IndexOutOfRange.
double monopolistic_utility(const Instance& instance, std::size_t agent);

}  // namespace fairalloc
