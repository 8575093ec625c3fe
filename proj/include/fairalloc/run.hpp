#pragma once

#include "fairalloc/instance.hpp"
#include "fairalloc/matrix.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fairalloc {

/// Multiplier bounds [a, b] for PACE.
struct Projection {
  double a = 0.0;
  double b = 0.0;
};

/// Per-run online state. `round` counts completed rounds.
struct RunState {
  std::vector<double> utilities;        // U_i^t
  std::size_t round = 0;
  std::vector<double> avg_utility;      // PACE running average (u bar)
  std::vector<double> multipliers;      // PACE pacing multipliers for the next round
  std::vector<bool> multiplier_from_zero;  // multiplier came from B_i / 0
  double seed_utility = 0.0;            // seeded greedy only
  std::optional<Projection> projection;

  static RunState fresh(std::size_t agents);
};

enum class AllocationKind { integral, fractional };

/// Integral allocations store one winner per round; fractional ones a T x n matrix.
struct Allocation {
  AllocationKind kind = AllocationKind::integral;
  std::size_t agents = 0;
  std::vector<std::size_t> winners;
  Matrix fractions;

  static Allocation integral(std::size_t agents, std::vector<std::size_t> winners);
  static Allocation fractional(Matrix fractions);

  std::size_t horizon() const noexcept {
    return kind == AllocationKind::integral ? winners.size() : fractions.rows();
  }
  double fraction(std::size_t t, std::size_t i) const {
    if (kind == AllocationKind::integral) return winners[t] == i ? 1.0 : 0.0;
    return fractions(t, i);
  }
  /// Throws InvalidParameters if a round is over-allocated or a winner is out of range.
  void validate(double tolerance = 1e-9) const;
};

/// Utilities U_i = sum_t x_i^t v_i^t of an allocation against a value matrix.
std::vector<double> realized_utilities(const Matrix& values, const Allocation& allocation);

/// Source of per-round values. Static instances replay rows; adaptive adversaries
/// look at the realized winners before producing the next row.
class ValueSource {
public:
  virtual ~ValueSource() = default;
  virtual std::size_t agents() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual std::span<const double> values(std::size_t t) = 0;
  virtual void observe(std::size_t t, std::size_t winner, const RunState& state) {
    (void)t, (void)winner, (void)state;
  }
};

class InstanceSource final : public ValueSource {
public:
  explicit InstanceSource(const Instance& instance) : instance_(&instance) {}
  std::size_t agents() const override { return instance_->agents(); }
  std::size_t horizon() const override { return instance_->horizon(); }
  std::span<const double> values(std::size_t t) override { return instance_->round_values(t); }

private:
  const Instance* instance_;
};

/// A step function decides the round's winner and updates the state in place.
using StepFn = std::function<std::size_t(RunState&, std::span<const double> values)>;

struct RunTrace {
  Allocation allocation;
  Matrix realized_values;            // the values actually presented, T x n
  Matrix utility_trajectory;         // U after each round, T x n
  std::optional<Matrix> avg_utility_trajectory;
  std::optional<Matrix> multiplier_trajectory;  // multiplier used in each round
  std::optional<std::vector<std::vector<bool>>> multiplier_from_zero;
  RunState final_state;
};

/// The shared online loop: query values, decide, record. Strictly sequential.
RunTrace run_online(ValueSource& source, const StepFn& step, RunState initial,
                    bool record_pace = false);

}  // namespace fairalloc
