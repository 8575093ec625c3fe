#include "fairalloc/run.hpp"

#include "fairalloc/error.hpp"

#include <cmath>
#include <string>

namespace fairalloc {

RunState RunState::fresh(std::size_t agents) {
  RunState state;
  state.utilities.assign(agents, 0.0);
  return state;
}

Allocation Allocation::integral(std::size_t agents, std::vector<std::size_t> winners) {
  Allocation allocation;
  allocation.kind = AllocationKind::integral;
  allocation.agents = agents;
  allocation.winners = std::move(winners);
  return allocation;
}

Allocation Allocation::fractional(Matrix fractions) {
  Allocation allocation;
  allocation.kind = AllocationKind::fractional;
  allocation.agents = fractions.cols();
  allocation.fractions = std::move(fractions);
  return allocation;
}

void Allocation::validate(double tolerance) const {
  if (kind == AllocationKind::integral) {
    for (std::size_t t = 0; t < winners.size(); ++t)
      if (winners[t] >= agents)
        throw Error(ErrorCode::InvalidParameters, "round " + std::to_string(t) + " winner " +
                                                      std::to_string(winners[t]));
    return;
  }
  for (std::size_t t = 0; t < fractions.rows(); ++t) {
    double total = 0.0;
    for (double x : fractions.row(t)) {
      if (x < -tolerance || !std::isfinite(x))
        throw Error(ErrorCode::InvalidParameters, "negative fraction in round " + std::to_string(t));
      total += x;
    }
    if (total > 1.0 + tolerance)
      throw Error(ErrorCode::InvalidParameters, "round " + std::to_string(t) + " over-allocated");
  }
}

std::vector<double> realized_utilities(const Matrix& values, const Allocation& allocation) {
  if (allocation.horizon() != values.rows() || allocation.agents != values.cols())
    throw Error(ErrorCode::DimensionMismatch, "allocation does not match value matrix");
  std::vector<double> utilities(values.cols(), 0.0);
  if (allocation.kind == AllocationKind::integral) {
    for (std::size_t t = 0; t < values.rows(); ++t)
      utilities[allocation.winners[t]] += values(t, allocation.winners[t]);
  } else {
    for (std::size_t t = 0; t < values.rows(); ++t)
      for (std::size_t i = 0; i < values.cols(); ++i)
        utilities[i] += allocation.fractions(t, i) * values(t, i);
  }
  return utilities;
}

RunTrace run_online(ValueSource& source, const StepFn& step, RunState initial, bool record_pace) {
  const std::size_t n = source.agents();
  const std::size_t horizon = source.horizon();
  if (initial.utilities.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "run state does not match the value source");

  RunTrace trace;
  trace.realized_values = Matrix(horizon, n);
  trace.utility_trajectory = Matrix(horizon, n);
  if (record_pace) {
    trace.avg_utility_trajectory = Matrix(horizon, n);
    trace.multiplier_trajectory = Matrix(horizon, n);
    trace.multiplier_from_zero = std::vector<std::vector<bool>>(horizon);
  }
  std::vector<std::size_t> winners;
  winners.reserve(horizon);

  RunState state = std::move(initial);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto values = source.values(t);
    std::copy(values.begin(), values.end(), trace.realized_values.row(t).begin());
    if (record_pace) {
      // Multipliers in effect for this round's bids.
      for (std::size_t i = 0; i < n; ++i)
        (*trace.multiplier_trajectory)(t, i) =
            state.multipliers.empty() ? std::nan("") : state.multipliers[i];
      (*trace.multiplier_from_zero)[t] =
          state.multiplier_from_zero.empty() ? std::vector<bool>(n, false)
                                             : state.multiplier_from_zero;
    }
    const std::size_t winner = step(state, trace.realized_values.row(t));
    winners.push_back(winner);
    std::copy(state.utilities.begin(), state.utilities.end(),
              trace.utility_trajectory.row(t).begin());
    if (record_pace && !state.avg_utility.empty())
      std::copy(state.avg_utility.begin(), state.avg_utility.end(),
                trace.avg_utility_trajectory->row(t).begin());
    source.observe(t, winner, state);
  }
  trace.allocation = Allocation::integral(n, std::move(winners));
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace fairalloc
