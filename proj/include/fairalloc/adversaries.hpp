#pragma once

#include "fairalloc/algorithms.hpp"
#include "fairalloc/instance.hpp"
#include "fairalloc/run.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fairalloc {

/// Two agents: agent 0 values every round 1, agent 1 values round t at a^{t-T}
/// (1-based t). Values below 1e-300 are stored as 0 and flagged. Requires a > 2.
Instance gen_exponential_envy(std::size_t horizon, double base);

struct EnvyTableLayout {
  std::size_t k = 0;          // number of B (and C) phases
  double base = 1.0;          // effective ratio, (1/eps)^{1/k}
  std::size_t a_length = 0;   // A1 and A2
  std::size_t b_length = 0;   // each B_m
  std::size_t c_length = 0;   // each C_m
  std::vector<std::size_t> phase_ends;  // cumulative end round of each phase
};

/// Phase layout of the two-agent worst-case envy construction.
EnvyTableLayout envy_table_layout(std::size_t t0, double base, double epsilon);

/// Worst-case envy construction: phases A1 (0,1), A2 (eps,1), B_m (eps a^m, 1),
/// C_m (eps a^m, eps), m = 1..k with k = round(ln(1/eps)/ln a).
Instance gen_envy_table(std::size_t t0, double base, double epsilon);

/// Agents 0 and 1 value the first ceil((1 - ell/eps) T) rounds 0 and eps afterwards;
/// the others value every round 1. Requires n > 2 and 0 < ell < eps.
Instance gen_sublinear_pathology(std::size_t agents, std::size_t horizon, double epsilon,
                                 double ell);

/// Every agent values every round eps.
Instance gen_uniform_eps(std::size_t agents, std::size_t horizon, double epsilon);

/// Each round draws a type j uniformly; agent j values it 1, others `off_value`.
Instance gen_diag_stochastic(std::size_t agents, std::size_t horizon, double off_value,
                             std::uint64_t seed);

/// Each value is 0 with probability 1-density, else uniform on [eps, 1]. All-zero
/// rounds are resampled; if an agent ends with no nonzero value the whole matrix is
/// redrawn. Throws InfeasibleDensity when either rejection loop exceeds its budget.
Instance gen_random_veps(std::size_t agents, std::size_t horizon, double epsilon,
                         double density, std::uint64_t seed);

/// Uniform [0, 1] values (no lower bound on nonzero values), for the seeded criterion.
Instance gen_random_unit(std::size_t agents, std::size_t horizon, std::uint64_t seed);

/// Adaptive phase adversary. Each round every active agent sees value 1, the rest 0.
/// At the end of each phase the active agent with the lowest utility (then lowest
/// index) is eliminated; the last phase eliminates nobody.
class AdaptiveAdversary final : public ValueSource {
public:
  AdaptiveAdversary(std::size_t agents, std::vector<std::size_t> phase_lengths);

  std::size_t agents() const override { return agents_; }
  std::size_t horizon() const override { return horizon_; }
  std::span<const double> values(std::size_t t) override;
  void observe(std::size_t t, std::size_t winner, const RunState& state) override;

  const std::vector<std::size_t>& phase_lengths() const noexcept { return phase_lengths_; }
  std::size_t phase_index() const noexcept { return phase_; }
  const std::vector<bool>& active() const noexcept { return active_; }
  std::size_t active_count() const;
  /// Agents in elimination order; the survivor is appended after the final phase.
  const std::vector<std::size_t>& elimination_order() const noexcept { return eliminated_; }

private:
  std::size_t agents_;
  std::vector<std::size_t> phase_lengths_;
  std::vector<std::size_t> phase_ends_;
  std::size_t horizon_ = 0;
  std::size_t phase_ = 0;
  std::vector<bool> active_;
  std::vector<std::size_t> eliminated_;
  std::vector<double> row_;
};

/// Throws InvalidPhases unless lengths are positive, strictly increasing and one per agent.
AdaptiveAdversary adaptive_phase_adversary(std::size_t agents,
                                           std::vector<std::size_t> phase_lengths);

/// Geometric phases base, base*ratio, ... (one per agent).
std::vector<std::size_t> geometric_phases(std::size_t agents, std::size_t base, double ratio);

struct AdversaryRun {
  PolicyRun run;
  Instance realized;  // realized values frozen for the offline oracle
  std::vector<std::size_t> elimination_order;
};

AdversaryRun run_adaptive(AdaptiveAdversary& adversary, const PolicyConfig& config);

}  // namespace fairalloc
