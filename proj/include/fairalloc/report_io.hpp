#pragma once

#include "fairalloc/algorithms.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/oracle.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace fairalloc {

// Trajectory CSV. The first line is always the schema line; then a header row and
// one row per (round, agent), t starting at 1. ubar, beta and beta_clamped_zero
// are blank for policies without pacing state. beta is the multiplier the round
// was bid with; beta_clamped_zero marks multipliers that came from B_i / 0.
inline constexpr std::string_view kTrajectorySchema = "# schema: fairalloc-trajectory v1";
inline constexpr std::string_view kTrajectoryHeader =
    "t,agent,value,allocated,utility,ubar,beta,beta_clamped_zero";

void write_trajectory_csv(std::ostream& out, const Matrix& values, const PolicyRun& run);

// Equilibrium CSV: schema line, then t,agent,fraction,price.
inline constexpr std::string_view kEquilibriumSchema = "# schema: fairalloc-equilibrium v1";
void write_equilibrium_csv(std::ostream& out, const EquilibriumResult& result);

// Report JSON. Optional fields are null when absent; infinities are the string "inf".
inline constexpr std::string_view kReportSchema = "fairalloc-report";
inline constexpr int kReportVersion = 1;

struct ReportContext {
  std::string generator;
  std::optional<std::uint64_t> seed;
  std::string label;
};

std::string serialize_report(const MetricsReport& report, const ReportContext& context = {});

}  // namespace fairalloc
