#include "fairalloc/report_io.hpp"

#include "detail/json_util.hpp"
#include "fairalloc/error.hpp"
#include "fairalloc/instance_io.hpp"

#include <cmath>

namespace fairalloc {

namespace {

std::string cell(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "";
  return format_double(x);
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Matrix& values, const PolicyRun& run) {
  const std::size_t horizon = values.rows();
  const std::size_t n = values.cols();
  if (run.allocation.horizon() != horizon || run.utility_trajectory.rows() != horizon)
    throw Error(ErrorCode::DimensionMismatch, "run does not match the value matrix");
  const bool paced = run.multiplier_trajectory.has_value();
  out << kTrajectorySchema << '\n' << kTrajectoryHeader << '\n';
  std::string line;
  for (std::size_t t = 0; t < horizon; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      line.clear();
      line += std::to_string(t + 1);
      line += ',';
      line += std::to_string(i);
      line += ',';
      line += cell(values(t, i));
      line += ',';
      line += run.allocation.fraction(t, i) == 1.0 ? '1' : '0';
      line += ',';
      line += cell(run.utility_trajectory(t, i));
      line += ',';
      if (paced) {
        line += cell((*run.avg_utility_trajectory)(t, i));
        line += ',';
        line += cell((*run.multiplier_trajectory)(t, i));
        line += ',';
        line += (*run.multiplier_from_zero)[t][i] ? '1' : '0';
      } else {
        line += ",,";
      }
      out << line << '\n';
    }
}

void write_equilibrium_csv(std::ostream& out, const EquilibriumResult& result) {
  out << kEquilibriumSchema << "\nt,agent,fraction,price\n";
  for (std::size_t t = 0; t < result.fractions.rows(); ++t)
    for (std::size_t i = 0; i < result.fractions.cols(); ++i)
      out << t + 1 << ',' << i << ',' << cell(result.fractions(t, i)) << ','
          << cell(result.prices[t]) << '\n';
}

namespace detail {

nlohmann::json report_json(const MetricsReport& r, const ReportContext& context) {
  using nlohmann::json;
  json j;
  j["schema"] = kReportSchema;
  j["version"] = kReportVersion;
  j["label"] = context.label;
  j["generator"] = context.generator;
  j["seed"] = context.seed ? json(*context.seed) : json(nullptr);
  j["log_base"] = "e";
  j["agents"] = r.agents;
  j["horizon"] = r.horizon;
  j["policy"] = r.policy;
  j["epsilon_used"] = number(r.epsilon_used);
  j["c_used"] = number(r.c_used);
  j["ell"] = number(r.ell);
  j["ell_valid_envy"] = r.ell_valid_envy;
  j["ell_valid_cr"] = r.ell_valid_cr;

  json envy = json::array();
  for (std::size_t i = 0; i < r.envy_matrix.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < r.envy_matrix.cols(); ++k) row.push_back(number(r.envy_matrix(i, k)));
    envy.push_back(row);
  }
  j["envy_matrix"] = envy;
  j["zero_utility"] = r.zero_utility;
  j["max_envy"] = number(r.max_envy);
  j["utilities"] = r.utilities;
  j["nash_welfare"] = number(r.nash_welfare);
  j["cr_vs_divisible"] = number(r.cr_vs_divisible);
  j["cr_vs_divisible_inverse"] = number(r.cr_vs_divisible_inverse);
  j["cr_vs_integral"] = number(r.cr_vs_integral);
  j["r_delta"] = number(r.r_delta);
  j["proportionality"] = r.proportionality;
  if (r.proportionality_result)
    j["proportionality_check"] = {{"d_measured", number(r.proportionality_result->d_measured)},
                                  {"passes", r.proportionality_result->passes}};
  else
    j["proportionality_check"] = nullptr;
  j["bound_envy"] = number(r.bound_envy);
  j["bound_cr"] = number(r.bound_cr);
  j["bound_r_delta"] = number(r.bound_r_delta);
  j["cr_over_nfact"] = number(r.cr_over_nfact);
  j["max_items_envied_ratio"] = number(r.max_items_envied_ratio);
  j["oracle_kkt_residual"] = number(r.oracle_kkt_residual);
  j["oracle_budget_error"] = number(r.oracle_budget_error);
  const auto& a = r.assumption_flags;
  j["assumption_flags"] = {{"epsilon_inferred", number(a.epsilon_inferred)},
                           {"c_inferred", number(a.c_inferred)},
                           {"satisfies_assumption1", a.satisfies_assumption1},
                           {"satisfies_assumption3", a.satisfies_assumption3},
                           {"monopolistic_utilities", a.monopolistic_utilities}};
  j["agent_starvation"] = r.agent_starvation;
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"measured", number(c.measured)},
                      {"bound", number(c.bound)},
                      {"slack", number(c.slack)},
                      {"margin", number(c.margin())},
                      {"passed", c.passed}});
  j["checks"] = checks;
  j["all_checks_pass"] = r.all_checks_pass();
  return j;
}

}  // namespace detail

std::string serialize_report(const MetricsReport& report, const ReportContext& context) {
  return detail::report_json(report, context).dump(2);
}

}  // namespace fairalloc
