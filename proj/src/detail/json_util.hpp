#pragma once

#include "fairalloc/metrics.hpp"
#include "fairalloc/report_io.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>

namespace fairalloc::detail {

inline nlohmann::json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline nlohmann::json number(const std::optional<double>& x) {
  return x ? number(*x) : nlohmann::json(nullptr);
}

nlohmann::json report_json(const MetricsReport& report, const ReportContext& context);

}  // namespace fairalloc::detail
