#pragma once

#include "fairalloc/instance.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace fairalloc {

// Instance text format:
//   line 1: JSON header {"format":"fairalloc-instance","version":1,"n":..,"T":..,
//           "weights":[..],"epsilon":x|null,"c":x|null,"meta":{..}}
//   lines 2..T+1: n space-separated values, shortest round-trip decimal form.
// parse_instance(serialize_instance(x)) == x bit for bit.

inline constexpr std::string_view kInstanceFormat = "fairalloc-instance";
inline constexpr int kInstanceFormatVersion = 1;

std::string serialize_instance(const Instance& instance);
Instance parse_instance(std::string_view text);

void write_instance(const Instance& instance, const std::filesystem::path& path);
Instance read_instance(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace fairalloc
