#include "fairalloc/instance_io.hpp"

#include "fairalloc/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace fairalloc {

using nlohmann::json;

std::string format_double(double x) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
  if (ec != std::errc{}) throw Error(ErrorCode::ParseError, "cannot format value");
  return {buffer, end};
}

namespace {

json optional_json(std::optional<double> x) { return x ? json(*x) : json(nullptr); }

std::optional<double> optional_from(const json& header, const char* key) {
  if (!header.contains(key) || header.at(key).is_null()) return std::nullopt;
  return header.at(key).get<double>();
}

double parse_double(std::string_view token, std::size_t line) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  return x;
}

}  // namespace

std::string serialize_instance(const Instance& instance) {
  json meta;
  meta["generator"] = instance.meta().generator;
  meta["params"] = json::array();
  for (const auto& [name, value] : instance.meta().params)
    meta["params"].push_back(json::array({name, value}));
  meta["flags"] = instance.meta().flags;

  json header;
  header["format"] = kInstanceFormat;
  header["version"] = kInstanceFormatVersion;
  header["n"] = instance.agents();
  header["T"] = instance.horizon();
  header["weights"] = std::vector<double>(instance.weights().begin(), instance.weights().end());
  header["epsilon"] = optional_json(instance.epsilon());
  header["c"] = optional_json(instance.c());
  header["meta"] = meta;

  std::string out = header.dump();
  out += '\n';
  for (std::size_t t = 0; t < instance.horizon(); ++t) {
    const auto row = instance.round_values(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

Instance parse_instance(std::string_view text) {
  const auto header_end = text.find('\n');
  if (header_end == std::string_view::npos)
    throw Error(ErrorCode::ParseError, "missing header line");
  json header;
  try {
    header = json::parse(text.substr(0, header_end));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("header: ") + e.what());
  }
  if (header.value("format", std::string{}) != kInstanceFormat)
    throw Error(ErrorCode::ParseError, "not a fairalloc instance file");
  if (header.value("version", 0) != kInstanceFormatVersion)
    throw Error(ErrorCode::ParseError, "unsupported instance version");

  std::size_t n = 0, horizon = 0;
  std::vector<double> weights;
  InstanceMeta meta;
  try {
    n = header.at("n").get<std::size_t>();
    horizon = header.at("T").get<std::size_t>();
    weights = header.at("weights").get<std::vector<double>>();
    if (header.contains("meta")) {
      const auto& m = header.at("meta");
      meta.generator = m.value("generator", std::string{});
      for (const auto& p : m.value("params", json::array()))
        meta.params.emplace_back(p.at(0).get<std::string>(), p.at(1).get<double>());
      meta.flags = m.value("flags", std::vector<std::string>{});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("header: ") + e.what());
  }

  Matrix values(horizon, n);
  std::size_t pos = header_end + 1;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto line_end = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, line_end == std::string_view::npos ? text.size() - pos : line_end - pos);
    if (pos >= text.size())
      throw Error(ErrorCode::ParseError, "expected " + std::to_string(horizon) + " rows");
    std::size_t i = 0, cursor = 0;
    while (cursor < line.size()) {
      while (cursor < line.size() && line[cursor] == ' ') ++cursor;
      if (cursor >= line.size()) break;
      const auto token_end = std::min(line.find(' ', cursor), line.size());
      if (i >= n)
        throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(t) + " too long");
      values(t, i++) = parse_double(line.substr(cursor, token_end - cursor), t + 2);
      cursor = token_end;
    }
    if (i != n)
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(t) + " has " +
                                                    std::to_string(i) + " values");
    pos = line_end == std::string_view::npos ? text.size() : line_end + 1;
  }
  return build_instance(std::move(values), std::move(weights), optional_from(header, "epsilon"),
                        optional_from(header, "c"), std::move(meta));
}

void write_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << serialize_instance(instance);
}

Instance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

}  // namespace fairalloc
