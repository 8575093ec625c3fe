#include "fairalloc/cli.hpp"

#include "detail/json_util.hpp"
#include "fairalloc/adversaries.hpp"
#include "fairalloc/error.hpp"
#include "fairalloc/experiments.hpp"
#include "fairalloc/instance_io.hpp"
#include "fairalloc/report_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fairalloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

void print_input_class(std::ostream& out, const Instance& instance) {
  const auto info = infer_epsilon(instance);
  out << "agents " << instance.agents() << ", rounds " << instance.horizon() << '\n'
      << "epsilon inferred " << info.epsilon_inferred << ", c inferred " << info.c_inferred << '\n'
      << "declared epsilon "
      << (instance.epsilon() ? format_double(*instance.epsilon()) : std::string("none"))
      << ", assumption 1 " << (info.satisfies_assumption1 ? "holds" : "fails")
      << ", assumption 3 " << (info.satisfies_assumption3 ? "holds" : "fails") << '\n';
}

void print_criterion(std::ostream& out, const CriterionResult& r) {
  char line[64];
  std::snprintf(line, sizeof line, "[%s] C%02d %.1fs/%gs ", r.passed ? "PASS" : "FAIL", r.id,
                r.seconds, r.time_limit);
  out << line << r.title << ": " << r.detail << (r.within_time() ? "" : " (over time limit)")
      << '\n';
}

int run_criteria(const std::vector<int>& ids, const std::optional<fs::path>& out_dir,
                 std::ostream& out) {
  ExperimentContext context;
  context.output_dir = out_dir;
  bool ok = true;
  for (int id : ids) {
    const auto r = run_criterion(id, context);
    print_criterion(out, r);
    ok = ok && r.passed;
  }
  return ok ? kExitPass : kExitBoundFailed;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos) {
        const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw Error(ErrorCode::ConfigError, "empty seed range " + item);
        for (auto x = lo; x <= hi; ++x) seeds.push_back(x);
      } else {
        seeds.push_back(std::stoull(item));
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "bad seed list '" + text + "'");
    }
  }
  if (seeds.empty()) throw Error(ErrorCode::ConfigError, "empty seed list");
  return seeds;
}

// ---- subcommands ----

struct GenerateArgs {
  std::string generator;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
  GeneratorSpec spec{args.generator, {}};
  for (const auto& p : args.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "expected key=value, got " + p);
    try {
      spec.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "bad number in " + p);
    }
  }
  const Instance instance = generate(spec, args.seed);
  if (args.output.empty() || args.output == "-") {
    out << serialize_instance(instance);
  } else {
    write_instance(instance, args.output);
    print_input_class(out, instance);
  }
  return kExitPass;
}

struct RunArgs {
  std::string target;
  std::string seeds;
  std::string out_dir;
  std::string oracle;
};

int cmd_run(const RunArgs& args, std::ostream& out) {
  if (!fs::is_regular_file(args.target)) {
    const auto names = named_experiments();
    if (std::find(names.begin(), names.end(), args.target) == names.end())
      throw Error(ErrorCode::ConfigError, "no config file or named experiment '" + args.target + "'");
    const fs::path dir = args.out_dir.empty() ? fs::path("out") / args.target : fs::path(args.out_dir);
    return run_criteria(named_experiment_criteria(args.target), dir, out);
  }
  auto config = parse_experiment_config(read_file(args.target));
  if (!args.seeds.empty()) config.seeds = parse_seed_list(args.seeds);
  if (!args.out_dir.empty()) config.output_dir = args.out_dir;
  if (!args.oracle.empty()) config.oracle = parse_oracle_choice(args.oracle);
  const auto outcome = run_experiment(config);
  for (const auto& s : outcome.runs) {
    out << "seed " << s.seed << ": max envy " << s.report.max_envy;
    if (s.report.cr_vs_divisible) out << ", CR " << *s.report.cr_vs_divisible;
    for (const auto& c : s.report.checks)
      if (!c.passed) out << ", failed " << c.name << " (" << c.measured << " > " << c.bound + c.slack << ")";
    out << '\n';
  }
  out << "wrote " << (config.output_dir / "report.json").string() << '\n';
  return outcome.all_checks_pass() ? kExitPass : kExitBoundFailed;
}

struct AdversaryArgs {
  std::string policy = "greedy";
  std::size_t agents = 2;
  double ratio = 10.0;
  std::size_t base = 100;
  std::vector<std::size_t> phases;
  double delta = 1.0;
  std::optional<double> ell, r, a, b;
  std::string out_dir = "out/adversary";
};

int cmd_adversary(const AdversaryArgs& args, std::ostream& out) {
  PolicySpec spec;
  spec.config.kind = parse_policy_kind(args.policy);
  spec.config.delta = args.delta;
  if (spec.config.kind == PolicyKind::pace) {
    if (args.a && args.b) {
      spec.config.a = *args.a;
      spec.config.b = *args.b;
    } else {
      spec.ell = args.ell.value_or(kDefaultEllFraction * pace_ell_bound(args.agents, 1.0));
      spec.r = args.r.value_or(1.0);
    }
  }
  const auto phases = args.phases.empty() ? geometric_phases(args.agents, args.base, args.ratio)
                                          : args.phases;
  if (phases.size() != args.agents)
    throw Error(ErrorCode::ConfigError, "need one phase length per agent");

  // Policy bounds only depend on n and the weights; resolve them on a stand-in instance.
  Matrix unit(1, args.agents);
  for (std::size_t i = 0; i < args.agents; ++i) unit(0, i) = 1.0;
  ReportConfig rc;
  rc.policy = resolve_policy(spec, build_instance(unit), &rc.ell);

  auto adversary = adaptive_phase_adversary(args.agents, phases);
  const auto outcome = run_adaptive(adversary, rc.policy);
  const auto eq = divisible_nw_optimum(outcome.realized);
  const auto report = build_report(outcome.realized, outcome.run, {&eq, nullptr}, rc);

  const fs::path dir = args.out_dir;
  fs::create_directories(dir);
  write_instance(outcome.realized, dir / "instance.fai");
  {
    std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(csv, outcome.realized.values(), outcome.run);
  }
  json j = detail::report_json(report, {"adaptive_phase", std::nullopt, "adversary"});
  j["elimination_order"] = outcome.elimination_order;
  j["phases"] = phases;
  write_file(dir / "report.json", j.dump(2));

  const double cr = *report.cr_vs_divisible;
  out << "CR " << cr << " (" << cr / nfact_root(args.agents) << " x (n!)^(1/n)), elimination order";
  for (auto i : outcome.elimination_order) out << ' ' << i;
  out << "\nwrote " << dir.string() << '\n';
  return report.all_checks_pass() ? kExitPass : kExitBoundFailed;
}

int cmd_report(const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::ConfigError, "not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 12 &&
        name.compare(name.size() - 12, 12, ".report.json") == 0)
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  json runs = json::array();
  std::size_t failing = 0;
  for (const auto& path : files) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    if (j.value("schema", "") != kReportSchema) continue;
    const bool pass = j.value("all_checks_pass", false);
    failing += !pass;
    runs.push_back({{"file", fs::relative(path, dir).generic_string()},
                    {"policy", j.value("policy", "")},
                    {"max_envy", j.value("max_envy", json(nullptr))},
                    {"cr_vs_divisible", j.value("cr_vs_divisible", json(nullptr))},
                    {"all_checks_pass", pass}});
  }
  json summary{{"schema", "fairalloc-aggregate"},
               {"version", 1},
               {"reports", runs.size()},
               {"failing", failing},
               {"runs", runs},
               {"all_checks_pass", failing == 0}};
  write_file(fs::path(dir) / "aggregate.json", summary.dump(2));
  out << runs.size() << " reports, " << failing << " failing\n";
  return failing == 0 ? kExitPass : kExitBoundFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online fair allocation simulator", "fairalloc"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate and save an instance");
  generate_cmd->add_option("generator", gen.generator, "Generator name")->required();
  generate_cmd->add_option("params", gen.params, "Parameters as key=value");
  generate_cmd->add_option("--seed", gen.seed, "Seed for stochastic generators");
  generate_cmd->add_option("-o,--out", gen.output, "Output file ('-' for stdout)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a config file or a named experiment");
  run_cmd->add_option("config", run.target, "Config path or experiment name")->required();
  run_cmd->add_option("--seeds", run.seeds, "Seeds, e.g. 1,2,5-9");
  run_cmd->add_option("--out", run.out_dir, "Output directory");
  run_cmd->add_option("--oracle", run.oracle, "none | divisible | integral | both");

  AdversaryArgs adv;
  auto* adv_cmd = app.add_subcommand("adversary", "Run a policy against the adaptive adversary");
  adv_cmd->add_option("--policy", adv.policy, "greedy | seeded_greedy | pace | pace_unprojected");
  adv_cmd->add_option("-n,--agents", adv.agents, "Number of agents")->check(CLI::PositiveNumber);
  adv_cmd->add_option("--ratio", adv.ratio, "Phase length ratio");
  adv_cmd->add_option("--base", adv.base, "First phase length");
  adv_cmd->add_option("--phases", adv.phases, "Explicit phase lengths")->delimiter(',');
  adv_cmd->add_option("--delta", adv.delta, "Seed utility for seeded_greedy");
  adv_cmd->add_option("--ell", adv.ell, "PACE utility floor");
  adv_cmd->add_option("--r", adv.r, "PACE utility ceiling");
  adv_cmd->add_option("--a", adv.a, "PACE lower multiplier bound");
  adv_cmd->add_option("--b", adv.b, "PACE upper multiplier bound");
  adv_cmd->add_option("--out", adv.out_dir, "Output directory");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Re-aggregate report files in a directory");
  report_cmd->add_option("dir", report_dir, "Directory")->required();

  std::vector<int> criteria;
  std::string selftest_out;
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the acceptance criteria");
  selftest_cmd->add_option("--criteria", criteria, "Criterion ids (default: all)")->delimiter(',');
  selftest_cmd->add_option("--out", selftest_out, "Write per-criterion artifacts here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen, out);
    if (*run_cmd) return cmd_run(run, out);
    if (*adv_cmd) return cmd_adversary(adv, out);
    if (*report_cmd) return cmd_report(report_dir, out);
    if (criteria.empty())
      for (int id = 1; id <= kCriteriaCount; ++id) criteria.push_back(id);
    std::optional<fs::path> dir;
    if (!selftest_out.empty()) dir = selftest_out;
    return run_criteria(criteria, dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::NoConvergence ? kExitNoConvergence : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace fairalloc
