#include "fairalloc/cli.hpp"
#include "fairalloc/instance_io.hpp"

#include <json.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fairalloc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fairalloc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generate writes parseable, reproducible instances") {
  const auto dir = scratch("generate");
  auto r = cli({"generate", "envy_table", "epsilon=0.1", "a=1.05", "T0=10000", "-o",
                (dir / "table.fai").string()});
  CHECK(r.code == kExitPass);
  CHECK(read_instance(dir / "table.fai").horizon() > 20000);

  for (const char* name : {"a.fai", "b.fai"})
    CHECK(cli({"generate", "diag_stochastic", "n=4", "T=100000", "--seed", "7", "-o",
               (dir / name).string()})
              .code == kExitPass);
  CHECK(slurp(dir / "a.fai") == slurp(dir / "b.fai"));

  r = cli({"generate", "exponential_envy", "T=10", "a=1.5", "-o", (dir / "bad.fai").string()});
  CHECK(r.code == kExitInputError);
  CHECK(cli({"generate", "no_such_generator"}).code == kExitInputError);
  CHECK(cli({"generate", "uniform_eps", "n=2"}).code == kExitInputError);
  CHECK(cli({"frobnicate"}).code == kExitInputError);
}

TEST_CASE("run a config file") {
  const auto dir = scratch("run");
  {
    std::ofstream cfg(dir / "identity.json");
    cfg << R"({"name": "identity", "instance": ")" << (dir / "identity.fai").generic_string()
        << R"(", "policy": {"kind": "greedy"}, "oracle": "both"})";
    std::ofstream inst(dir / "identity.fai");
    inst << R"({"format":"fairalloc-instance","version":1,"n":2,"T":2,"weights":[1,1],"epsilon":null,"c":null,"meta":{"generator":"","params":[],"flags":[]}})"
         << "\n1 0\n0 1\n";
  }
  auto r = cli({"run", (dir / "identity.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == kExitPass);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "seed_0.report.json"));
  CHECK(report["max_envy"] == 0.0);
  CHECK(report["cr_vs_divisible"].get<double>() == doctest::Approx(1.0));
  CHECK(slurp(dir / "out" / "seed_0.csv").rfind("# schema: fairalloc-trajectory v1\n", 0) == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));

  CHECK(cli({"report", (dir / "out").string()}).code == kExitPass);
  CHECK(fs::exists(dir / "out" / "aggregate.json"));
}

TEST_CASE("run reports pathologies and failures through exit codes") {
  const auto dir = scratch("pathology");
  {
    std::ofstream cfg(dir / "ex3.json");
    cfg << R"({"name": "ex3",
      "generator": {"name": "uniform_eps", "params": {"n": 2, "T": 1000, "epsilon": 0.5}},
      "policy": {"kind": "pace", "ell": 0.6, "r": 1},
      "oracle": "none"})";
  }
  auto r = cli({"run", (dir / "ex3.json").string(), "--out", (dir / "out").string()});
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "seed_0.report.json"));
  CHECK(report["agent_starvation"] == true);
  CHECK(report["ell_valid_envy"] == false);
  CHECK((r.code == kExitPass || r.code == kExitBoundFailed));

  {
    std::ofstream cfg(dir / "stochastic.json");
    cfg << R"({"generator": {"name": "random_veps", "params": {"n": 2, "T": 10, "epsilon": 0.5}},
      "policy": {"kind": "greedy"}, "seeds": []})";
  }
  CHECK(cli({"run", (dir / "stochastic.json").string()}).code == kExitInputError);
  CHECK(cli({"run", (dir / "missing.json").string()}).code == kExitInputError);

  {
    std::ofstream cfg(dir / "starved.json");
    cfg << R"({"generator": {"name": "random_veps", "params": {"n": 3, "T": 50, "epsilon": 0.5}},
      "policy": {"kind": "greedy"}, "seeds": [1],
      "oracle_options": {"method": "proportional_response", "tol": 1e-14, "max_iters": 1}})";
  }
  CHECK(cli({"run", (dir / "starved.json").string(), "--out", (dir / "o2").string()}).code ==
        kExitNoConvergence);
}

TEST_CASE("seed and oracle overrides") {
  const auto dir = scratch("overrides");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"generator": {"name": "random_veps", "params": {"n": 2, "T": 8, "epsilon": 0.5}},
      "policy": {"kind": "seeded_greedy", "delta": 1}, "seeds": [1], "oracle": "none"})";
  }
  auto r = cli({"run", (dir / "cfg.json").string(), "--seeds", "3-5", "--oracle", "integral",
                "--out", (dir / "out").string()});
  CHECK(r.code == kExitPass);
  for (int s : {3, 4, 5}) {
    const auto j = nlohmann::json::parse(slurp(dir / "out" / ("seed_" + std::to_string(s) + ".report.json")));
    CHECK(j["seed"] == s);
    CHECK(j["cr_vs_integral"].is_number());
    CHECK(j["cr_vs_divisible"].is_null());
  }
  CHECK(cli({"run", (dir / "cfg.json").string(), "--oracle", "psychic"}).code == kExitInputError);
}

TEST_CASE("adversary subcommand") {
  const auto dir = scratch("adversary");
  auto r = cli({"adversary", "--policy", "greedy", "-n", "1", "--out", (dir / "one").string()});
  CHECK(r.code == kExitPass);
  auto j = nlohmann::json::parse(slurp(dir / "one" / "report.json"));
  CHECK(j["cr_vs_divisible"].get<double>() == doctest::Approx(1.0));

  r = cli({"adversary", "--policy", "greedy", "-n", "3", "--ratio", "10", "--base", "10", "--out",
           (dir / "three").string()});
  j = nlohmann::json::parse(slurp(dir / "three" / "report.json"));
  CHECK(j["cr_vs_divisible"].get<double>() >= 0.9 * std::cbrt(6.0));
  CHECK(read_instance(dir / "three" / "instance.fai").horizon() == 1110);

  CHECK(cli({"adversary", "--policy", "pace", "-n", "2", "--phases", "10,100", "--out",
             (dir / "pace").string()})
            .code != kExitInputError);
  CHECK(cli({"adversary", "-n", "2", "--phases", "10", "--out", (dir / "bad").string()}).code ==
        kExitInputError);
}

TEST_CASE("named experiments") {
  const auto dir = scratch("named");
  auto r = cli({"run", "seeded-rdelta", "--out", dir.string()});
  CHECK(r.code == kExitPass);
  CHECK(r.out.find("[PASS] C07") != std::string::npos);
  CHECK(fs::exists(dir / "criterion_7.json"));
  CHECK(cli({"selftest", "--criteria", "1,9"}).code == kExitPass);
}
