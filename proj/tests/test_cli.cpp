#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "stickycir/errors.hpp"
#include "stickycir/harness.hpp"

using namespace stickycir;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stickycir_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STICKYCIR_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig c;
  c.mu = {0.5, 2.0};
  c.alpha = {1.0, 20.0};
  c.potentials = {"quadratic", "cubic"};
  c.algorithms = {"mcmc", "ula"};
  c.master_seed = 18446744073709551557ull;
  c.x0 = 0.25;
  c.ula_boundary = "plain";
  const auto text = serialize_config(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize_config(parse_config(text)) == text);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config(R"({"mu": [1]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "mu": [1], "speed": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "mu": ["inf"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "mu": [-1]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "alpha": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "delta": 2.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "potentials": ["quartic"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "algorithms": ["hmc"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "n_chains": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "n_steps": 10, "warmup": 11})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "grid_n": 999})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"master_seed": 1, "ula_boundary": "half"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  const auto grid = parse_config(R"({"master_seed": 1, "potentials": ["quadratic"], "algorithms": ["exact"]})");
  CHECK_THROWS_AS(grid.validate_grid(), ConfigError);
}

TEST_CASE("grid expansion order and size") {
  auto c = parse_config(R"({"master_seed": 1, "mu": [0.5, 1, 2],
      "alpha": [1, 2, 5], "potentials": ["quadratic", "shifted_quadratic", "cubic"],
      "algorithms": ["mcmc", "ula"]})");
  const auto cells = expand_grid(c);
  CHECK(cells.size() == 54);
  CHECK(cells[0].potential == "quadratic");
  CHECK(cells[0].algorithm == Algorithm::Mcmc);
  CHECK(cells[1].algorithm == Algorithm::Ula);
  CHECK(cells[2].alpha == 2.0);
  CHECK(cells[6].mu == 1.0);
  CHECK(cells[18].potential == "shifted_quadratic");
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "NA");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("codes");
  CHECK(run_cli("") == 2);
  CHECK(run_cli("sample-mcmc --config " + (dir / "missing.json").string()) == 2);
  auto cfg = write_config(dir, R"({"master_seed": 1, "mu": ["inf"]})");
  CHECK(run_cli("sample-exact --config " + cfg.string()) == 2);
  cfg = write_config(dir, R"({"master_seed": 1, "potentials": ["quadratic"]})");
  CHECK(run_cli("sample-exact --config " + cfg.string() + " --out " + dir.string()) == 2);
  cfg = write_config(dir, R"({"master_seed": 1, "mu": [1, 2]})");
  CHECK(run_cli("sample-exact --config " + cfg.string() + " --out " + dir.string()) == 2);
}

TEST_CASE("zero steps writes header-only samples") {
  const auto dir = scratch("zero");
  const auto cfg = write_config(dir, R"({"master_seed": 3, "n_steps": 0, "potentials": ["quadratic"]})");
  REQUIRE(run_cli("sample-mcmc --config " + cfg.string() + " --out " + dir.string()) == 0);
  CHECK(slurp(dir / "samples.csv") == "chain,step,state\n");
  const auto summary = slurp(dir / "summary.csv");
  CHECK(line_count(summary) == 2);
  CHECK(summary.find(",NA,") != std::string::npos);
}

TEST_CASE("sample commands write their outputs") {
  const auto dir = scratch("sample");
  const auto cfg = write_config(dir, R"({"master_seed": 5, "n_steps": 500, "n_chains": 3,
      "potentials": ["shifted_quadratic"], "alpha": [5], "warmup": 50})");
  REQUIRE(run_cli("sample-ula --config " + cfg.string() + " --out " + dir.string()) == 0);
  CHECK(line_count(slurp(dir / "samples.csv")) == 1 + 3 * 500);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("potential,mu,alpha,algorithm,boundary_frac", 0) == 0);
  CHECK(summary.find("shifted_quadratic,1,5,ula,") != std::string::npos);
  CHECK(line_count(slurp(dir / "histogram.csv")) == 1 + 60);

  const auto quiet = scratch("sample_quiet");
  REQUIRE(run_cli("sample-ula --no-trace --config " + cfg.string() + " --out " + quiet.string()) == 0);
  CHECK_FALSE(fs::exists(quiet / "samples.csv"));
  CHECK(slurp(quiet / "summary.csv") == summary);
}

TEST_CASE("reruns are byte identical and thread-count independent") {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  const auto cfg = write_config(a, R"({"master_seed": 11, "n_steps": 2000, "warmup": 100, "n_chains": 4,
      "mu": [0.5, 2], "alpha": [2, 5], "potentials": ["zero", "quadratic"], "algorithms": ["mcmc", "ula"]})");
  REQUIRE(run_cli("experiment --config " + cfg.string() + " --out " + a.string() + " --threads 1") == 0);
  REQUIRE(run_cli("experiment --parallel-cells --config " + cfg.string() + " --out " + b.string() +
                  " --threads 4") == 0);
  for (const char* f : {"results.csv", "theory.csv", "histograms.csv"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(line_count(slurp(a / "results.csv")) == 1 + 16);
  CHECK(line_count(slurp(a / "timing.csv")) == 1 + 16);

  const auto c = scratch("rerun_c");
  REQUIRE(run_cli("experiment --config " + cfg.string() + " --out " + c.string() + " --seed 12") == 0);
  CHECK(slurp(a / "results.csv") != slurp(c / "results.csv"));
}

TEST_CASE("sample traces are reproducible") {
  const auto a = scratch("trace_a");
  const auto b = scratch("trace_b");
  const auto cfg = write_config(a, R"({"master_seed": 21, "n_steps": 1000})");
  REQUIRE(run_cli("sample-exact --config " + cfg.string() + " --out " + a.string() + " --threads 1") == 0);
  REQUIRE(run_cli("sample-exact --config " + cfg.string() + " --out " + b.string() + " --threads 3") == 0);
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
}

TEST_CASE("invariant command") {
  const auto dir = scratch("invariant");
  const auto cfg = write_config(dir, R"({"master_seed": 1, "mu": [0.5, 1, 2],
      "potentials": ["zero", "quadratic", "shifted_quadratic", "cubic"]})");
  REQUIRE(run_cli("invariant --config " + cfg.string() + " --out " + dir.string()) == 0);
  const auto theory = slurp(dir / "theory.csv");
  CHECK(line_count(theory) == 1 + 12);
  CHECK(theory.rfind("potential,mu,atom_mass,Z\n", 0) == 0);
  CHECK(line_count(slurp(dir / "density.csv")) == 1 + 12 * 512);
}
