#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "bqlab/config.hpp"
#include "bqlab/errors.hpp"

using namespace bqlab;
namespace fs = std::filesystem;

TEST_CASE("config parsing round trip") {
  const std::string text = R"(
# two-soliton manifest
p = 1
soliton1.omega = -0.5
soliton1.x0 = -2
soliton2.omega = 0.5
soliton2.x0 = 2
grid.half_length = 66
grid.n = 2048
evolve.dt = 0.001
evolve.dealias = true
construction.t0 = 10
construction.final_times = 30 40 50
output.dir = runs/pair
seed = 3
)";
  RunConfig cfg = RunConfig::parse_text(text);
  CHECK(cfg.p == 1.0);
  REQUIRE(cfg.solitons.size() == 2);
  CHECK(cfg.solitons[0].omega == -0.5);
  CHECK(cfg.solitons[1].x0 == 2.0);
  CHECK(cfg.grid_half_length.value() == 66.0);
  CHECK(cfg.grid_n.value() == 2048);
  CHECK(cfg.dt.value() == 0.001);
  CHECK(cfg.dealias);
  CHECK(cfg.t0 == 10.0);
  REQUIRE(cfg.final_times.size() == 3);
  CHECK(cfg.final_times[2] == 50.0);
  CHECK(cfg.output_dir == "runs/pair");
  CHECK(cfg.seed == 3);

  RunConfig again = RunConfig::parse_text(cfg.to_text());
  CHECK(again.to_text() == cfg.to_text());

  SolitonFamily fam = cfg.family();
  CHECK(fam.size() == 2);
  CHECK(fam.regime == Regime::subcritical);
}

TEST_CASE("config errors name the problem") {
  CHECK_THROWS_AS(RunConfig::parse_text("nonsense line"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("unknown.key = 3"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("p = oops"), ConfigError);

  RunConfig cfg = RunConfig::parse_text("p = 1\nsoliton1.omega = 1.0\n");
  try {
    cfg.family();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("|omega| < 1") != std::string::npos);
  }

  RunConfig none = RunConfig::parse_text("p = 1\n");
  CHECK_THROWS_AS(none.family(), ConfigError);
}

#ifdef BQLAB_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BQLAB_CLI_PATH) + " " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes") {
  CHECK(run_cli("soliton --p 1 --omega 0.5") == 0);
  CHECK(run_cli("spectrum --p 1 --omega 0 --L 30 --n 512") == 0);
  // invariant violated in flags -> usage/config error
  CHECK(run_cli("soliton --p 1 --omega 1.0") == 2);
  CHECK(run_cli("bogus-subcommand") == 2);
  CHECK(run_cli("report --dir /nonexistent-path-bqlab") != 0);

  // config with an invalid speed
  const auto tmp = fs::temp_directory_path() / "bqlab_bad_cfg.txt";
  {
    std::ofstream f(tmp);
    f << "p = 1\nsoliton1.omega = 1.0\n";
  }
  CHECK(run_cli("evolve --config " + tmp.string() + " --t-end 1") == 2);
  fs::remove(tmp);
}

TEST_CASE("cli soliton prints the residual line") {
  const auto out = fs::temp_directory_path() / "bqlab_cli_out.txt";
  const std::string cmd = std::string(BQLAB_CLI_PATH) +
                          " soliton --p 1 --omega 0.5 > " + out.string();
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  std::ifstream f(out);
  std::string all((std::istreambuf_iterator<char>(f)), {});
  CHECK(all.find("elliptic_residual") != std::string::npos);
  fs::remove(out);
}
#endif
