#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fracgreen/cli.hpp"

using namespace fracgreen::cli;
namespace fs = std::filesystem;

namespace {

std::string temp(const char* name) { return (fs::temp_directory_path() / name).string(); }

int shell(const std::string& args) {
  const std::string cmd = std::string(FRACGREEN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

RunConfig config(Command c, nlohmann::json params = nlohmann::json::object()) {
  RunConfig cfg;
  cfg.command = c;
  cfg.params = std::move(params);
  return cfg;
}

}  // namespace

TEST_CASE("grid strings") {
  CHECK(parse_grid("0:1:0.25") == std::vector<double>{0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_grid("1,2.5,4") == std::vector<double>{1, 2.5, 4});
  CHECK(parse_grid("3") == std::vector<double>{3});
  const auto g = parse_grid("log:1e-2:1e2:5");
  REQUIRE(g.size() == 5);
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("log:0:1:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("a,b"), std::invalid_argument);
}

TEST_CASE("command names round trip") {
  for (Command c : all_commands()) CHECK(parse_command(command_name(c)) == c);
  CHECK_FALSE(parse_command("nope"));
}

TEST_CASE("exit density at s = 1") {
  std::ostringstream out, err;
  auto cfg = config(Command::exit_density, {{"alpha", 0.5}, {"t", 1.0}, {"s-grid", "1"}});
  REQUIRE(run(cfg, out, err) == kExitOk);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "s,density,log_density,cdf");
  const double v = std::stod(row.substr(row.find(',') + 1));
  CHECK(v == doctest::Approx(0.43939).epsilon(1e-5));
}

TEST_CASE("JSON output") {
  std::ostringstream out, err;
  auto cfg = config(Command::gamma_check, {{"s", "1"}, {"a-grid", "2"}});
  cfg.format = Format::json;
  REQUIRE(run(cfg, out, err) == kExitOk);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["command"] == "gamma-check");
  CHECK(j["rows"][0]["value"].get<double>() == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("validation errors map to status 2 and create no output") {
  const std::string path = temp("fracgreen_cli_bad.csv");
  fs::remove(path);
  std::ostringstream out, err;
  auto cfg = config(Command::stable_density, {{"alpha", 1.2}});
  cfg.output = path;
  CHECK(run(cfg, out, err) == kExitValidation);
  CHECK_FALSE(fs::exists(path));
  CHECK(err.str().find("alpha") != std::string::npos);

  auto unknown = config(Command::greens, {{"bogus", 1}});
  CHECK(run(unknown, out, err) == kExitValidation);
  auto bad_phi = config(Command::solve, {{"phi1", "exp-decay:-2"}});
  CHECK(run(bad_phi, out, err) == kExitValidation);
  auto bad_choice = config(Command::greens, {{"kernel", "g9"}});
  CHECK(run(bad_choice, out, err) == kExitValidation);
}

TEST_CASE("unwritable output maps to status 4") {
  std::ostringstream out, err;
  auto cfg = config(Command::gamma_check);
  cfg.output = "/nonexistent-dir/out.csv";
  CHECK(run(cfg, out, err) == kExitIo);
}

TEST_CASE("config files: defaults, line numbers, round trip") {
  RunConfig cfg = parse_config_text(R"({"command": "exit-density"})");
  CHECK(cfg.params["alpha"] == 0.5);
  CHECK(cfg.params["s-grid"] == "0:5:0.01");
  CHECK(cfg.format == Format::csv);

  const std::string text = "{\n  \"command\": \"stable-density\",\n  \"params\": {\n    \"alpha\": 1.2\n  }\n}\n";
  try {
    parse_config_text(text, "cfg.json");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("cfg.json:4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("{\n \"command\": \"greens\",\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_config_text(R"({"command": "nope"})"), ValidationError);

  RunConfig full = parse_config_text(
      R"({"command": "ruin", "seed": 5, "format": "json", "params": {"horizon": 3, "n-paths": 100}})");
  CHECK(full.seed == 5u);
  const RunConfig back = parse_config_text(config_to_json(full));
  CHECK(back.params == full.params);
  CHECK(back.seed == full.seed);
  CHECK(back.format == Format::json);

  const std::string path = temp("fracgreen_cli_cfg.json");
  std::ofstream(path) << config_to_json(full);
  CHECK(load_config(path).params == full.params);
  fs::remove(path);
  CHECK_THROWS_AS(load_config(temp("fracgreen_missing.json")), IoError);
}

TEST_CASE("seeded commands are reproducible") {
  auto cfg = config(Command::ruin, {{"horizon", 2.0}, {"n-paths", 500}});
  cfg.seed = 17;
  std::ostringstream a, b, err;
  REQUIRE(run(cfg, a, err) == kExitOk);
  REQUIRE(run(cfg, b, err) == kExitOk);
  CHECK(a.str() == b.str());
}

TEST_CASE("binary exit codes") {
  const std::string path = temp("fracgreen_cli_bin.csv");
  fs::remove(path);
  CHECK(shell("stable-density --alpha 0.5 --r-grid 1 --out " + path) == 0);
  CHECK(fs::exists(path));
  fs::remove(path);
  CHECK(shell("stable-density --unknown-flag 1 --out " + path) == kExitValidation);
  CHECK_FALSE(fs::exists(path));
  CHECK(shell("stable-density --alpha 1.2 --out " + path) == kExitValidation);
  CHECK_FALSE(fs::exists(path));
  CHECK(shell("gamma-check --out /nonexistent-dir/x.csv") == kExitIo);
  CHECK(shell("--config " + temp("fracgreen_missing.json")) == kExitIo);

  const std::string emitted = temp("fracgreen_cli_emit.json");
  CHECK(shell("exit-density --alpha 0.8 --emit-config " + emitted) == 0);
  CHECK(load_config(emitted).params["alpha"] == 0.8);
  fs::remove(emitted);
}
