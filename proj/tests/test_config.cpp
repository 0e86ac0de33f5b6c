#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "habcov/runconfig.hpp"

using namespace habcov;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("config parsing with sections and comments") {
  fs::path p = write_temp("habcov_cfg.ini",
                          "# experiment setup\n"
                          "[env]\n"
                          "n_agents = 4\n"
                          "n_levels = 11\n"
                          "[wind]\n"
                          "truth = opposing\n"
                          "opposing_speed = 7.5\n"
                          "[train]\n"
                          "lr = 1e-4\n"
                          "batch = 64\n"
                          "[run]\n"
                          "seeds = 3 5 7\n");
  RunConfig cfg = RunConfig::from_kv(parse_config_file(p.string()));
  CHECK(cfg.env.n_agents == 4);
  CHECK(cfg.env.n_levels == 11);
  CHECK(cfg.env.wind.truth == "opposing");
  CHECK(cfg.env.wind.opposing_speed_mps == 7.5);
  CHECK(cfg.train.learning_rate == 1e-4);
  CHECK(cfg.train.batch_size == 64);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 5, 7});
  // Untouched fields keep their defaults.
  CHECK(cfg.env.episode_steps == 2880);
  CHECK(cfg.train.buffer_capacity == 1000000);
  CHECK(cfg.train.eps_decay_steps == 2000000);
}

TEST_CASE("unknown keys are rejected by name") {
  fs::path p = write_temp("habcov_cfg_bad.ini", "[env]\nn_agentz = 4\n");
  CHECK_THROWS_WITH_AS(RunConfig::from_kv(parse_config_file(p.string())),
                       doctest::Contains("env.n_agentz"), ConfigError);
}

TEST_CASE("malformed lines report the line number") {
  fs::path p = write_temp("habcov_cfg_malformed.ini", "[env]\nn_agents 4\n");
  CHECK_THROWS_WITH_AS(parse_config_file(p.string()),
                       doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("defaults dump parses back to the defaults") {
  fs::path p = write_temp("habcov_cfg_defaults.ini", dump_default_config());
  RunConfig cfg = RunConfig::from_kv(parse_config_file(p.string()));
  RunConfig defaults;
  CHECK(cfg.env.n_agents == defaults.env.n_agents);
  CHECK(cfg.env.r_coverage_km == defaults.env.r_coverage_km);
  CHECK(cfg.train.learning_rate == defaults.train.learning_rate);
  CHECK(cfg.train.eps_decay_steps == defaults.train.eps_decay_steps);
  CHECK(cfg.baseline.refresh_minutes == defaults.baseline.refresh_minutes);
  CHECK(cfg.baseline.v_cap_mps == defaults.baseline.v_cap_mps);
}

TEST_CASE("invalid values surface as config errors") {
  fs::path p = write_temp("habcov_cfg_invalid.ini", "[env]\nn_agents = 0\n");
  RunConfig cfg = RunConfig::from_kv(parse_config_file(p.string()));
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("resolved config echo round-trips") {
  RunConfig cfg;
  cfg.env.n_agents = 5;
  cfg.env.wind.truth = "uniform";
  cfg.env.wind.uniform_speed_mps = 4.25;
  cfg.seeds = {11, 12};
  fs::path p = fs::temp_directory_path() / "habcov_cfg_echo.ini";
  cfg.echo(p.string());
  RunConfig back = RunConfig::from_kv(parse_config_file(p.string()));
  CHECK(back.env.n_agents == 5);
  CHECK(back.env.wind.truth == "uniform");
  CHECK(back.env.wind.uniform_speed_mps == 4.25);
  CHECK(back.seeds == cfg.seeds);
}
