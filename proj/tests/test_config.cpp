#include <doctest.h>

#include <stdexcept>
#include <string>

#include "dbosim/config.hpp"

using namespace dbosim;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("an empty config yields the full default scenario") {
  const ScenarioConfig c = parse_config(json::object());
  CHECK(c.seed == 1);
  CHECK(c.out_dir == "out");
  CHECK(c.device.params_at(25.0).tmr0 == 1.0);
  CHECK(c.device.params_at(125.0).vh == 0.22);
  CHECK(c.device.rp_ref() == 10e3);
  CHECK(c.dbo.fine_step == 0.004);
  CHECK(c.dbo.coarse_ratio == 20);
  CHECK(c.dbo.sample_period == 200e-9);
  CHECK(c.analog.r_ref == 100e3);
  CHECK(c.schedule.total_duration_s == 20e-6);
  CHECK(c.variation.n_cells == (1L << 20));
  CHECK(c.variation.n_blocks == 64);
  CHECK(c.variation.layout.rows == 512);
  CHECK(c.variation.layout.data_bitlines == 32);
  CHECK(c.ber.sigma_grid.size() == 8);
  CHECK(c.ber.temps_c.size() == 2);
}

TEST_CASE("partial overrides keep the remaining defaults") {
  const ScenarioConfig c = parse_config(json::parse(R"({
    "seed": 42,
    "dbo": {"fine_step_volts": 0.002},
    "variation": {"n_cells": 5000}
  })"));
  CHECK(c.seed == 42);
  CHECK(c.variation.seed == 42);  // variation inherits the top-level seed
  CHECK(c.dbo.fine_step == 0.002);
  CHECK(c.dbo.coarse_ratio == 20);
  CHECK(c.variation.n_cells == 5000);
  CHECK(c.variation.n_blocks == 64);
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK(error_of(json::parse(R"({"dbo": {"fine_stepp": 1}})"))
            .find("config.dbo.fine_stepp") != std::string::npos);
  CHECK(error_of(json::parse(R"({"nonsense": 1})")).find("config.nonsense") !=
        std::string::npos);
  CHECK(error_of(json::parse(R"({"device": {"anchors": [{"temp_c": 25, "tmr0": 1,
        "vh_volts": 0.3, "extra": 2}]}})"))
            .find("config.device.anchors[0].extra") != std::string::npos);
}

TEST_CASE("type mismatches name the offending key") {
  CHECK(error_of(json::parse(R"({"dbo": {"fine_step_volts": "big"}})"))
            .find("config.dbo.fine_step_volts") != std::string::npos);
  CHECK(error_of(json::parse(R"({"variation": {"n_cells": 1.5}})"))
            .find("config.variation.n_cells") != std::string::npos);
  CHECK(error_of(json::parse(R"({"seed": -3})")).find("config.seed") !=
        std::string::npos);
}

TEST_CASE("invariant violations surface from the section validators") {
  CHECK(error_of(json::parse(R"({"dbo": {"fine_step_volts": -1}})"))
            .find("config.dbo") != std::string::npos);
  CHECK(error_of(json::parse(R"({"device": {"anchors": [
          {"temp_c": 125, "tmr0": 1, "vh_volts": 0.3},
          {"temp_c": 25, "tmr0": 0.7, "vh_volts": 0.22}]}})"))
            .find("config.device") != std::string::npos);
  CHECK(error_of(json::parse(R"({"schedule": {"total_duration_s": 0}})"))
            .find("config.schedule") != std::string::npos);
  CHECK(error_of(json::parse(R"({"sweep": {"v_min_volts": 0.5, "v_max_volts": 0.1}})"))
            .find("config.sweep") != std::string::npos);
}

TEST_CASE("anchors require all three fields") {
  CHECK(error_of(json::parse(R"({"device": {"anchors": [{"temp_c": 25, "tmr0": 1}]}})"))
            .find("anchors[0]") != std::string::npos);
}

TEST_CASE("the effective config round-trips through JSON") {
  const ScenarioConfig base = parse_config(json::parse(R"({
    "seed": 9,
    "device": {"rp_ohms": 12000,
               "anchors": [{"temp_c": 0, "tmr0": 1.1, "vh_volts": 0.31},
                            {"temp_c": 100, "tmr0": 0.8, "vh_volts": 0.24}]},
    "dbo": {"fine_step_volts": 0.003, "coarse_ratio": 10},
    "analog": {"vm_noise_sigma_volts": 0.001},
    "schedule": {"total_duration_s": 5e-05,
                 "segments": [{"start_time_s": 0, "start_temp_c": 30, "ramp_c_per_s": 0}]},
    "variation": {"sigma_over_mu_tmr0": 0.03, "n_cells": 2048},
    "sweep": {"points": 101, "tmr0": 0.9},
    "drift": {"fixed_bias_volts": 0.4},
    "ber": {"sigma_grid": [0.01, 0.05], "temps_c": [25]}
  })"));
  const ScenarioConfig again = parse_config(to_json(base));
  CHECK(to_json(again) == to_json(base));
  CHECK(again.device.rp_ref() == 12000.0);
  CHECK(again.dbo.coarse_ratio == 10);
  CHECK(again.sweep.tmr0.has_value());
  CHECK(*again.sweep.tmr0 == 0.9);
  CHECK(again.variation.seed == 9);
  CHECK(again.ber.sigma_grid.size() == 2);
}

TEST_CASE("defaults themselves round-trip") {
  const ScenarioConfig c;
  const ScenarioConfig again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
}
