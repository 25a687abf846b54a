#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbosim/analog.hpp"
#include "dbosim/controller.hpp"
#include "dbosim/device.hpp"
#include "dbosim/engine.hpp"
#include "dbosim/variation.hpp"

namespace dbosim {

struct SweepConfig {
  double v_min = 0.0;
  double v_max = 0.8;
  long points = 801;
  double temp_c = 25.0;
  // When set, these replace the thermal-model parameters at temp_c.
  std::optional<double> tmr0;
  std::optional<double> vh;
  std::optional<double> rp;
};

struct DriftConfig {
  double t_start_c = 25.0;
  double t_end_c = 125.0;
  double ramp_c_per_s = 98e3;  // 98 degC per millisecond
  double hold_s = 0.5e-3;      // settle time before the ramp
  double tail_s = 0.5e-3;      // hold time after the ramp
  std::optional<double> fixed_bias;  // baseline bias; default: optimum at t_start
};

struct AccuracyConfig {
  double tmr0_min = 0.6;
  double tmr0_max = 1.2;
  long tmr0_points = 7;
  double vh_min = 0.2;
  double vh_max = 0.35;
  long vh_points = 7;
  double temp_c = 25.0;
  double duration_s = 200e-6;
};

struct BerConfig {
  std::vector<double> sigma_grid = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08};
  std::vector<double> temps_c = {25.0, 125.0};
  // Bias of the FIXED baseline; default: optimum at the first configured
  // temperature.
  std::optional<double> fixed_bias;
};

// Table-reproducing defaults: tmr0 100 %/70 % and vh 0.3 V/0.22 V at
// 25 degC/125 degC, rp 10 kOhm.
ThermalModel default_thermal_model();

struct ScenarioConfig {
  ThermalModel device = default_thermal_model();
  AnalogConfig analog;
  DboConfig dbo;
  ThermalSchedule schedule = ThermalSchedule::constant(25.0, 20e-6);
  VariationSpec variation;
  SweepConfig sweep;
  DriftConfig drift;
  AccuracyConfig accuracy;
  BerConfig ber;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

// Parses and validates a scenario. Every field is optional and defaults to
// the values above; unknown keys are rejected with their full path.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config_file(const std::filesystem::path& path);

// Effective (post-default) configuration; parse_config(to_json(c)) round-trips.
nlohmann::json to_json(const ScenarioConfig& c);

}  // namespace dbosim
