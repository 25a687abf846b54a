#include "dbosim/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace dbosim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

double get_double(const json& j, const char* key, const std::string& path,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::optional<double> get_opt_double(const json& j, const char* key,
                                     const std::string& path,
                                     std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) fail(path + "." + key, "expected a number or null");
  return v.get<double>();
}

long get_long(const json& j, const char* key, const std::string& path, long fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long>();
}

std::uint64_t get_u64(const json& j, const char* key, const std::string& path,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected a non-negative integer");
  if (!v.is_number_unsigned() && v.get<long long>() < 0)
    fail(path + "." + key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const char* key, const std::string& path,
                       std::string fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_double_array(const json& j, const char* key,
                                     const std::string& path,
                                     std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

ThermalModel parse_device(const json& j, const std::string& path) {
  check_keys(j, path, {"rp_ohms", "temp_min_c", "temp_max_c", "anchors"});
  const ThermalModel defaults = default_thermal_model();
  const double rp = get_double(j, "rp_ohms", path, defaults.rp_ref());
  const double t_min = get_double(j, "temp_min_c", path, defaults.temp_min());
  const double t_max = get_double(j, "temp_max_c", path, defaults.temp_max());
  std::vector<ThermalAnchor> anchors = defaults.anchors();
  if (j.contains("anchors")) {
    const json& arr = j.at("anchors");
    if (!arr.is_array()) fail(path + ".anchors", "expected an array");
    anchors.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string apath = path + ".anchors[" + std::to_string(i) + "]";
      check_keys(arr[i], apath, {"temp_c", "tmr0", "vh_volts"});
      ThermalAnchor a;
      a.temp_c = get_double(arr[i], "temp_c", apath, 0.0);
      a.tmr0 = get_double(arr[i], "tmr0", apath, 0.0);
      a.vh = get_double(arr[i], "vh_volts", apath, 0.0);
      if (!arr[i].contains("temp_c") || !arr[i].contains("tmr0") ||
          !arr[i].contains("vh_volts"))
        fail(apath, "anchor requires temp_c, tmr0 and vh_volts");
      anchors.push_back(a);
    }
  }
  try {
    return ThermalModel(std::move(anchors), rp, t_min, t_max);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

AnalogConfig parse_analog(const json& j, const std::string& path) {
  check_keys(j, path,
             {"r_ref_ohms", "mirror_gain", "vm_offset_volts", "vm_noise_sigma_volts",
              "clamp_error_volts"});
  AnalogConfig cfg;
  cfg.r_ref = get_double(j, "r_ref_ohms", path, cfg.r_ref);
  cfg.mirror_gain = get_double(j, "mirror_gain", path, cfg.mirror_gain);
  cfg.vm_offset = get_double(j, "vm_offset_volts", path, cfg.vm_offset);
  cfg.vm_noise_sigma = get_double(j, "vm_noise_sigma_volts", path, cfg.vm_noise_sigma);
  cfg.clamp_error = get_double(j, "clamp_error_volts", path, cfg.clamp_error);
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return cfg;
}

DboConfig parse_dbo(const json& j, const std::string& path) {
  check_keys(j, path,
             {"fine_step_volts", "coarse_ratio", "sample_period_s", "v_ref_max_volts",
              "v_ref_init_volts", "comparator_hysteresis_volts",
              "comparator_offset_sigma_volts", "rearm_coarse_after_cycles"});
  DboConfig cfg;
  cfg.fine_step = get_double(j, "fine_step_volts", path, cfg.fine_step);
  cfg.coarse_ratio =
      static_cast<int>(get_long(j, "coarse_ratio", path, cfg.coarse_ratio));
  cfg.sample_period = get_double(j, "sample_period_s", path, cfg.sample_period);
  cfg.v_ref_max = get_double(j, "v_ref_max_volts", path, cfg.v_ref_max);
  cfg.v_ref_init = get_double(j, "v_ref_init_volts", path, cfg.v_ref_init);
  cfg.comparator_hysteresis =
      get_double(j, "comparator_hysteresis_volts", path, cfg.comparator_hysteresis);
  cfg.comparator_offset_sigma =
      get_double(j, "comparator_offset_sigma_volts", path, cfg.comparator_offset_sigma);
  cfg.rearm_coarse_after =
      get_long(j, "rearm_coarse_after_cycles", path, cfg.rearm_coarse_after);
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return cfg;
}

ThermalSchedule parse_schedule(const json& j, const std::string& path,
                               const ThermalSchedule& fallback) {
  check_keys(j, path, {"total_duration_s", "segments"});
  ThermalSchedule sched = fallback;
  sched.total_duration_s =
      get_double(j, "total_duration_s", path, fallback.total_duration_s);
  if (j.contains("segments")) {
    const json& arr = j.at("segments");
    if (!arr.is_array()) fail(path + ".segments", "expected an array");
    sched.segments.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string spath = path + ".segments[" + std::to_string(i) + "]";
      check_keys(arr[i], spath, {"start_time_s", "start_temp_c", "ramp_c_per_s"});
      ThermalSegment seg;
      seg.start_time_s = get_double(arr[i], "start_time_s", spath, 0.0);
      seg.start_temp_c = get_double(arr[i], "start_temp_c", spath, 25.0);
      seg.ramp_c_per_s = get_double(arr[i], "ramp_c_per_s", spath, 0.0);
      sched.segments.push_back(seg);
    }
  }
  try {
    validate(sched);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return sched;
}

VariationSpec parse_variation(const json& j, const std::string& path,
                              std::uint64_t seed) {
  check_keys(j, path,
             {"sigma_over_mu_tmr0", "sigma_over_mu_vh", "sigma_over_mu_rp",
              "correlation", "sa_offset_sigma_a", "n_cells", "n_blocks", "rows",
              "data_bitlines", "ref_bitlines", "temp_c", "dbo_settle_cycles"});
  VariationSpec spec;
  spec.sigma_over_mu_tmr0 =
      get_double(j, "sigma_over_mu_tmr0", path, spec.sigma_over_mu_tmr0);
  spec.sigma_over_mu_vh = get_double(j, "sigma_over_mu_vh", path, spec.sigma_over_mu_vh);
  spec.sigma_over_mu_rp = get_double(j, "sigma_over_mu_rp", path, spec.sigma_over_mu_rp);
  spec.correlation = get_double(j, "correlation", path, spec.correlation);
  spec.sa_offset_sigma = get_double(j, "sa_offset_sigma_a", path, spec.sa_offset_sigma);
  spec.n_cells = get_long(j, "n_cells", path, spec.n_cells);
  spec.n_blocks = get_long(j, "n_blocks", path, spec.n_blocks);
  spec.layout.rows = get_long(j, "rows", path, spec.layout.rows);
  spec.layout.data_bitlines = get_long(j, "data_bitlines", path, spec.layout.data_bitlines);
  spec.layout.ref_bitlines = get_long(j, "ref_bitlines", path, spec.layout.ref_bitlines);
  spec.temp_c = get_double(j, "temp_c", path, spec.temp_c);
  spec.dbo_settle_cycles = get_long(j, "dbo_settle_cycles", path, spec.dbo_settle_cycles);
  spec.seed = seed;
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return spec;
}

SweepConfig parse_sweep(const json& j, const std::string& path) {
  check_keys(j, path, {"v_min_volts", "v_max_volts", "points", "temp_c", "tmr0", "vh",
                       "rp_ohms"});
  SweepConfig cfg;
  cfg.v_min = get_double(j, "v_min_volts", path, cfg.v_min);
  cfg.v_max = get_double(j, "v_max_volts", path, cfg.v_max);
  cfg.points = get_long(j, "points", path, cfg.points);
  cfg.temp_c = get_double(j, "temp_c", path, cfg.temp_c);
  cfg.tmr0 = get_opt_double(j, "tmr0", path, cfg.tmr0);
  cfg.vh = get_opt_double(j, "vh", path, cfg.vh);
  cfg.rp = get_opt_double(j, "rp_ohms", path, cfg.rp);
  if (!(cfg.v_min >= 0.0 && cfg.v_min < cfg.v_max))
    fail(path, "need 0 <= v_min_volts < v_max_volts");
  if (cfg.points < 2) fail(path, "points must be >= 2");
  return cfg;
}

DriftConfig parse_drift(const json& j, const std::string& path) {
  check_keys(j, path, {"t_start_c", "t_end_c", "ramp_c_per_s", "hold_s", "tail_s",
                       "fixed_bias_volts"});
  DriftConfig cfg;
  cfg.t_start_c = get_double(j, "t_start_c", path, cfg.t_start_c);
  cfg.t_end_c = get_double(j, "t_end_c", path, cfg.t_end_c);
  cfg.ramp_c_per_s = get_double(j, "ramp_c_per_s", path, cfg.ramp_c_per_s);
  cfg.hold_s = get_double(j, "hold_s", path, cfg.hold_s);
  cfg.tail_s = get_double(j, "tail_s", path, cfg.tail_s);
  cfg.fixed_bias = get_opt_double(j, "fixed_bias_volts", path, cfg.fixed_bias);
  if (cfg.ramp_c_per_s == 0.0 && cfg.t_end_c != cfg.t_start_c)
    fail(path, "ramp_c_per_s must be nonzero when t_end_c differs from t_start_c");
  if (cfg.hold_s <= 0.0 || cfg.tail_s <= 0.0)
    fail(path, "hold_s and tail_s must be > 0");
  return cfg;
}

AccuracyConfig parse_accuracy(const json& j, const std::string& path) {
  check_keys(j, path, {"tmr0_min", "tmr0_max", "tmr0_points", "vh_min", "vh_max",
                       "vh_points", "temp_c", "duration_s"});
  AccuracyConfig cfg;
  cfg.tmr0_min = get_double(j, "tmr0_min", path, cfg.tmr0_min);
  cfg.tmr0_max = get_double(j, "tmr0_max", path, cfg.tmr0_max);
  cfg.tmr0_points = get_long(j, "tmr0_points", path, cfg.tmr0_points);
  cfg.vh_min = get_double(j, "vh_min", path, cfg.vh_min);
  cfg.vh_max = get_double(j, "vh_max", path, cfg.vh_max);
  cfg.vh_points = get_long(j, "vh_points", path, cfg.vh_points);
  cfg.temp_c = get_double(j, "temp_c", path, cfg.temp_c);
  cfg.duration_s = get_double(j, "duration_s", path, cfg.duration_s);
  if (cfg.tmr0_points < 1 || cfg.vh_points < 1) fail(path, "grid points must be >= 1");
  if (!(cfg.tmr0_min > 0.0 && cfg.tmr0_min <= cfg.tmr0_max))
    fail(path, "need 0 < tmr0_min <= tmr0_max");
  if (!(cfg.vh_min > 0.0 && cfg.vh_min <= cfg.vh_max))
    fail(path, "need 0 < vh_min <= vh_max");
  return cfg;
}

BerConfig parse_ber(const json& j, const std::string& path) {
  check_keys(j, path, {"sigma_grid", "temps_c", "fixed_bias_volts"});
  BerConfig cfg;
  cfg.sigma_grid = get_double_array(j, "sigma_grid", path, cfg.sigma_grid);
  cfg.temps_c = get_double_array(j, "temps_c", path, cfg.temps_c);
  cfg.fixed_bias = get_opt_double(j, "fixed_bias_volts", path, cfg.fixed_bias);
  if (cfg.sigma_grid.empty()) fail(path + ".sigma_grid", "must not be empty");
  if (cfg.temps_c.empty()) fail(path + ".temps_c", "must not be empty");
  for (double s : cfg.sigma_grid)
    if (s < 0.0) fail(path + ".sigma_grid", "ratios must be >= 0");
  return cfg;
}

}  // namespace

ThermalModel default_thermal_model() {
  return ThermalModel({{25.0, 1.0, 0.3}, {125.0, 0.7, 0.22}}, 10e3);
}

ScenarioConfig parse_config(const nlohmann::json& j) {
  check_keys(j, "config",
             {"seed", "out_dir", "device", "analog", "dbo", "schedule", "variation",
              "sweep", "drift", "accuracy", "ber"});
  ScenarioConfig c;
  c.seed = get_u64(j, "seed", "config", c.seed);
  c.out_dir = get_string(j, "out_dir", "config", c.out_dir);
  if (j.contains("device")) c.device = parse_device(j.at("device"), "config.device");
  if (j.contains("analog")) c.analog = parse_analog(j.at("analog"), "config.analog");
  if (j.contains("dbo")) c.dbo = parse_dbo(j.at("dbo"), "config.dbo");
  if (j.contains("schedule"))
    c.schedule = parse_schedule(j.at("schedule"), "config.schedule", c.schedule);
  c.variation = j.contains("variation")
                    ? parse_variation(j.at("variation"), "config.variation", c.seed)
                    : [&] {
                        VariationSpec spec;
                        spec.seed = c.seed;
                        return spec;
                      }();
  if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"), "config.sweep");
  if (j.contains("drift")) c.drift = parse_drift(j.at("drift"), "config.drift");
  if (j.contains("accuracy"))
    c.accuracy = parse_accuracy(j.at("accuracy"), "config.accuracy");
  if (j.contains("ber")) c.ber = parse_ber(j.at("ber"), "config.ber");
  return c;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// The output directory is an execution detail: it is accepted in config
// files but not echoed, so echoes from different runs stay comparable.
nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;

  nlohmann::json anchors = nlohmann::json::array();
  for (const ThermalAnchor& a : c.device.anchors())
    anchors.push_back({{"temp_c", a.temp_c}, {"tmr0", a.tmr0}, {"vh_volts", a.vh}});
  j["device"] = {{"rp_ohms", c.device.rp_ref()},
                 {"temp_min_c", c.device.temp_min()},
                 {"temp_max_c", c.device.temp_max()},
                 {"anchors", anchors}};

  j["analog"] = {{"r_ref_ohms", c.analog.r_ref},
                 {"mirror_gain", c.analog.mirror_gain},
                 {"vm_offset_volts", c.analog.vm_offset},
                 {"vm_noise_sigma_volts", c.analog.vm_noise_sigma},
                 {"clamp_error_volts", c.analog.clamp_error}};

  j["dbo"] = {{"fine_step_volts", c.dbo.fine_step},
              {"coarse_ratio", c.dbo.coarse_ratio},
              {"sample_period_s", c.dbo.sample_period},
              {"v_ref_max_volts", c.dbo.v_ref_max},
              {"v_ref_init_volts", c.dbo.v_ref_init},
              {"comparator_hysteresis_volts", c.dbo.comparator_hysteresis},
              {"comparator_offset_sigma_volts", c.dbo.comparator_offset_sigma},
              {"rearm_coarse_after_cycles", c.dbo.rearm_coarse_after}};

  nlohmann::json segments = nlohmann::json::array();
  for (const ThermalSegment& s : c.schedule.segments)
    segments.push_back({{"start_time_s", s.start_time_s},
                        {"start_temp_c", s.start_temp_c},
                        {"ramp_c_per_s", s.ramp_c_per_s}});
  j["schedule"] = {{"total_duration_s", c.schedule.total_duration_s},
                   {"segments", segments}};

  j["variation"] = {{"sigma_over_mu_tmr0", c.variation.sigma_over_mu_tmr0},
                    {"sigma_over_mu_vh", c.variation.sigma_over_mu_vh},
                    {"sigma_over_mu_rp", c.variation.sigma_over_mu_rp},
                    {"correlation", c.variation.correlation},
                    {"sa_offset_sigma_a", c.variation.sa_offset_sigma},
                    {"n_cells", c.variation.n_cells},
                    {"n_blocks", c.variation.n_blocks},
                    {"rows", c.variation.layout.rows},
                    {"data_bitlines", c.variation.layout.data_bitlines},
                    {"ref_bitlines", c.variation.layout.ref_bitlines},
                    {"temp_c", c.variation.temp_c},
                    {"dbo_settle_cycles", c.variation.dbo_settle_cycles}};

  j["sweep"] = {{"v_min_volts", c.sweep.v_min},
                {"v_max_volts", c.sweep.v_max},
                {"points", c.sweep.points},
                {"temp_c", c.sweep.temp_c}};
  if (c.sweep.tmr0) j["sweep"]["tmr0"] = *c.sweep.tmr0;
  if (c.sweep.vh) j["sweep"]["vh"] = *c.sweep.vh;
  if (c.sweep.rp) j["sweep"]["rp_ohms"] = *c.sweep.rp;

  j["drift"] = {{"t_start_c", c.drift.t_start_c},
                {"t_end_c", c.drift.t_end_c},
                {"ramp_c_per_s", c.drift.ramp_c_per_s},
                {"hold_s", c.drift.hold_s},
                {"tail_s", c.drift.tail_s}};
  if (c.drift.fixed_bias) j["drift"]["fixed_bias_volts"] = *c.drift.fixed_bias;

  j["accuracy"] = {{"tmr0_min", c.accuracy.tmr0_min},
                   {"tmr0_max", c.accuracy.tmr0_max},
                   {"tmr0_points", c.accuracy.tmr0_points},
                   {"vh_min", c.accuracy.vh_min},
                   {"vh_max", c.accuracy.vh_max},
                   {"vh_points", c.accuracy.vh_points},
                   {"temp_c", c.accuracy.temp_c},
                   {"duration_s", c.accuracy.duration_s}};

  j["ber"] = {{"sigma_grid", c.ber.sigma_grid}, {"temps_c", c.ber.temps_c}};
  if (c.ber.fixed_bias) j["ber"]["fixed_bias_volts"] = *c.ber.fixed_bias;

  return j;
}

}  // namespace dbosim
