#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbosim/analog.hpp"
#include "dbosim/controller.hpp"
#include "dbosim/device.hpp"

namespace dbosim {

// Temperature is piecewise linear in time: from start_time_s the segment
// holds start_temp_c and ramps at ramp_c_per_s until the next segment.
struct ThermalSegment {
  double start_time_s;
  double start_temp_c;
  double ramp_c_per_s;
};

struct ThermalSchedule {
  std::vector<ThermalSegment> segments;
  double total_duration_s = 0.0;

  static ThermalSchedule constant(double temp_c, double duration_s);

  double temp_at(double time_s) const;
};

void validate(const ThermalSchedule& sched);

// One row of the transient trace; the CSV column order matches the fields.
struct TraceRow {
  long cycle;
  double time_s;
  double temp_c;
  double v_ref;  // bias evaluated this cycle
  double v_m;
  double v_s;  // held sample the comparator used
  bool flip;
  bool coarse;
  PumpCmd pump_cmd;
  double v_opt;     // instantaneous optimum at this cycle's temperature
  double margin_a;  // margin actually achieved at v_ref
};

struct Trace {
  std::vector<TraceRow> rows;
  std::vector<long> bias_clamp_cycles;  // cycles whose effective bias was clamped to 0
};

struct Metrics {
  // First cycle entering the +/-2 % band of the instantaneous optimum and
  // never leaving it afterwards; empty when the trace never settles.
  std::optional<long> convergence_cycle;
  long first_band_entry_cycle = -1;  // first touch of the band, -1 = never
  // Minimum instantaneous accuracy 1 - |v_ref - v_opt|/v_opt over all cycles
  // from the first band entry on.
  double min_accuracy_post_entry = 0.0;
  // Steady-state window: final 25 % of the trailing constant-temperature
  // segment (final 25 % of the whole run if the schedule ends on a ramp).
  long steady_begin_cycle = 0;
  double tracking_accuracy = 0.0;  // 1 - |mean(v_ref) - v_opt|/v_opt over the window
  double ripple_pp = 0.0;          // peak-to-peak v_ref over the window
  double steady_v_ref_mean = 0.0;
  double steady_v_opt = 0.0;
  double steady_margin_mean = 0.0;
};

struct RunResult {
  Trace trace;
  Metrics metrics;
};

// Transient simulation: one controller cycle per sample period, device
// parameters following the thermal schedule. Fully deterministic for a
// given (configs, seed).
RunResult run_transient(const ThermalModel& tm, const AnalogConfig& analog,
                        const DboConfig& dbo, const ThermalSchedule& sched,
                        std::uint64_t seed);

struct SweepPoint {
  double v;
  double margin_a;
};

// Uniformly spaced margin evaluations over [v_min, v_max], endpoints included.
std::vector<SweepPoint> sweep_margin(const DeviceParams& p, double v_min,
                                     double v_max, long points);

struct AccuracyPoint {
  double tmr0;
  double vh;
  double accuracy;
};

struct AccuracyMapSpec {
  std::vector<double> tmr0_values;
  std::vector<double> vh_values;
  double rp = 10e3;
  double temp_c = 25.0;
  double duration_s = 200e-6;
};

// Constant-temperature transient per (tmr0, vh) grid point, reporting the
// steady-state tracking accuracy. Grid points are independent; the parallel
// version runs them under OpenMP with per-point streams derived from
// (seed, point index) and is bit-identical to the serial reference.
std::vector<AccuracyPoint> tracking_accuracy_map(const AccuracyMapSpec& spec,
                                                 const AnalogConfig& analog,
                                                 const DboConfig& dbo,
                                                 std::uint64_t seed);
std::vector<AccuracyPoint> tracking_accuracy_map_serial(const AccuracyMapSpec& spec,
                                                        const AnalogConfig& analog,
                                                        const DboConfig& dbo,
                                                        std::uint64_t seed);

// Margin a block held at the fixed bias would see, per trace cycle.
std::vector<double> fixed_bias_margin_series(const ThermalModel& tm,
                                             const Trace& trace, double v_fixed);

// CSV serializations. Floating-point fields carry >= 9 significant digits.
std::string trace_to_csv(const Trace& trace);
std::string sweep_to_csv(const std::vector<SweepPoint>& sweep);
std::string accuracy_to_csv(const std::vector<AccuracyPoint>& map);

}  // namespace dbosim
