#include "dbosim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dbosim/csv.hpp"

namespace dbosim {

ThermalSchedule ThermalSchedule::constant(double temp_c, double duration_s) {
  return {{{0.0, temp_c, 0.0}}, duration_s};
}

double ThermalSchedule::temp_at(double time_s) const {
  std::size_t i = 0;
  while (i + 1 < segments.size() && segments[i + 1].start_time_s <= time_s) ++i;
  const ThermalSegment& seg = segments[i];
  return seg.start_temp_c + seg.ramp_c_per_s * (time_s - seg.start_time_s);
}

void validate(const ThermalSchedule& sched) {
  if (sched.segments.empty())
    throw std::invalid_argument("ThermalSchedule: at least one segment required");
  if (sched.segments.front().start_time_s != 0.0)
    throw std::invalid_argument("ThermalSchedule: first segment must start at t=0");
  for (std::size_t i = 0; i < sched.segments.size(); ++i) {
    const ThermalSegment& seg = sched.segments[i];
    if (!std::isfinite(seg.start_time_s) || !std::isfinite(seg.start_temp_c) ||
        !std::isfinite(seg.ramp_c_per_s))
      throw std::invalid_argument("ThermalSchedule: segment fields must be finite");
    if (i > 0 && !(sched.segments[i - 1].start_time_s < seg.start_time_s))
      throw std::invalid_argument(
          "ThermalSchedule: segment start times must be strictly increasing");
  }
  if (!(std::isfinite(sched.total_duration_s) && sched.total_duration_s > 0.0))
    throw std::invalid_argument("ThermalSchedule: total_duration_s must be > 0");
  if (sched.segments.back().start_time_s >= sched.total_duration_s)
    throw std::invalid_argument("ThermalSchedule: segments start beyond total duration");
}

namespace {

long cycle_count(const DboConfig& dbo, const ThermalSchedule& sched) {
  const long n =
      static_cast<long>(std::floor(sched.total_duration_s / dbo.sample_period + 1e-9));
  if (n < 1)
    throw std::invalid_argument(
        "run_transient: total duration shorter than one sample period");
  return n;
}

// Start time of the steady-state measurement window: final 25 % of the
// trailing constant-temperature segment, or of the whole run when the
// schedule ends on a ramp.
double steady_window_start(const ThermalSchedule& sched) {
  const double tail_start = sched.segments.back().ramp_c_per_s == 0.0
                                ? sched.segments.back().start_time_s
                                : 0.0;
  return tail_start + 0.75 * (sched.total_duration_s - tail_start);
}

Metrics compute_metrics(const Trace& trace, const ThermalSchedule& sched) {
  Metrics m;
  const std::vector<TraceRow>& rows = trace.rows;
  const long n = static_cast<long>(rows.size());
  if (n == 0) return m;

  // Band walk: the convergence cycle is the first cycle after the last
  // excursion out of the +/-2 % band of the instantaneous optimum.
  long last_bad = -1;
  m.first_band_entry_cycle = -1;
  double min_acc = 1.0;
  for (long i = 0; i < n; ++i) {
    const double dev = std::abs(rows[i].v_ref - rows[i].v_opt);
    const bool in_band = dev <= 0.02 * rows[i].v_opt;
    if (in_band && m.first_band_entry_cycle < 0) m.first_band_entry_cycle = i;
    if (!in_band) last_bad = i;
    if (m.first_band_entry_cycle >= 0)
      min_acc = std::min(min_acc, 1.0 - dev / rows[i].v_opt);
  }
  if (last_bad + 1 < n) m.convergence_cycle = last_bad + 1;
  m.min_accuracy_post_entry = m.first_band_entry_cycle >= 0 ? min_acc : 0.0;

  const double ws = steady_window_start(sched);
  long begin = n - 1;
  for (long i = 0; i < n; ++i) {
    if (rows[i].time_s >= ws) {
      begin = i;
      break;
    }
  }
  m.steady_begin_cycle = begin;

  double sum_v = 0.0, sum_margin = 0.0;
  double v_min = rows[begin].v_ref, v_max = rows[begin].v_ref;
  for (long i = begin; i < n; ++i) {
    sum_v += rows[i].v_ref;
    sum_margin += rows[i].margin_a;
    v_min = std::min(v_min, rows[i].v_ref);
    v_max = std::max(v_max, rows[i].v_ref);
  }
  const double count = static_cast<double>(n - begin);
  m.steady_v_ref_mean = sum_v / count;
  m.steady_margin_mean = sum_margin / count;
  m.ripple_pp = v_max - v_min;
  m.steady_v_opt = rows[n - 1].v_opt;
  m.tracking_accuracy = std::clamp(
      1.0 - std::abs(m.steady_v_ref_mean - m.steady_v_opt) / m.steady_v_opt, 0.0, 1.0);
  return m;
}

}  // namespace

RunResult run_transient(const ThermalModel& tm, const AnalogConfig& analog,
                        const DboConfig& dbo, const ThermalSchedule& sched,
                        std::uint64_t seed) {
  validate(analog);
  validate(dbo);
  validate(sched);
  const long n = cycle_count(dbo, sched);

  Rng analog_rng(derive_stream(seed, 0));
  Rng comparator_rng(derive_stream(seed, 1));

  RunResult result;
  result.trace.rows.reserve(static_cast<std::size_t>(n));
  DboState s = reset(dbo);
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dbo.sample_period;
    const double temp = sched.temp_at(t);
    if (!(temp >= tm.temp_min() && temp <= tm.temp_max()))
      throw std::out_of_range("run_transient: thermal schedule leaves the device range at t=" +
                              format_double(t) + " s (T=" + format_double(temp) + " degC)");
    const DeviceParams p = tm.params_at(temp);
    const VmSample vm = extract_vm(analog, p, s.v_ref, analog_rng);
    if (vm.bias_clamped) result.trace.bias_clamp_cycles.push_back(k);
    const StepRecord rec = step(dbo, s, vm.v_m, comparator_rng);
    result.trace.rows.push_back({rec.cycle, t, temp, rec.v_ref, rec.v_m, rec.v_s,
                                 rec.flip, rec.coarse, rec.pump_cmd, v_opt(p),
                                 margin(p, rec.v_ref)});
  }
  result.metrics = compute_metrics(result.trace, sched);
  return result;
}

std::vector<SweepPoint> sweep_margin(const DeviceParams& p, double v_min, double v_max,
                                     long points) {
  validate(p);
  if (!(v_min >= 0.0 && v_min < v_max))
    throw std::invalid_argument("sweep_margin: need 0 <= v_min < v_max");
  if (points < 2) throw std::invalid_argument("sweep_margin: points must be >= 2");
  std::vector<SweepPoint> out;
  out.reserve(static_cast<std::size_t>(points));
  for (long i = 0; i < points; ++i) {
    const double v = i == points - 1
                         ? v_max
                         : v_min + (v_max - v_min) * static_cast<double>(i) /
                                       static_cast<double>(points - 1);
    out.push_back({v, margin(p, v)});
  }
  return out;
}

namespace {

std::vector<AccuracyPoint> accuracy_map_impl(const AccuracyMapSpec& spec,
                                             const AnalogConfig& analog,
                                             const DboConfig& dbo, std::uint64_t seed,
                                             bool parallel) {
  if (spec.tmr0_values.empty() || spec.vh_values.empty())
    throw std::invalid_argument("tracking_accuracy_map: empty grid");
  validate(analog);
  validate(dbo);

  const long n_t = static_cast<long>(spec.tmr0_values.size());
  const long n_v = static_cast<long>(spec.vh_values.size());
  const long n = n_t * n_v;

  // Validate every grid point up front; the parallel loop must not throw.
  const double t_lo = std::min(ThermalModel::kDefaultTempMin, spec.temp_c - 1.0);
  const double t_hi = std::max(ThermalModel::kDefaultTempMax, spec.temp_c + 1.0);
  std::vector<ThermalModel> models;
  models.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n_t; ++i)
    for (long j = 0; j < n_v; ++j) {
      DeviceParams p{spec.tmr0_values[static_cast<std::size_t>(i)],
                     spec.vh_values[static_cast<std::size_t>(j)], spec.rp};
      validate(p);
      models.push_back(ThermalModel::constant(p, t_lo, t_hi));
    }
  const ThermalSchedule sched = ThermalSchedule::constant(spec.temp_c, spec.duration_s);
  validate(sched);
  cycle_count(dbo, sched);

  std::vector<AccuracyPoint> out(static_cast<std::size_t>(n));
  const auto run_point = [&](long idx) {
    const RunResult r =
        run_transient(models[static_cast<std::size_t>(idx)], analog, dbo, sched,
                      derive_stream(seed, static_cast<std::uint64_t>(idx)));
    out[static_cast<std::size_t>(idx)] = {
        spec.tmr0_values[static_cast<std::size_t>(idx / n_v)],
        spec.vh_values[static_cast<std::size_t>(idx % n_v)],
        r.metrics.tracking_accuracy};
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < n; ++idx) run_point(idx);
  } else {
    for (long idx = 0; idx < n; ++idx) run_point(idx);
  }
  return out;
}

}  // namespace

std::vector<AccuracyPoint> tracking_accuracy_map(const AccuracyMapSpec& spec,
                                                 const AnalogConfig& analog,
                                                 const DboConfig& dbo,
                                                 std::uint64_t seed) {
  return accuracy_map_impl(spec, analog, dbo, seed, true);
}

std::vector<AccuracyPoint> tracking_accuracy_map_serial(const AccuracyMapSpec& spec,
                                                        const AnalogConfig& analog,
                                                        const DboConfig& dbo,
                                                        std::uint64_t seed) {
  return accuracy_map_impl(spec, analog, dbo, seed, false);
}

std::vector<double> fixed_bias_margin_series(const ThermalModel& tm, const Trace& trace,
                                             double v_fixed) {
  if (v_fixed < 0.0)
    throw std::invalid_argument("fixed_bias_margin_series: v_fixed must be >= 0");
  std::vector<double> out;
  out.reserve(trace.rows.size());
  for (const TraceRow& row : trace.rows)
    out.push_back(margin(tm.params_at(row.temp_c), v_fixed));
  return out;
}

std::string trace_to_csv(const Trace& trace) {
  std::string csv = "cycle,time_s,temp_c,v_ref,v_m,v_s,flip,coarse,pump_cmd,v_opt,margin_a\n";
  for (const TraceRow& r : trace.rows) {
    csv += std::to_string(r.cycle);
    csv += ',';
    csv += format_double(r.time_s);
    csv += ',';
    csv += format_double(r.temp_c);
    csv += ',';
    csv += format_double(r.v_ref);
    csv += ',';
    csv += format_double(r.v_m);
    csv += ',';
    csv += format_double(r.v_s);
    csv += ',';
    csv += r.flip ? '1' : '0';
    csv += ',';
    csv += r.coarse ? '1' : '0';
    csv += ',';
    csv += to_string(r.pump_cmd);
    csv += ',';
    csv += format_double(r.v_opt);
    csv += ',';
    csv += format_double(r.margin_a);
    csv += '\n';
  }
  return csv;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& sweep) {
  std::string csv = "v_volts,margin_a\n";
  for (const SweepPoint& p : sweep)
    csv += format_double(p.v) + "," + format_double(p.margin_a) + "\n";
  return csv;
}

std::string accuracy_to_csv(const std::vector<AccuracyPoint>& map) {
  std::string csv = "tmr0,vh,accuracy\n";
  for (const AccuracyPoint& p : map)
    csv += format_double(p.tmr0) + "," + format_double(p.vh) + "," +
           format_double(p.accuracy) + "\n";
  return csv;
}

}  // namespace dbosim
