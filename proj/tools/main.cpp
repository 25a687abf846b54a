#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbosim/config.hpp"
#include "dbosim/csv.hpp"
#include "dbosim/engine.hpp"
#include "dbosim/variation.hpp"
#include "plot.hpp"

namespace {

using namespace dbosim;
namespace fs = std::filesystem;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool plot = false;
  bool quiet = false;
};

ScenarioConfig load_scenario(const GlobalOpts& g) {
  ScenarioConfig cfg =
      g.config_path.empty() ? ScenarioConfig{} : load_config_file(g.config_path);
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.variation.seed = *g.seed;
  }
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  return cfg;
}

void say(const GlobalOpts& g, const std::string& line) {
  if (!g.quiet) std::printf("%s\n", line.c_str());
}

// The effective post-default configuration is written next to the results;
// re-running from this echo reproduces them byte for byte.
void echo_config(const ScenarioConfig& cfg) {
  write_file_atomic(fs::path(cfg.out_dir) / "effective_config.json",
                    to_json(cfg).dump(2) + "\n");
}

std::vector<double> linspace(double lo, double hi, long n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  for (long i = 0; i < n; ++i)
    out.push_back(i == n - 1 ? hi
                             : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
  return out;
}

int cmd_vopt(double tmr0, double vh) {
  if (tmr0 < 0.0 || vh <= 0.0) {
    std::fprintf(stderr, "error: vopt requires --tmr0 >= 0 and --vh > 0\n");
    return 2;
  }
  std::printf("%.6f\n", vh * std::sqrt(1.0 + tmr0));
  return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const GlobalOpts& g) {
  DeviceParams p = cfg.device.params_at(cfg.sweep.temp_c);
  if (cfg.sweep.tmr0) p.tmr0 = *cfg.sweep.tmr0;
  if (cfg.sweep.vh) p.vh = *cfg.sweep.vh;
  if (cfg.sweep.rp) p.rp = *cfg.sweep.rp;
  validate(p);

  const auto sweep = sweep_margin(p, cfg.sweep.v_min, cfg.sweep.v_max, cfg.sweep.points);
  const fs::path out(cfg.out_dir);
  write_file_atomic(out / "sweep.csv", sweep_to_csv(sweep));
  echo_config(cfg);

  const auto best = std::max_element(
      sweep.begin(), sweep.end(),
      [](const SweepPoint& a, const SweepPoint& b) { return a.margin_a < b.margin_a; });
  say(g, "points=" + std::to_string(sweep.size()));
  say(g, "grid_argmax_v=" + format_double(best->v));
  say(g, "grid_max_margin_a=" + format_double(best->margin_a));
  say(g, "v_opt_closed_form=" + format_double(v_opt(p)));

  if (g.plot) {
    const auto table = plot::read_csv(out / "sweep.csv");
    plot::write_svg(out / "sweep.svg", "Sensing margin vs read bias", "v_ref [V]",
                    "margin [A]", {{"margin", table.column("v_volts"), table.column("margin_a")}});
  }
  return 0;
}

void write_trace_plots(const fs::path& out, const std::string& stem) {
  const auto table = plot::read_csv(out / (stem + ".csv"));
  const auto t = table.column("time_s");
  plot::write_svg(out / (stem + "_vref.svg"), "Read bias tracking", "time [s]",
                  "voltage [V]",
                  {{"v_ref", t, table.column("v_ref")},
                   {"v_opt", t, table.column("v_opt")}});
  plot::write_svg(out / (stem + "_vm.svg"), "Margin voltage and held sample",
                  "time [s]", "voltage [V]",
                  {{"v_m", t, table.column("v_m")}, {"v_s", t, table.column("v_s")}});
}

void print_metrics(const GlobalOpts& g, const RunResult& r) {
  say(g, "cycles=" + std::to_string(r.trace.rows.size()));
  say(g, "convergence_cycle=" + (r.metrics.convergence_cycle
                                     ? std::to_string(*r.metrics.convergence_cycle)
                                     : std::string("none")));
  say(g, "first_band_entry_cycle=" + std::to_string(r.metrics.first_band_entry_cycle));
  say(g, "min_accuracy_post_entry=" + format_double(r.metrics.min_accuracy_post_entry));
  say(g, "tracking_accuracy=" + format_double(r.metrics.tracking_accuracy));
  say(g, "ripple_pp_v=" + format_double(r.metrics.ripple_pp));
  say(g, "steady_v_ref_mean=" + format_double(r.metrics.steady_v_ref_mean));
  say(g, "steady_v_opt=" + format_double(r.metrics.steady_v_opt));
  say(g, "steady_margin_a=" + format_double(r.metrics.steady_margin_mean));
  if (!r.trace.bias_clamp_cycles.empty())
    say(g, "bias_clamp_warnings=" + std::to_string(r.trace.bias_clamp_cycles.size()));
}

int cmd_transient(const ScenarioConfig& cfg, const GlobalOpts& g) {
  const RunResult r =
      run_transient(cfg.device, cfg.analog, cfg.dbo, cfg.schedule, cfg.seed);
  const fs::path out(cfg.out_dir);
  write_file_atomic(out / "trace.csv", trace_to_csv(r.trace));
  echo_config(cfg);
  print_metrics(g, r);
  if (g.plot) write_trace_plots(out, "trace");
  return 0;
}

int cmd_drift(const ScenarioConfig& cfg, const GlobalOpts& g) {
  const DriftConfig& d = cfg.drift;
  ThermalSchedule sched;
  sched.segments.push_back({0.0, d.t_start_c, 0.0});
  double ramp_duration = 0.0;
  if (d.t_end_c != d.t_start_c) {
    const double rate = d.t_end_c > d.t_start_c ? std::abs(d.ramp_c_per_s)
                                                : -std::abs(d.ramp_c_per_s);
    ramp_duration = (d.t_end_c - d.t_start_c) / rate;
    sched.segments.push_back({d.hold_s, d.t_start_c, rate});
    sched.segments.push_back({d.hold_s + ramp_duration, d.t_end_c, 0.0});
  }
  sched.total_duration_s = d.hold_s + ramp_duration + d.tail_s;

  const RunResult r = run_transient(cfg.device, cfg.analog, cfg.dbo, sched, cfg.seed);
  const double fixed_bias =
      d.fixed_bias ? *d.fixed_bias : v_opt(cfg.device.params_at(d.t_start_c));
  const std::vector<double> fixed_margin =
      fixed_bias_margin_series(cfg.device, r.trace, fixed_bias);

  std::string csv = "cycle,time_s,temp_c,v_ref_dbo,margin_dbo_a,v_fixed,margin_fixed_a\n";
  for (std::size_t i = 0; i < r.trace.rows.size(); ++i) {
    const TraceRow& row = r.trace.rows[i];
    csv += std::to_string(row.cycle) + "," + format_double(row.time_s) + "," +
           format_double(row.temp_c) + "," + format_double(row.v_ref) + "," +
           format_double(row.margin_a) + "," + format_double(fixed_bias) + "," +
           format_double(fixed_margin[i]) + "\n";
  }
  const fs::path out(cfg.out_dir);
  write_file_atomic(out / "trace.csv", trace_to_csv(r.trace));
  write_file_atomic(out / "margin_compare.csv", csv);
  echo_config(cfg);

  double dbo_sum = 0.0, fixed_sum = 0.0;
  const long begin = r.metrics.steady_begin_cycle;
  const long n = static_cast<long>(r.trace.rows.size());
  for (long i = begin; i < n; ++i) {
    dbo_sum += r.trace.rows[static_cast<std::size_t>(i)].margin_a;
    fixed_sum += fixed_margin[static_cast<std::size_t>(i)];
  }
  const double count = static_cast<double>(n - begin);
  const double dbo_margin = dbo_sum / count;
  const double fix_margin = fixed_sum / count;
  print_metrics(g, r);
  say(g, "fixed_bias_v=" + format_double(fixed_bias));
  say(g, "steady_margin_dbo_a=" + format_double(dbo_margin));
  say(g, "steady_margin_fixed_a=" + format_double(fix_margin));
  say(g, "margin_improvement_pct=" + format_double(100.0 * (dbo_margin / fix_margin - 1.0)));

  if (g.plot) {
    write_trace_plots(out, "trace");
    const auto table = plot::read_csv(out / "margin_compare.csv");
    const auto t = table.column("time_s");
    plot::write_svg(out / "margin_compare.svg", "Sensing margin with and without tracking",
                    "time [s]", "margin [A]",
                    {{"tracked", t, table.column("margin_dbo_a")},
                     {"fixed", t, table.column("margin_fixed_a")}});
  }
  return 0;
}

int cmd_accuracy(const ScenarioConfig& cfg, const GlobalOpts& g) {
  AccuracyMapSpec spec;
  spec.tmr0_values = linspace(cfg.accuracy.tmr0_min, cfg.accuracy.tmr0_max,
                              cfg.accuracy.tmr0_points);
  spec.vh_values = linspace(cfg.accuracy.vh_min, cfg.accuracy.vh_max,
                            cfg.accuracy.vh_points);
  spec.rp = cfg.device.rp_ref();
  spec.temp_c = cfg.accuracy.temp_c;
  spec.duration_s = cfg.accuracy.duration_s;

  const auto map = tracking_accuracy_map(spec, cfg.analog, cfg.dbo, cfg.seed);
  const fs::path out(cfg.out_dir);
  write_file_atomic(out / "accuracy.csv", accuracy_to_csv(map));
  echo_config(cfg);

  double min_acc = 1.0, sum = 0.0;
  for (const AccuracyPoint& p : map) {
    min_acc = std::min(min_acc, p.accuracy);
    sum += p.accuracy;
  }
  say(g, "grid_points=" + std::to_string(map.size()));
  say(g, "min_accuracy=" + format_double(min_acc));
  say(g, "mean_accuracy=" + format_double(sum / static_cast<double>(map.size())));

  if (g.plot) {
    const auto table = plot::read_csv(out / "accuracy.csv");
    const auto tmr0 = table.column("tmr0");
    const auto vh = table.column("vh");
    const auto acc = table.column("accuracy");
    std::vector<plot::Series> series;
    std::map<double, std::size_t> by_tmr0;
    for (std::size_t i = 0; i < tmr0.size(); ++i) {
      auto [it, inserted] = by_tmr0.try_emplace(tmr0[i], series.size());
      if (inserted) series.push_back({"tmr0=" + format_double(tmr0[i]), {}, {}});
      series[it->second].x.push_back(vh[i]);
      series[it->second].y.push_back(acc[i]);
    }
    plot::write_svg(out / "accuracy.svg", "Steady-state tracking accuracy", "vh [V]",
                    "accuracy", series);
  }
  return 0;
}

int cmd_ber(const ScenarioConfig& cfg, const GlobalOpts& g) {
  const double fixed_bias =
      cfg.ber.fixed_bias
          ? *cfg.ber.fixed_bias
          : v_opt(cfg.device.params_at(cfg.ber.temps_c.front()));

  std::vector<BerCsvRow> rows;
  std::uint64_t row_index = 0;
  for (double temp : cfg.ber.temps_c) {
    for (double sigma : cfg.ber.sigma_grid) {
      VariationSpec spec = cfg.variation;
      spec.temp_c = temp;
      spec.sigma_over_mu_tmr0 = sigma;
      spec.sigma_over_mu_vh = sigma;
      spec.seed = derive_stream(cfg.seed, row_index++);
      const BerResult dbo =
          estimate_ber(spec, cfg.device, BerMode::kDbo, 0.0, cfg.dbo, cfg.analog);
      const BerResult fix = estimate_ber(spec, cfg.device, BerMode::kFixed, fixed_bias,
                                         cfg.dbo, cfg.analog);
      rows.push_back({dbo, temp, sigma, sigma});
      rows.push_back({fix, temp, sigma, sigma});
      say(g, "temp_c=" + format_double(temp) + " sigma_mu=" + format_double(sigma) +
                 " ber_dbo=" + format_double(dbo.ber) +
                 " ber_fixed=" + format_double(fix.ber) +
                 " ratio=" + format_double(dbo.ber > 0.0 ? fix.ber / dbo.ber : 0.0));
    }
  }
  const fs::path out(cfg.out_dir);
  write_file_atomic(out / "ber.csv", ber_to_csv(rows));
  echo_config(cfg);
  say(g, "rows=" + std::to_string(rows.size()));

  if (g.plot) {
    const auto table = plot::read_csv(out / "ber.csv");
    const auto mode = table.text_column("mode");
    const auto temp = table.column("temp_c");
    const auto sigma = table.column("sigma_mu_tmr0");
    const auto ber = table.column("ber");
    std::map<std::string, std::size_t> groups;
    std::vector<plot::Series> series;
    for (std::size_t i = 0; i < mode.size(); ++i) {
      const std::string key = mode[i] + " @" + format_double(temp[i]) + "C";
      auto [it, inserted] = groups.try_emplace(key, series.size());
      if (inserted) series.push_back({key, {}, {}});
      series[it->second].x.push_back(sigma[i]);
      series[it->second].y.push_back(ber[i]);
    }
    plot::write_svg(out / "ber.svg", "Bit error rate vs process variation",
                    "sigma/mu", "BER", series, /*log_y=*/true);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioral simulator of an MRAM read path with dynamic read-bias optimization"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  std::uint64_t seed_val = 0;
  std::string out_val;
  auto* seed_opt = app.add_option("--seed", seed_val, "Random seed (overrides config)");
  auto* out_opt =
      app.add_option("--out", out_val, "Output directory (overrides config)");
  app.add_option("--config", g.config_path, "Scenario configuration file (JSON)")
      ->check(CLI::ExistingFile);
  app.add_flag("--plot", g.plot, "Also write SVG plots derived from the CSVs");
  app.add_flag("--quiet", g.quiet, "Suppress the summary output");

  auto* c_vopt = app.add_subcommand("vopt", "Print the closed-form optimal read bias");
  double vopt_tmr0 = 0.0, vopt_vh = 0.0;
  c_vopt->add_option("--tmr0", vopt_tmr0, "Zero-bias TMR ratio (1.0 = 100 %)")->required();
  c_vopt->add_option("--vh", vopt_vh, "Half-TMR voltage, volts")->required();

  auto* c_sweep = app.add_subcommand("sweep", "Margin vs read-bias sweep (CSV)");
  double s_tmr0 = 0, s_vh = 0, s_rp = 0, s_temp = 0, s_vmin = 0, s_vmax = 0;
  long s_points = 0;
  auto* s_tmr0_o = c_sweep->add_option("--tmr0", s_tmr0, "Override tmr0");
  auto* s_vh_o = c_sweep->add_option("--vh", s_vh, "Override vh [V]");
  auto* s_rp_o = c_sweep->add_option("--rp", s_rp, "Override rp [ohm]");
  auto* s_temp_o = c_sweep->add_option("--temp", s_temp, "Device temperature [degC]");
  auto* s_vmin_o = c_sweep->add_option("--vmin", s_vmin, "Sweep start [V]");
  auto* s_vmax_o = c_sweep->add_option("--vmax", s_vmax, "Sweep end [V]");
  auto* s_points_o = c_sweep->add_option("--points", s_points, "Sweep points");

  auto* c_transient = app.add_subcommand("transient", "Transient tracking run (trace CSV + metrics)");
  double t_duration = 0, t_temp = 0;
  auto* t_duration_o = c_transient->add_option("--duration", t_duration, "Run length [s]");
  auto* t_temp_o =
      c_transient->add_option("--temp", t_temp, "Constant temperature [degC]");

  auto* c_drift = app.add_subcommand("drift", "Temperature-drift run with fixed-bias comparison");
  double d_rate = 0, d_hold = 0, d_tail = 0, d_fixed = 0;
  auto* d_rate_o = c_drift->add_option("--rate", d_rate, "Ramp rate [degC/s]");
  auto* d_hold_o = c_drift->add_option("--hold", d_hold, "Settle time before ramp [s]");
  auto* d_tail_o = c_drift->add_option("--tail", d_tail, "Hold time after ramp [s]");
  auto* d_fixed_o =
      c_drift->add_option("--fixed-bias", d_fixed, "Baseline fixed bias [V]");

  auto* c_accuracy = app.add_subcommand("accuracy", "Tracking-accuracy map over (tmr0, vh)");
  double a_temp = 0, a_duration = 0;
  auto* a_temp_o = c_accuracy->add_option("--temp", a_temp, "Temperature [degC]");
  auto* a_duration_o =
      c_accuracy->add_option("--duration", a_duration, "Per-point run length [s]");

  auto* c_ber = app.add_subcommand("ber", "Monte Carlo BER vs process variation");
  long b_cells = 0;
  double b_sa = 0, b_fixed = 0;
  auto* b_cells_o = c_ber->add_option("--n-cells", b_cells, "Data cells to evaluate");
  auto* b_sa_o = c_ber->add_option("--sa-sigma", b_sa, "Sense-amp offset sigma [A]");
  auto* b_fixed_o = c_ber->add_option("--fixed-bias", b_fixed, "FIXED-mode bias [V]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (seed_opt->count()) g.seed = seed_val;
  if (out_opt->count()) g.out_dir = out_val;

  try {
    if (*c_vopt) return cmd_vopt(vopt_tmr0, vopt_vh);

    ScenarioConfig cfg = load_scenario(g);
    if (*c_sweep) {
      if (s_tmr0_o->count()) cfg.sweep.tmr0 = s_tmr0;
      if (s_vh_o->count()) cfg.sweep.vh = s_vh;
      if (s_rp_o->count()) cfg.sweep.rp = s_rp;
      if (s_temp_o->count()) cfg.sweep.temp_c = s_temp;
      if (s_vmin_o->count()) cfg.sweep.v_min = s_vmin;
      if (s_vmax_o->count()) cfg.sweep.v_max = s_vmax;
      if (s_points_o->count()) cfg.sweep.points = s_points;
      return cmd_sweep(cfg, g);
    }
    if (*c_transient) {
      if (t_duration_o->count()) cfg.schedule.total_duration_s = t_duration;
      if (t_temp_o->count())
        cfg.schedule.segments = {{0.0, t_temp, 0.0}};
      return cmd_transient(cfg, g);
    }
    if (*c_drift) {
      if (d_rate_o->count()) cfg.drift.ramp_c_per_s = d_rate;
      if (d_hold_o->count()) cfg.drift.hold_s = d_hold;
      if (d_tail_o->count()) cfg.drift.tail_s = d_tail;
      if (d_fixed_o->count()) cfg.drift.fixed_bias = d_fixed;
      return cmd_drift(cfg, g);
    }
    if (*c_accuracy) {
      if (a_temp_o->count()) cfg.accuracy.temp_c = a_temp;
      if (a_duration_o->count()) cfg.accuracy.duration_s = a_duration;
      return cmd_accuracy(cfg, g);
    }
    if (*c_ber) {
      if (b_cells_o->count()) cfg.variation.n_cells = b_cells;
      if (b_sa_o->count()) cfg.variation.sa_offset_sigma = b_sa;
      if (b_fixed_o->count()) cfg.ber.fixed_bias = b_fixed;
      return cmd_ber(cfg, g);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
