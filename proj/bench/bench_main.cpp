// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: Monte Carlo BER over independent blocks and the tracking
// accuracy map over a parameter grid. Both pairs are bit-identical by
// construction; this binary only reports wall time.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dbosim/config.hpp"
#include "dbosim/engine.hpp"
#include "dbosim/variation.hpp"

using namespace dbosim;

namespace {

template <typename F>
double time_seconds(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s %10.3f s %12.3f s %8.2fx\n", name, serial_s, parallel_s,
              serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-28s %12s %14s %9s\n", "kernel", "serial", "parallel", "speedup");

  const ThermalModel tm = default_thermal_model();

  {
    VariationSpec spec;
    spec.n_cells = 1L << 20;  // full 64-block array
    spec.seed = 1;
    BerResult serial_result{}, parallel_result{};
    {
      VariationSpec warm = spec;
      warm.n_cells = 1L << 14;
      estimate_ber(warm, tm, BerMode::kDbo, 0.0, DboConfig{}, AnalogConfig{});
    }
    const double ts = time_seconds([&] {
      serial_result =
          estimate_ber_serial(spec, tm, BerMode::kDbo, 0.0, DboConfig{}, AnalogConfig{});
    });
    const double tp = time_seconds([&] {
      parallel_result =
          estimate_ber(spec, tm, BerMode::kDbo, 0.0, DboConfig{}, AnalogConfig{});
    });
    row("ber 1M cells (DBO mode)", ts, tp);
    if (serial_result.ber != parallel_result.ber)
      std::printf("MISMATCH: serial and parallel BER differ!\n");
  }

  {
    AccuracyMapSpec spec;
    for (int i = 0; i < 12; ++i) {
      spec.tmr0_values.push_back(0.6 + 0.05 * i);
      spec.vh_values.push_back(0.2 + 0.0125 * i);
    }
    spec.duration_s = 400e-6;
    std::vector<AccuracyPoint> serial_map, parallel_map;
    {
      AccuracyMapSpec warm = spec;
      warm.duration_s = 40e-6;
      tracking_accuracy_map(warm, AnalogConfig{}, DboConfig{}, 2);
    }
    const double ts = time_seconds([&] {
      serial_map = tracking_accuracy_map_serial(spec, AnalogConfig{}, DboConfig{}, 2);
    });
    const double tp = time_seconds([&] {
      parallel_map = tracking_accuracy_map(spec, AnalogConfig{}, DboConfig{}, 2);
    });
    row("accuracy map 12x12", ts, tp);
    for (std::size_t i = 0; i < serial_map.size(); ++i)
      if (serial_map[i].accuracy != parallel_map[i].accuracy) {
        std::printf("MISMATCH: serial and parallel accuracy maps differ!\n");
        break;
      }
  }
  return 0;
}
