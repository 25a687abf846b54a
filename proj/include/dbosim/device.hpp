#pragma once

#include <vector>

namespace dbosim {

// Electrical parameters of an MTJ cell (or a population mean) at one
// temperature. tmr0 is a ratio (1.0 == 100 %), vh in volts, rp in ohms.
struct DeviceParams {
  double tmr0 = 1.0;
  double vh = 0.3;
  double rp = 10e3;
};

// Throws std::invalid_argument unless tmr0 > 0, vh > 0, rp > 0 (all finite).
void validate(const DeviceParams& p);

// Bias-dependent TMR ratio tmr0 / (1 + v^2/vh^2). Strictly decreasing in v,
// equals tmr0/2 at v == vh. Requires v >= 0.
double tmr_at(const DeviceParams& p, double v);

struct CellCurrents {
  double i_p;   // parallel-state cell current, amperes
  double i_ap;  // anti-parallel-state cell current, amperes
};

// Currents of a P cell and an AP cell biased at v.
CellCurrents cell_currents(const DeviceParams& p, double v);

// Midpoint reference (i_p + i_ap)/2 produced by the 2:1-mirrored parallel
// reference pair; read-1 and read-0 margins around it are equal.
double reference_current(const DeviceParams& p, double v);

// Sensing current margin (i_p - i_ap)/2 in closed form,
//   tmr0/(2 rp) / ((1 + tmr0)/v + v/vh^2),
// defined as 0 at v == 0 by continuity. Unimodal in v, maximal at v_opt(p).
double margin(const DeviceParams& p, double v);

// Closed-form argmax of margin(p, .): vh * sqrt(1 + tmr0).
// Accepts tmr0 == 0 as the degenerate limit.
double v_opt(const DeviceParams& p);

// One tabulated (temperature, tmr0, vh) point.
struct ThermalAnchor {
  double temp_c;
  double tmr0;
  double vh;
};

// Piecewise-linear temperature dependence of tmr0 and vh between anchors,
// linearly extrapolated outside the anchor span using the nearest segment.
// rp is temperature-independent.
class ThermalModel {
 public:
  static constexpr double kDefaultTempMin = -40.0;
  static constexpr double kDefaultTempMax = 125.0;

  // Anchors must have strictly increasing temperatures (at least two).
  ThermalModel(std::vector<ThermalAnchor> anchors, double rp_ref,
               double temp_min_c = kDefaultTempMin,
               double temp_max_c = kDefaultTempMax);

  // Model with the same parameters at every temperature.
  static ThermalModel constant(const DeviceParams& p,
                               double temp_min_c = kDefaultTempMin,
                               double temp_max_c = kDefaultTempMax);

  // Parameters at temp_c. Anchor temperatures reproduce anchor values
  // exactly. Throws std::out_of_range outside [temp_min, temp_max].
  DeviceParams params_at(double temp_c) const;

  double temp_min() const { return temp_min_c_; }
  double temp_max() const { return temp_max_c_; }
  double rp_ref() const { return rp_ref_; }
  const std::vector<ThermalAnchor>& anchors() const { return anchors_; }

 private:
  std::vector<ThermalAnchor> anchors_;
  double rp_ref_;
  double temp_min_c_;
  double temp_max_c_;
};

}  // namespace dbosim
