#include "dbosim/device.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dbosim {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void validate(const DeviceParams& p) {
  require(std::isfinite(p.tmr0) && p.tmr0 > 0.0, "DeviceParams: tmr0 must be > 0");
  require(std::isfinite(p.vh) && p.vh > 0.0, "DeviceParams: vh must be > 0");
  require(std::isfinite(p.rp) && p.rp > 0.0, "DeviceParams: rp must be > 0");
}

double tmr_at(const DeviceParams& p, double v) {
  require(v >= 0.0, "tmr_at: bias voltage must be >= 0");
  const double x = v / p.vh;
  return p.tmr0 / (1.0 + x * x);
}

CellCurrents cell_currents(const DeviceParams& p, double v) {
  require(v >= 0.0, "cell_currents: bias voltage must be >= 0");
  const double i_p = v / p.rp;
  const double i_ap = v / (p.rp * (1.0 + tmr_at(p, v)));
  return {i_p, i_ap};
}

double reference_current(const DeviceParams& p, double v) {
  const CellCurrents c = cell_currents(p, v);
  return 0.5 * (c.i_p + c.i_ap);
}

double margin(const DeviceParams& p, double v) {
  require(v >= 0.0, "margin: bias voltage must be >= 0");
  if (v == 0.0) return 0.0;
  return p.tmr0 / (2.0 * p.rp) / ((1.0 + p.tmr0) / v + v / (p.vh * p.vh));
}

double v_opt(const DeviceParams& p) {
  require(p.tmr0 >= 0.0, "v_opt: tmr0 must be >= 0");
  require(p.vh > 0.0, "v_opt: vh must be > 0");
  return p.vh * std::sqrt(1.0 + p.tmr0);
}

ThermalModel::ThermalModel(std::vector<ThermalAnchor> anchors, double rp_ref,
                           double temp_min_c, double temp_max_c)
    : anchors_(std::move(anchors)),
      rp_ref_(rp_ref),
      temp_min_c_(temp_min_c),
      temp_max_c_(temp_max_c) {
  require(anchors_.size() >= 2, "ThermalModel: at least two anchors required");
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    const ThermalAnchor& a = anchors_[i];
    require(std::isfinite(a.temp_c), "ThermalModel: anchor temperature must be finite");
    require(std::isfinite(a.tmr0) && a.tmr0 > 0.0,
            "ThermalModel: anchor tmr0 must be > 0");
    require(std::isfinite(a.vh) && a.vh > 0.0, "ThermalModel: anchor vh must be > 0");
    if (i > 0) {
      require(anchors_[i - 1].temp_c < a.temp_c,
              "ThermalModel: anchor temperatures must be strictly increasing");
    }
  }
  require(std::isfinite(rp_ref_) && rp_ref_ > 0.0, "ThermalModel: rp_ref must be > 0");
  require(temp_min_c_ < temp_max_c_,
          "ThermalModel: temp_min_c must be below temp_max_c");
}

ThermalModel ThermalModel::constant(const DeviceParams& p, double temp_min_c,
                                    double temp_max_c) {
  validate(p);
  return ThermalModel({{temp_min_c, p.tmr0, p.vh}, {temp_max_c, p.tmr0, p.vh}},
                      p.rp, temp_min_c, temp_max_c);
}

DeviceParams ThermalModel::params_at(double temp_c) const {
  if (!(temp_c >= temp_min_c_ && temp_c <= temp_max_c_)) {
    throw std::out_of_range("ThermalModel: temperature " + std::to_string(temp_c) +
                            " degC outside simulation range [" +
                            std::to_string(temp_min_c_) + ", " +
                            std::to_string(temp_max_c_) + "]");
  }
  // Anchor temperatures must reproduce anchor values exactly.
  for (const ThermalAnchor& a : anchors_) {
    if (temp_c == a.temp_c) return {a.tmr0, a.vh, rp_ref_};
  }
  // Segment containing temp_c; the outermost segments extrapolate.
  std::size_t hi = 1;
  while (hi + 1 < anchors_.size() && anchors_[hi].temp_c < temp_c) ++hi;
  const ThermalAnchor& a = anchors_[hi - 1];
  const ThermalAnchor& b = anchors_[hi];
  const double f = (temp_c - a.temp_c) / (b.temp_c - a.temp_c);
  DeviceParams p{a.tmr0 + f * (b.tmr0 - a.tmr0), a.vh + f * (b.vh - a.vh), rp_ref_};
  require(p.tmr0 > 0.0 && p.vh > 0.0,
          "ThermalModel: extrapolated parameters are non-physical at " +
              std::to_string(temp_c) + " degC");
  return p;
}

}  // namespace dbosim
