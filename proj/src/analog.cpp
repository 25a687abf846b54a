#include "dbosim/analog.hpp"

#include <cmath>
#include <stdexcept>

namespace dbosim {

void validate(const AnalogConfig& cfg) {
  if (!(std::isfinite(cfg.r_ref) && cfg.r_ref > 0.0))
    throw std::invalid_argument("AnalogConfig: r_ref must be > 0");
  if (!(std::isfinite(cfg.mirror_gain) && cfg.mirror_gain > 0.0))
    throw std::invalid_argument("AnalogConfig: mirror_gain must be > 0");
  if (!(std::isfinite(cfg.vm_noise_sigma) && cfg.vm_noise_sigma >= 0.0))
    throw std::invalid_argument("AnalogConfig: vm_noise_sigma must be >= 0");
  if (!std::isfinite(cfg.vm_offset) || !std::isfinite(cfg.clamp_error))
    throw std::invalid_argument("AnalogConfig: offsets must be finite");
}

double pair_margin(const DeviceParams& ref_p, const DeviceParams& ref_ap, double v) {
  if (v < 0.0) throw std::invalid_argument("pair_margin: bias voltage must be >= 0");
  const double i_p = v / ref_p.rp;
  const double i_ap = v / (ref_ap.rp * (1.0 + tmr_at(ref_ap, v)));
  return 0.5 * (i_p - i_ap);
}

namespace {

VmSample chain_output(const AnalogConfig& cfg, double i_m, bool clamped, Rng& rng) {
  double v_m = cfg.r_ref * cfg.mirror_gain * i_m + cfg.vm_offset;
  if (cfg.vm_noise_sigma > 0.0) v_m += rng.normal(0.0, cfg.vm_noise_sigma);
  return {v_m, clamped};
}

// The clamp circuits cannot drive the MTJ bias below ground.
double effective_bias(const AnalogConfig& cfg, double v_ref, bool& clamped) {
  double v = v_ref + cfg.clamp_error;
  clamped = v < 0.0;
  return clamped ? 0.0 : v;
}

}  // namespace

VmSample extract_vm(const AnalogConfig& cfg, const DeviceParams& p, double v_ref,
                    Rng& rng) {
  if (v_ref < 0.0) throw std::invalid_argument("extract_vm: v_ref must be >= 0");
  bool clamped = false;
  const double v = effective_bias(cfg, v_ref, clamped);
  return chain_output(cfg, margin(p, v), clamped, rng);
}

VmSample extract_vm_pair(const AnalogConfig& cfg, const DeviceParams& ref_p,
                         const DeviceParams& ref_ap, double v_ref, Rng& rng) {
  if (v_ref < 0.0) throw std::invalid_argument("extract_vm_pair: v_ref must be >= 0");
  bool clamped = false;
  const double v = effective_bias(cfg, v_ref, clamped);
  return chain_output(cfg, pair_margin(ref_p, ref_ap, v), clamped, rng);
}

}  // namespace dbosim
