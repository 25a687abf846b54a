#pragma once

#include "dbosim/device.hpp"
#include "dbosim/rng.hpp"

namespace dbosim {

// Behavioral margin-extraction chain: clamped reference cells, subtracting
// mirror, trans-impedance stage and source follower. Settling is treated as
// instantaneous; the source follower is a unity buffer whose level shift is
// absorbed into vm_offset.
struct AnalogConfig {
  double r_ref = 100e3;         // TIA resistor, ohms
  double mirror_gain = 1.0;     // output mirror width ratio
  double vm_offset = 0.0;       // systematic output offset, volts
  double vm_noise_sigma = 0.0;  // per-evaluation Gaussian noise, volts
  double clamp_error = 0.0;     // deviation of regulated MTJ bias from v_ref, volts
};

void validate(const AnalogConfig& cfg);

struct VmSample {
  double v_m;         // observed margin voltage
  bool bias_clamped;  // effective bias went negative and was clamped to 0
};

// (i_p of ref_p - i_ap of ref_ap) / 2 at bias v. Equals margin(p, v) to
// roundoff when both reference cells are p.
double pair_margin(const DeviceParams& ref_p, const DeviceParams& ref_ap, double v);

// Margin voltage r_ref * mirror_gain * i_m + vm_offset (+ noise) for a
// matched reference pair. With all non-idealities zero the result is
// deterministic and proportional to margin(p, v_ref).
VmSample extract_vm(const AnalogConfig& cfg, const DeviceParams& p, double v_ref,
                    Rng& rng);

// Same chain with distinct P-branch and AP-branch reference cells.
VmSample extract_vm_pair(const AnalogConfig& cfg, const DeviceParams& ref_p,
                         const DeviceParams& ref_ap, double v_ref, Rng& rng);

}  // namespace dbosim
