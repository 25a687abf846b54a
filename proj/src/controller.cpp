#include "dbosim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dbosim {

const char* to_string(PumpCmd cmd) {
  switch (cmd) {
    case PumpCmd::kUpCoarse: return "UP_C";
    case PumpCmd::kUpFine: return "UP_F";
    case PumpCmd::kDown: return "DN";
  }
  return "?";
}

void validate(const DboConfig& cfg) {
  if (!(std::isfinite(cfg.fine_step) && cfg.fine_step > 0.0))
    throw std::invalid_argument("DboConfig: fine_step must be > 0");
  if (cfg.coarse_ratio < 1)
    throw std::invalid_argument("DboConfig: coarse_ratio must be >= 1");
  if (!(std::isfinite(cfg.sample_period) && cfg.sample_period > 0.0))
    throw std::invalid_argument("DboConfig: sample_period must be > 0");
  if (!(std::isfinite(cfg.v_ref_max) && cfg.v_ref_max > 0.0))
    throw std::invalid_argument("DboConfig: v_ref_max must be > 0");
  if (!(cfg.v_ref_init >= 0.0 && cfg.v_ref_init <= cfg.v_ref_max))
    throw std::invalid_argument("DboConfig: v_ref_init must lie in [0, v_ref_max]");
  if (!(std::isfinite(cfg.comparator_hysteresis) && cfg.comparator_hysteresis >= 0.0))
    throw std::invalid_argument("DboConfig: comparator_hysteresis must be >= 0");
  if (!(std::isfinite(cfg.comparator_offset_sigma) && cfg.comparator_offset_sigma >= 0.0))
    throw std::invalid_argument("DboConfig: comparator_offset_sigma must be >= 0");
  if (cfg.rearm_coarse_after < 0)
    throw std::invalid_argument("DboConfig: rearm_coarse_after must be >= 0");
}

DboState reset(const DboConfig& cfg) {
  DboState s;
  s.v_ref = cfg.v_ref_init;
  s.v_s = 0.0;
  s.direction = Direction::kUp;
  s.coarse = true;
  s.cycle = 0;
  s.last_flip_cycle = 0;
  s.pump_cmd = PumpCmd::kUpCoarse;
  return s;
}

StepRecord step(const DboConfig& cfg, DboState& s, double v_m, Rng& rng) {
  if (!std::isfinite(v_m))
    throw std::invalid_argument("step: non-finite v_m at cycle " + std::to_string(s.cycle));

  // (1) comparator: FLIP when the margin dropped below the held sample.
  // Suppressed on the first cycle after reset, when no sample is held yet.
  bool flip = false;
  if (s.cycle > 0) {
    double h = cfg.comparator_hysteresis;
    if (cfg.comparator_offset_sigma > 0.0)
      h += rng.normal(0.0, cfg.comparator_offset_sigma);
    flip = v_m < s.v_s - h;
  }

  // (2) FLIP toggles the charging direction and ends the coarse phase.
  if (flip) {
    s.direction = s.direction == Direction::kUp ? Direction::kDown : Direction::kUp;
    s.coarse = false;
    s.last_flip_cycle = s.cycle;
  }

  StepRecord rec;
  rec.cycle = s.cycle;
  rec.v_ref = s.v_ref;
  rec.v_m = v_m;
  rec.v_s = s.v_s;
  rec.flip = flip;
  rec.coarse = s.coarse;

  // (3) sample/hold.
  s.v_s = v_m;

  // (4) charge pump. Down steps are always fine-sized.
  double delta;
  if (s.direction == Direction::kUp) {
    if (s.coarse) {
      delta = cfg.coarse_ratio * cfg.fine_step;
      s.pump_cmd = PumpCmd::kUpCoarse;
    } else {
      delta = cfg.fine_step;
      s.pump_cmd = PumpCmd::kUpFine;
    }
  } else {
    delta = -cfg.fine_step;
    s.pump_cmd = PumpCmd::kDown;
  }
  s.v_ref = std::clamp(s.v_ref + delta, 0.0, cfg.v_ref_max);
  rec.pump_cmd = s.pump_cmd;

  // (5) optional coarse re-arm after a long flip-free stretch.
  if (cfg.rearm_coarse_after > 0 && s.cycle - s.last_flip_cycle > cfg.rearm_coarse_after)
    s.coarse = true;

  // (6)
  s.cycle += 1;
  return rec;
}

}  // namespace dbosim
