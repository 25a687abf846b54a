#pragma once

#include <cstdint>

#include "dbosim/rng.hpp"

namespace dbosim {

enum class Direction : std::uint8_t { kUp, kDown };

// Charge-pump command issued in a cycle: coarse up, fine up, or fine down.
enum class PumpCmd : std::uint8_t { kUpCoarse, kUpFine, kDown };

const char* to_string(PumpCmd cmd);  // "UP_C" / "UP_F" / "DN"

// Controller constants. Defaults: 4 mV fine step, 20x coarse step, 5 MHz
// sampling, v_ref confined to [0, 1 V].
struct DboConfig {
  double fine_step = 0.004;
  int coarse_ratio = 20;
  double sample_period = 200e-9;
  double v_ref_max = 1.0;
  double v_ref_init = 0.0;
  double comparator_hysteresis = 0.0;
  double comparator_offset_sigma = 0.0;
  // Cycles without a FLIP before COARSE re-arms; 0 disables re-arming.
  long rearm_coarse_after = 0;
};

void validate(const DboConfig& cfg);

struct DboState {
  double v_ref = 0.0;
  double v_s = 0.0;  // held sample
  Direction direction = Direction::kUp;
  bool coarse = true;
  long cycle = 0;
  long last_flip_cycle = 0;
  PumpCmd pump_cmd = PumpCmd::kUpCoarse;  // last issued command
};

DboState reset(const DboConfig& cfg);

// Signals of one sample cycle. v_ref is the bias this cycle evaluated
// (before the pump update); v_s is the held sample the comparator compared
// against; coarse reflects any FLIP that fired this cycle.
struct StepRecord {
  long cycle;
  double v_ref;
  double v_m;
  double v_s;
  bool flip;
  bool coarse;
  PumpCmd pump_cmd;
};

// One sample cycle, in fixed order: comparator decision, direction flip,
// sample/hold, charge-pump update, optional coarse re-arm. The first cycle
// after reset never flips (no held sample exists yet).
// Throws std::invalid_argument on non-finite v_m.
StepRecord step(const DboConfig& cfg, DboState& s, double v_m, Rng& rng);

}  // namespace dbosim
