#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbosim/analog.hpp"
#include "dbosim/controller.hpp"
#include "dbosim/device.hpp"

namespace dbosim {

struct BlockLayout {
  long rows = 512;
  long data_bitlines = 32;
  long ref_bitlines = 2;
};

// Process-variation settings for Monte Carlo BER estimation. Parameter draws
// are Gaussian around the population mean with sigma = sigma_over_mu * mean,
// truncated at +/-4 sigma and floored at 10 % of the mean.
struct VariationSpec {
  double sigma_over_mu_tmr0 = 0.05;
  double sigma_over_mu_vh = 0.05;
  double sigma_over_mu_rp = 0.0;
  double correlation = 0.0;       // common-factor correlation between parameter draws
  double sa_offset_sigma = 1e-6;  // sense-amp input-referred offset sigma, amperes
  long n_cells = 1L << 20;        // data cells evaluated across all blocks
  long n_blocks = 64;
  BlockLayout layout;
  double temp_c = 25.0;
  std::uint64_t seed = 1;
  long dbo_settle_cycles = 512;  // controller cycles per block in DBO mode
};

void validate(const VariationSpec& spec);

struct BlockSample {
  DeviceParams ref_p;
  DeviceParams ref_ap;
  std::vector<DeviceParams> cells;
};

// Draws one block: the two reference cells first, then n_cells data cells
// (tmr0, vh, rp in that order per cell).
BlockSample sample_block(const VariationSpec& spec, const DeviceParams& base,
                         long n_cells, Rng& rng);

enum class BerMode { kDbo, kFixed };

const char* to_string(BerMode mode);  // "DBO" / "FIXED"

struct BerResult {
  BerMode mode;
  double v_read;  // fixed bias, or mean per-block steady bias in DBO mode
  double ber;
  double std_error;  // standard error of the mean per-cell probability
  long n_cells_evaluated;
};

// Per-read error probability of a data cell read against the block reference
// pair at v_read: stored 1 and 0 are equiprobable and the sense amp adds a
// Gaussian offset of sa_sigma amperes per read.
double cell_error_prob(const DeviceParams& cell, const DeviceParams& ref_p,
                       const DeviceParams& ref_ap, double v_read, double sa_sigma);

// Steady read bias the controller settles to against one block's reference
// pair (mean v_ref over the final quarter of settle_cycles).
double dbo_block_bias(const DeviceParams& ref_p, const DeviceParams& ref_ap,
                      const DboConfig& dbo, const AnalogConfig& analog,
                      long settle_cycles, Rng& rng);

// Monte Carlo BER over n_blocks independent blocks. In kFixed mode every
// block reads at fixed_bias; in kDbo mode each block reads at the bias its
// own controller settles to. Blocks use streams derived from
// (spec.seed, block index) and are reduced in block order with compensated
// summation, so the parallel version is bit-identical to the serial one.
BerResult estimate_ber(const VariationSpec& spec, const ThermalModel& tm, BerMode mode,
                       double fixed_bias, const DboConfig& dbo,
                       const AnalogConfig& analog);
BerResult estimate_ber_serial(const VariationSpec& spec, const ThermalModel& tm,
                              BerMode mode, double fixed_bias, const DboConfig& dbo,
                              const AnalogConfig& analog);

// Stream seed used for block block_index; exposed so an external oracle can
// reproduce the exact population estimate_ber evaluates.
std::uint64_t block_stream_seed(const VariationSpec& spec, long block_index);

// Data cells evaluated in block block_index under spec.n_cells.
long block_cell_count(const VariationSpec& spec, long block_index);

struct BerCsvRow {
  BerResult result;
  double temp_c;
  double sigma_mu_tmr0;
  double sigma_mu_vh;
};

// CSV: mode,v_read,temp_c,sigma_mu_tmr0,sigma_mu_vh,ber,stderr,n_cells
std::string ber_to_csv(const std::vector<BerCsvRow>& rows);

}  // namespace dbosim
