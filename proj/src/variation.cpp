#include "dbosim/variation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dbosim/csv.hpp"

namespace dbosim {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Neumaier-compensated accumulator; BER means average up to ~1e6 tiny
// probabilities, where naive summation order would show.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }

  double value() const { return sum + c; }
};

double truncated_draw(double mean, double sigma_over_mu, double z) {
  if (sigma_over_mu == 0.0) return mean;
  const double sigma = sigma_over_mu * mean;
  const double x = std::clamp(mean + sigma * z, mean - 4.0 * sigma, mean + 4.0 * sigma);
  return std::max(x, 0.1 * mean);
}

DeviceParams draw_params(const VariationSpec& spec, const DeviceParams& base, Rng& rng) {
  // Single common factor yields equicorrelated parameter draws.
  double shared = 0.0;
  const double rho = spec.correlation;
  if (rho > 0.0) shared = rng.normal();
  const auto z = [&]() {
    const double own = rng.normal();
    return rho > 0.0 ? std::sqrt(rho) * shared + std::sqrt(1.0 - rho) * own : own;
  };
  DeviceParams p;
  p.tmr0 = truncated_draw(base.tmr0, spec.sigma_over_mu_tmr0, z());
  p.vh = truncated_draw(base.vh, spec.sigma_over_mu_vh, z());
  p.rp = truncated_draw(base.rp, spec.sigma_over_mu_rp, z());
  return p;
}

}  // namespace

void validate(const VariationSpec& spec) {
  if (spec.sigma_over_mu_tmr0 < 0.0 || spec.sigma_over_mu_vh < 0.0 ||
      spec.sigma_over_mu_rp < 0.0)
    throw std::invalid_argument("VariationSpec: sigma/mu ratios must be >= 0");
  if (!(spec.correlation >= 0.0 && spec.correlation <= 1.0))
    throw std::invalid_argument("VariationSpec: correlation must lie in [0, 1]");
  if (!(std::isfinite(spec.sa_offset_sigma) && spec.sa_offset_sigma > 0.0))
    throw std::invalid_argument("VariationSpec: sa_offset_sigma must be > 0");
  if (spec.n_cells < 1) throw std::invalid_argument("VariationSpec: n_cells must be >= 1");
  if (spec.n_blocks < 1)
    throw std::invalid_argument("VariationSpec: n_blocks must be >= 1");
  if (spec.layout.rows < 1 || spec.layout.data_bitlines < 1 || spec.layout.ref_bitlines < 1)
    throw std::invalid_argument("VariationSpec: block layout counts must be >= 1");
  if (spec.dbo_settle_cycles < 4)
    throw std::invalid_argument("VariationSpec: dbo_settle_cycles must be >= 4");
}

BlockSample sample_block(const VariationSpec& spec, const DeviceParams& base,
                         long n_cells, Rng& rng) {
  validate(base);
  BlockSample bs;
  bs.ref_p = draw_params(spec, base, rng);
  bs.ref_ap = draw_params(spec, base, rng);
  bs.cells.reserve(static_cast<std::size_t>(n_cells));
  for (long i = 0; i < n_cells; ++i) bs.cells.push_back(draw_params(spec, base, rng));
  return bs;
}

const char* to_string(BerMode mode) {
  return mode == BerMode::kDbo ? "DBO" : "FIXED";
}

double cell_error_prob(const DeviceParams& cell, const DeviceParams& ref_p,
                       const DeviceParams& ref_ap, double v_read, double sa_sigma) {
  if (!std::isfinite(v_read) || v_read < 0.0)
    throw std::invalid_argument("cell_error_prob: v_read must be finite and >= 0");
  if (!(std::isfinite(sa_sigma) && sa_sigma > 0.0))
    throw std::invalid_argument("cell_error_prob: sa_sigma must be > 0");
  const double i_ref =
      0.5 * (cell_currents(ref_p, v_read).i_p + cell_currents(ref_ap, v_read).i_ap);
  const CellCurrents c = cell_currents(cell, v_read);
  return 0.5 * normal_cdf(-(c.i_p - i_ref) / sa_sigma) +
         0.5 * normal_cdf(-(i_ref - c.i_ap) / sa_sigma);
}

double dbo_block_bias(const DeviceParams& ref_p, const DeviceParams& ref_ap,
                      const DboConfig& dbo, const AnalogConfig& analog,
                      long settle_cycles, Rng& rng) {
  if (settle_cycles < 4)
    throw std::invalid_argument("dbo_block_bias: settle_cycles must be >= 4");
  DboState s = reset(dbo);
  const long tail_begin = settle_cycles - settle_cycles / 4;
  double sum = 0.0;
  for (long k = 0; k < settle_cycles; ++k) {
    const VmSample vm = extract_vm_pair(analog, ref_p, ref_ap, s.v_ref, rng);
    const StepRecord rec = step(dbo, s, vm.v_m, rng);
    if (k >= tail_begin) sum += rec.v_ref;
  }
  return sum / static_cast<double>(settle_cycles - tail_begin);
}

std::uint64_t block_stream_seed(const VariationSpec& spec, long block_index) {
  return derive_stream(spec.seed, static_cast<std::uint64_t>(block_index));
}

long block_cell_count(const VariationSpec& spec, long block_index) {
  const long base = spec.n_cells / spec.n_blocks;
  const long rem = spec.n_cells % spec.n_blocks;
  const long capacity = spec.layout.rows * spec.layout.data_bitlines;
  return std::min(capacity, base + (block_index < rem ? 1L : 0L));
}

namespace {

struct BlockPartial {
  double sum_p = 0.0;
  double sum_p2 = 0.0;
  long n = 0;
  double v_read = 0.0;
};

BlockPartial evaluate_block(const VariationSpec& spec, const DeviceParams& base,
                            BerMode mode, double fixed_bias, const DboConfig& dbo,
                            const AnalogConfig& analog, long block_index) {
  Rng rng(block_stream_seed(spec, block_index));
  const long n_cells = block_cell_count(spec, block_index);
  const BlockSample bs = sample_block(spec, base, n_cells, rng);

  BlockPartial part;
  part.v_read = mode == BerMode::kFixed
                    ? fixed_bias
                    : dbo_block_bias(bs.ref_p, bs.ref_ap, dbo, analog,
                                     spec.dbo_settle_cycles, rng);
  KahanSum sum_p, sum_p2;
  for (const DeviceParams& cell : bs.cells) {
    const double p =
        cell_error_prob(cell, bs.ref_p, bs.ref_ap, part.v_read, spec.sa_offset_sigma);
    sum_p.add(p);
    sum_p2.add(p * p);
  }
  part.sum_p = sum_p.value();
  part.sum_p2 = sum_p2.value();
  part.n = n_cells;
  return part;
}

BerResult estimate_ber_impl(const VariationSpec& spec, const ThermalModel& tm,
                            BerMode mode, double fixed_bias, const DboConfig& dbo,
                            const AnalogConfig& analog, bool parallel) {
  validate(spec);
  validate(dbo);
  validate(analog);
  if (mode == BerMode::kFixed && !(std::isfinite(fixed_bias) && fixed_bias >= 0.0))
    throw std::invalid_argument("estimate_ber: fixed_bias must be finite and >= 0");
  const DeviceParams base = tm.params_at(spec.temp_c);

  const long n_blocks = spec.n_blocks;
  std::vector<BlockPartial> parts(static_cast<std::size_t>(n_blocks));
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < n_blocks; ++b)
      parts[static_cast<std::size_t>(b)] =
          evaluate_block(spec, base, mode, fixed_bias, dbo, analog, b);
  } else {
    for (long b = 0; b < n_blocks; ++b)
      parts[static_cast<std::size_t>(b)] =
          evaluate_block(spec, base, mode, fixed_bias, dbo, analog, b);
  }

  // Fixed-order reduction keeps the result independent of thread count.
  KahanSum sum_p, sum_p2, sum_v;
  long n = 0;
  for (const BlockPartial& part : parts) {
    sum_p.add(part.sum_p);
    sum_p2.add(part.sum_p2);
    sum_v.add(part.v_read);
    n += part.n;
  }

  BerResult r;
  r.mode = mode;
  r.v_read = mode == BerMode::kFixed ? fixed_bias
                                     : sum_v.value() / static_cast<double>(n_blocks);
  r.n_cells_evaluated = n;
  const double mean = sum_p.value() / static_cast<double>(n);
  r.ber = mean;
  double var = 0.0;
  if (n > 1)
    var = std::max(0.0, (sum_p2.value() - static_cast<double>(n) * mean * mean) /
                            static_cast<double>(n - 1));
  r.std_error = std::sqrt(var / static_cast<double>(n));
  return r;
}

}  // namespace

BerResult estimate_ber(const VariationSpec& spec, const ThermalModel& tm, BerMode mode,
                       double fixed_bias, const DboConfig& dbo,
                       const AnalogConfig& analog) {
  return estimate_ber_impl(spec, tm, mode, fixed_bias, dbo, analog, true);
}

BerResult estimate_ber_serial(const VariationSpec& spec, const ThermalModel& tm,
                              BerMode mode, double fixed_bias, const DboConfig& dbo,
                              const AnalogConfig& analog) {
  return estimate_ber_impl(spec, tm, mode, fixed_bias, dbo, analog, false);
}

std::string ber_to_csv(const std::vector<BerCsvRow>& rows) {
  std::string csv = "mode,v_read,temp_c,sigma_mu_tmr0,sigma_mu_vh,ber,stderr,n_cells\n";
  for (const BerCsvRow& row : rows) {
    csv += to_string(row.result.mode);
    csv += ',';
    csv += format_double(row.result.v_read);
    csv += ',';
    csv += format_double(row.temp_c);
    csv += ',';
    csv += format_double(row.sigma_mu_tmr0);
    csv += ',';
    csv += format_double(row.sigma_mu_vh);
    csv += ',';
    csv += format_double(row.result.ber);
    csv += ',';
    csv += format_double(row.result.std_error);
    csv += ',';
    csv += std::to_string(row.result.n_cells_evaluated);
    csv += '\n';
  }
  return csv;
}

}  // namespace dbosim
