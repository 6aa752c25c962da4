#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fibercode/config.hpp"
#include "fibercode/fiber.hpp"
#include "fibercode/rx.hpp"
#include "fibercode/staircase.hpp"
#include "fibercode/stats.hpp"

namespace fibercode::experiments {

enum class Scale { Desk, Paper };
Scale parse_scale(const std::string& text);

inline constexpr int kSchemaVersion = 1;

// Deterministic per-point stream: mixes the master seed with an index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct LinkSettings {
  double length = 1e6;  // m
  rx::Compensation compensation = rx::Compensation::BP;
  double step = 100.0;      // forward SSFM step, m
  double bp_step = 1000.0;  // m
  bool symmetric_bp = false;
  bool noise = true;
  fiber::FiberParams fiber;
};

struct SignalSettings {
  int channels = 5;
  int rings = 16;
  int phase_levels = 256;
  int slots = 4096;  // per frame, guards included
  int guard = 32;    // per edge
  double symbol_period = 1e-11;
  int samples_per_symbol = 8;
};

// ---- capacity sweep ----

struct CapacityConfig {
  std::vector<double> lengths{1e6};
  std::vector<rx::Compensation> compensations{rx::Compensation::BP, rx::Compensation::EQ};
  std::vector<double> powers_dbm{-8, -6, -4, -2, 0};
  LinkSettings link;
  SignalSettings signal;
  std::size_t mc_samples = 100000;
  unsigned threads = 1;
  bool write_models = false;

  static CapacityConfig from(const config::Config& cfg, Scale scale);
};

struct CapacityRow {
  double length = 0;
  rx::Compensation compensation = rx::Compensation::BP;
  double power_dbm = 0;
  double snr_db = 0;
  double mi_bits = 0;
  double std_error = 0;
  double xpm_phase = 0;
  double evm_db = 0;
  std::uint64_t seed = 0;
  stats::RingGaussianModel model;
};

// One power point: draw, propagate, compensate, back-rotate, fit, estimate.
// The data and noise realization depend only on seed, so BP and EQ runs with
// the same seed see the same channel.
CapacityRow run_capacity_point(const LinkSettings& link, const SignalSettings& signal,
                               double power_dbm, std::size_t mc_samples, std::uint64_t seed,
                               unsigned mi_threads = 1);
// Same, sharing one forward propagation between several receivers.
std::vector<CapacityRow> run_capacity_point(const LinkSettings& link,
                                            std::span<const rx::Compensation> receivers,
                                            const SignalSettings& signal, double power_dbm,
                                            std::size_t mc_samples, std::uint64_t seed,
                                            unsigned mi_threads = 1);

std::vector<CapacityRow> run_capacity_sweep(const CapacityConfig& config, std::uint64_t seed);
void write_capacity_csv(std::ostream& out, const std::vector<CapacityRow>& rows,
                        std::uint64_t config_hash, std::uint64_t seed);

// ---- BER waterfall ----

struct WaterfallCurve {
  std::string code;  // design name
  std::vector<double> p_in;
};

struct WaterfallConfig {
  std::vector<WaterfallCurve> curves;
  staircase::WaterfallOptions options;
  int window = 7;
  int iterations = 8;

  static WaterfallConfig from(const config::Config& cfg, Scale scale);
};

struct WaterfallRow {
  std::string code;
  int m = 0, t = 0, r = 0;
  staircase::WaterfallPoint point;
};

std::vector<WaterfallRow> run_ber_waterfall(const WaterfallConfig& config, std::uint64_t seed);
void write_waterfall_csv(std::ostream& out, const std::vector<WaterfallRow>& rows,
                         std::uint64_t config_hash, std::uint64_t seed);

// ---- pragmatic end-to-end ----

struct PragmaticConfig {
  std::string design = "L2000-EQ";
  LinkSettings link;
  SignalSettings signal;
  double power_dbm = -6;
  int blocks = 4;  // counted staircase blocks; window-many tail blocks follow
  std::uint64_t interleaver_seed = 1;
  int traceback = 32;
  unsigned threads = 1;

  static PragmaticConfig from(const config::Config& cfg, Scale scale);
};

struct PragmaticRow {
  double length = 0;
  rx::Compensation compensation = rx::Compensation::BP;
  std::string design;
  int K = 0;
  double rate = 0;
  double power_dbm = 0;
  double p_avg = 0;
  std::vector<double> lane_error;
  double i_p = 0;
  double se_achieved = 0;
  double ber_post = 0;
  std::int64_t bits_post = 0;
  double shaping_bit_error = 0;
  std::uint64_t seed = 0;
};

PragmaticRow run_pragmatic_endtoend(const PragmaticConfig& config, std::uint64_t seed);
void write_pragmatic_csv(std::ostream& out, const std::vector<PragmaticRow>& rows,
                         std::uint64_t config_hash, std::uint64_t seed);

// ---- shaping demo ----

struct ShapeDemoConfig {
  std::vector<int> K{6};
  std::size_t symbols = 100000;
  int traceback = 32;

  static ShapeDemoConfig from(const config::Config& cfg, Scale scale);
};

struct ShapeDemoRow {
  int K = 0;
  int traceback = 0;
  std::size_t symbols = 0;
  double uniform_energy = 0;  // random quadrant bits
  double shaped_energy = 0;
  double gain_db = 0;
  double quadrant_share[4] = {0, 0, 0, 0};
  bool recovered = false;
  std::uint64_t seed = 0;
};

ShapeDemoRow run_shape_demo(int K, std::size_t symbols, int traceback, std::uint64_t seed);
void write_shape_csv(std::ostream& out, const std::vector<ShapeDemoRow>& rows,
                     std::uint64_t config_hash, std::uint64_t seed);

}  // namespace fibercode::experiments
