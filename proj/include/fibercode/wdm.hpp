#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "fibercode/fiber.hpp"

namespace fibercode::wdm {

using Rng = std::mt19937_64;

// Rings at radii m * ring_spacing, m = 1..num_rings, each equiprobable, with
// the phase drawn uniformly from phase_levels equally spaced angles.
struct RingConstellation {
  int num_rings = 64;
  double ring_spacing = 1.0;  // W^1/2 s^1/2 once scaled to a launch power
  int phase_levels = 256;

  void validate() const;
  double radius(int ring) const { return ring * ring_spacing; }
  // E|phi|^2 = r^2 (N+1)(2N+1)/6
  double mean_square() const;
};

// Symbols phi_{k,l} for time slots k and channels l = -B..B, stored slot-major.
struct SymbolFrame {
  int num_slots = 0;
  int num_channels = 0;  // 2B+1
  double symbol_period = 1e-11;
  std::vector<cplx> symbols;
  // 1-based ring and 0-based phase index of each symbol; empty for frames
  // not drawn from a ring constellation.
  std::vector<int> ring_index;
  std::vector<int> phase_index;
  std::optional<RingConstellation> constellation;

  int half_width() const { return num_channels / 2; }
  std::size_t offset(int k, int l) const {
    return static_cast<std::size_t>(k) * num_channels + (l + half_width());
  }
  cplx at(int k, int l) const { return symbols[offset(k, l)]; }
  std::vector<cplx> channel(int l) const;
  std::vector<int> channel_rings(int l) const;
  double mean_energy() const;
};

SymbolFrame draw_symbols(const RingConstellation& constellation, int num_slots,
                         int num_channels, double symbol_period, Rng& rng);

// Frame from externally produced symbols (e.g. shaped QAM), one vector per
// channel, ordered l = -B..B.
SymbolFrame frame_from_channels(const std::vector<std::vector<cplx>>& channels,
                                double symbol_period);

struct GridSpec {
  int samples_per_symbol = 8;
};

// A(0,t) = sum_k sum_l phi_{k,l}/sqrt(T_s) sinc((t - k T_s)/T_s) e^{j 2 pi l t/T_s},
// built bin-by-bin on the periodic FFT grid so each channel occupies exactly
// its 1/T_s band.
fiber::OpticalField modulate(const SymbolFrame& frame, const GridSpec& grid);

// Rescales every symbol (and the ring spacing) so that the per-channel average
// launch power mean|phi|^2 / T_s equals target_power.
SymbolFrame set_average_power(SymbolFrame frame, double target_power);

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

// CSV with header "k,l,re,im".
void write_frame_csv(std::ostream& out, const SymbolFrame& frame);
SymbolFrame read_frame_csv(std::istream& in, double symbol_period);

}  // namespace fibercode::wdm
