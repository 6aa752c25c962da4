#include "fibercode/wdm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fibercode::wdm {

void RingConstellation::validate() const {
  if (num_rings < 1) throw std::invalid_argument("need at least one ring");
  if (!(ring_spacing > 0.0)) throw std::invalid_argument("ring spacing must be > 0");
  if (phase_levels < 4) throw std::invalid_argument("phase_levels must be >= 4");
}

double RingConstellation::mean_square() const {
  const double n = num_rings;
  return ring_spacing * ring_spacing * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
}

std::vector<cplx> SymbolFrame::channel(int l) const {
  std::vector<cplx> out(static_cast<std::size_t>(num_slots));
  for (int k = 0; k < num_slots; ++k) out[k] = at(k, l);
  return out;
}

std::vector<int> SymbolFrame::channel_rings(int l) const {
  if (ring_index.empty()) return {};
  std::vector<int> out(static_cast<std::size_t>(num_slots));
  for (int k = 0; k < num_slots; ++k) out[k] = ring_index[offset(k, l)];
  return out;
}

double SymbolFrame::mean_energy() const {
  if (symbols.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : symbols) sum += std::norm(s);
  return sum / static_cast<double>(symbols.size());
}

SymbolFrame draw_symbols(const RingConstellation& constellation, int num_slots,
                         int num_channels, double symbol_period, Rng& rng) {
  constellation.validate();
  if (num_slots < 1 || num_channels < 1)
    throw std::invalid_argument("need at least one slot and one channel");
  if (num_channels % 2 == 0)
    throw std::invalid_argument("channel count must be odd (2B+1)");

  SymbolFrame frame;
  frame.num_slots = num_slots;
  frame.num_channels = num_channels;
  frame.symbol_period = symbol_period;
  frame.constellation = constellation;
  const auto total = static_cast<std::size_t>(num_slots) * num_channels;
  frame.symbols.resize(total);
  frame.ring_index.resize(total);
  frame.phase_index.resize(total);

  std::uniform_int_distribution<int> ring_dist(1, constellation.num_rings);
  std::uniform_int_distribution<int> phase_dist(0, constellation.phase_levels - 1);
  const double dphi = 2.0 * fiber::kPi / constellation.phase_levels;
  for (std::size_t i = 0; i < total; ++i) {
    const int ring = ring_dist(rng);
    const int phase = phase_dist(rng);
    frame.ring_index[i] = ring;
    frame.phase_index[i] = phase;
    frame.symbols[i] = std::polar(constellation.radius(ring), phase * dphi);
  }
  return frame;
}

SymbolFrame frame_from_channels(const std::vector<std::vector<cplx>>& channels,
                                double symbol_period) {
  if (channels.empty() || channels.size() % 2 == 0)
    throw std::invalid_argument("channel count must be odd (2B+1)");
  const auto slots = channels.front().size();
  for (const auto& ch : channels)
    if (ch.size() != slots) throw std::invalid_argument("channel lengths differ");
  SymbolFrame frame;
  frame.num_slots = static_cast<int>(slots);
  frame.num_channels = static_cast<int>(channels.size());
  frame.symbol_period = symbol_period;
  frame.symbols.resize(slots * channels.size());
  for (int l = -frame.half_width(); l <= frame.half_width(); ++l)
    for (std::size_t k = 0; k < slots; ++k)
      frame.symbols[frame.offset(static_cast<int>(k), l)] = channels[l + frame.half_width()][k];
  return frame;
}

fiber::OpticalField modulate(const SymbolFrame& frame, const GridSpec& grid) {
  const int slots = frame.num_slots;
  const int os = grid.samples_per_symbol;
  if (slots < 2 || !std::has_single_bit(static_cast<unsigned>(slots)))
    throw std::invalid_argument("slot count must be a power of two");
  if (os < 1 || !std::has_single_bit(static_cast<unsigned>(os)))
    throw std::invalid_argument("samples per symbol must be a power of two");
  if (os <= frame.num_channels)
    throw std::invalid_argument("grid too narrow: samples_per_symbol must exceed the channel count");

  const std::size_t n = static_cast<std::size_t>(slots) * os;
  const double ts = frame.symbol_period;
  const double scale = os / std::sqrt(ts);
  std::vector<cplx> spectrum(n, cplx(0.0, 0.0));
  std::vector<cplx> channel(static_cast<std::size_t>(slots));
  const long long S = slots;
  const long long N = static_cast<long long>(n);
  for (int l = -frame.half_width(); l <= frame.half_width(); ++l) {
    for (int k = 0; k < slots; ++k) channel[k] = frame.at(k, l);
    fft_forward(channel);
    for (long long q = -S / 2; q < S / 2; ++q) {
      const long long src = (q + S) % S;
      const long long dst = ((l * S + q) % N + N) % N;
      spectrum[dst] += channel[src] * scale;
    }
  }
  fft_inverse(spectrum);
  return fiber::OpticalField(std::move(spectrum), os / ts);
}

SymbolFrame set_average_power(SymbolFrame frame, double target_power) {
  if (!(target_power > 0.0)) throw std::invalid_argument("target power must be > 0");
  const double energy = frame.mean_energy();
  if (!(energy > 0.0)) throw std::invalid_argument("cannot scale a zero-power frame");
  const double scale = std::sqrt(target_power * frame.symbol_period / energy);
  for (auto& s : frame.symbols) s *= scale;
  if (frame.constellation) frame.constellation->ring_spacing *= scale;
  return frame;
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

void write_frame_csv(std::ostream& out, const SymbolFrame& frame) {
  out << "k,l,re,im\n";
  out.precision(17);
  for (int k = 0; k < frame.num_slots; ++k)
    for (int l = -frame.half_width(); l <= frame.half_width(); ++l) {
      const auto s = frame.at(k, l);
      out << k << ',' << l << ',' << s.real() << ',' << s.imag() << '\n';
    }
}

SymbolFrame read_frame_csv(std::istream& in, double symbol_period) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,l,re,im", 0) != 0)
    throw std::runtime_error("symbol CSV must start with header k,l,re,im");
  std::map<std::pair<int, int>, cplx> entries;
  int max_k = -1, max_l = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[4];
    for (auto& f : field)
      if (!std::getline(row, f, ',')) throw std::runtime_error("bad symbol row: " + line);
    const int k = std::stoi(field[0]);
    const int l = std::stoi(field[1]);
    entries[{k, l}] = cplx(std::stod(field[2]), std::stod(field[3]));
    max_k = std::max(max_k, k);
    max_l = std::max(max_l, std::abs(l));
  }
  SymbolFrame frame;
  frame.num_slots = max_k + 1;
  frame.num_channels = 2 * max_l + 1;
  frame.symbol_period = symbol_period;
  frame.symbols.assign(static_cast<std::size_t>(frame.num_slots) * frame.num_channels, cplx{});
  if (entries.size() != frame.symbols.size())
    throw std::runtime_error("symbol CSV does not cover a full k x l grid");
  for (const auto& [key, value] : entries) frame.symbols[frame.offset(key.first, key.second)] = value;
  return frame;
}

}  // namespace fibercode::wdm
