#include "fibercode/shaping.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace fibercode::shaping {

std::uint32_t gray_encode(std::uint32_t v) { return v ^ (v >> 1); }

std::uint32_t gray_decode(std::uint32_t g) {
  std::uint32_t v = g;
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) v ^= v >> shift;
  return v;
}

ShapedConstellation ShapedConstellation::build(int K) {
  if (K < 2 || K > 8 || K % 2 != 0) throw std::invalid_argument("K must be one of 2, 4, 6, 8");
  ShapedConstellation c;
  c.K_ = K;
  const int half = K / 2;
  const int Q = 1 << half;
  const double side = 2.0 * Q;
  c.scale_ = 1.0 / std::sqrt(2.0 * (side * side - 1.0) / 3.0);

  c.level_key_.resize(static_cast<std::size_t>(2 * Q));
  for (int L = 0; L < 2 * Q; ++L) {
    const int q = L < Q ? 1 : 0;
    const std::uint32_t a = static_cast<std::uint32_t>(L % Q);
    c.level_key_[L] = (gray_encode(a) << 1) | static_cast<std::uint32_t>(q);
  }

  const std::size_t n = std::size_t{1} << (K + 2);
  c.points_.resize(n);
  for (std::uint32_t idx = 0; idx < n; ++idx)
    c.points_[idx] = cplx(c.grid_x(idx), c.grid_y(idx)) * c.scale_;
  return c;
}

int ShapedConstellation::grid_x(std::uint32_t index) const {
  const int half = K_ / 2;
  const std::uint32_t coded = index >> 2;
  const int a = static_cast<int>(gray_decode(coded >> half));
  const int qx = (index >> 1) & 1u;
  return 2 * a + 1 - (qx ? 2 * (1 << half) : 0);
}

int ShapedConstellation::grid_y(std::uint32_t index) const {
  const int half = K_ / 2;
  const std::uint32_t coded = index >> 2;
  const int a = static_cast<int>(gray_decode(coded & ((1u << half) - 1u)));
  const int qy = index & 1u;
  return 2 * a + 1 - (qy ? 2 * (1 << half) : 0);
}

int ShapedConstellation::slice(double v) const {
  const int levels = side();
  const double f = (v / scale_ + levels - 1) / 2.0;
  if (!(f > 0)) return 0;
  if (f >= levels - 1) return levels - 1;
  const double lo = std::floor(f);
  const int L = static_cast<int>(lo);
  const double frac = f - lo;
  if (frac < 0.5) return L;
  if (frac > 0.5) return L + 1;
  return level_key_[L] < level_key_[L + 1] ? L : L + 1;
}

std::uint32_t ShapedConstellation::nearest(cplx y) const {
  const int half = K_ / 2;
  const std::uint32_t kx = level_key_[slice(y.real())];
  const std::uint32_t ky = level_key_[slice(y.imag())];
  const std::uint32_t coded = ((kx >> 1) << half) | (ky >> 1);
  return (coded << 2) | ((kx & 1u) << 1) | (ky & 1u);
}

stats::LabeledConstellation ShapedConstellation::labeled() const {
  stats::LabeledConstellation out;
  out.points = points_;
  out.bits = K_ + 2;
  out.labels.resize(points_.size());
  // Bit j of a label is b_{j+1}.
  for (std::uint32_t i = 0; i < points_.size(); ++i) {
    const std::uint32_t coded = i >> 2;
    std::uint32_t label = 0;
    for (int j = 0; j < K_; ++j) label |= ((coded >> (K_ - 1 - j)) & 1u) << j;
    label |= ((i >> 1) & 1u) << K_;
    label |= (i & 1u) << (K_ + 1);
    out.labels[i] = label;
  }
  return out;
}

std::uint32_t poly_mul(std::uint32_t a, std::uint32_t b) {
  std::uint32_t out = 0;
  for (int i = 0; i < 32; ++i)
    if ((a >> i) & 1u) out ^= b << i;
  return out;
}

bool ShapingCodeSpec::identities_hold() {
  const std::uint32_t gh = poly_mul(kG1, kH1) ^ poly_mul(kG2, kH2);
  const std::uint32_t inv = poly_mul(kInv1, kH1) ^ poly_mul(kInv2, kH2);
  return gh == 0 && inv == 1;
}

void ShapingCodeSpec::validate() const {
  if (traceback < 1) throw std::invalid_argument("traceback depth must be positive");
  if (!identities_hold()) throw std::logic_error("shaping code polynomials are inconsistent");
}

std::vector<int> coset_representative(std::span<const std::uint8_t> data) {
  std::vector<int> t(data.size());
  std::uint8_t prev = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::uint8_t s = data[k] & 1u;
    const int t1 = prev;
    const int t2 = s ^ prev;
    t[k] = (t1 << 1) | t2;
    prev = s;
  }
  return t;
}

namespace {

// Encoder output for input bit u from state (u_{k-1}, u_{k-2}) = (state >> 1, state & 1).
inline int code_output(int state, int u) {
  const int u1 = state >> 1;
  const int u2 = state & 1;
  const int c1 = u ^ u2;
  const int c2 = u ^ u1 ^ u2;
  return (c1 << 1) | c2;
}

inline int next_state(int state, int u) { return (u << 1) | (state >> 1); }

}  // namespace

std::vector<int> encode_shaping_code(std::span<const std::uint8_t> u) {
  std::vector<int> c(u.size());
  int state = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    c[k] = code_output(state, u[k] & 1);
    state = next_state(state, u[k] & 1);
  }
  return c;
}

ShapeResult shape(const ShapingCodeSpec& spec, std::span<const std::uint8_t> data,
                  std::span<const std::uint32_t> coded, const ShapedConstellation& constellation) {
  spec.validate();
  if (data.size() != coded.size()) throw std::invalid_argument("shape: data and coded lengths differ");
  const std::size_t n = data.size();
  const std::uint32_t coded_limit = 1u << constellation.K();
  for (auto c : coded)
    if (c >= coded_limit) throw std::invalid_argument("shape: coded label out of range");

  const auto t = coset_representative(data);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::array<double, 4> metric{0.0, inf, inf, inf};
  // survivor[k][s]: input bit and predecessor of state s after symbol k.
  std::vector<std::array<std::uint8_t, 4>> from(n);
  std::vector<std::array<std::uint8_t, 4>> bit(n);

  ShapeResult out;
  out.u.assign(n, 0);
  std::size_t decided = 0;

  auto traceback = [&](std::size_t end, int state, std::size_t stop) {
    // Writes u[k] for stop <= k < end along the survivor ending in `state`.
    for (std::size_t k = end; k-- > stop;) {
      out.u[k] = bit[k][state];
      state = from[k][state];
    }
  };
  auto best_state = [&] {
    int best = 0;
    for (int s = 1; s < 4; ++s)
      if (metric[s] < metric[best]) best = s;
    return best;
  };

  const auto depth = static_cast<std::size_t>(spec.traceback);
  for (std::size_t k = 0; k < n; ++k) {
    std::array<double, 4> next{inf, inf, inf, inf};
    for (int s = 0; s < 4; ++s) {
      if (metric[s] == inf) continue;
      for (int u = 0; u < 2; ++u) {
        const int z = t[k] ^ code_output(s, u);
        const double e = std::norm(constellation.point(coded[k], z));
        const int ns = next_state(s, u);
        const double cand = metric[s] + e;
        // Strict comparison keeps the lowest (state, input) branch on ties.
        if (cand < next[ns]) {
          next[ns] = cand;
          from[k][ns] = static_cast<std::uint8_t>(s);
          bit[k][ns] = static_cast<std::uint8_t>(u);
        }
      }
    }
    metric = next;
    if (k + 1 > depth) {
      // Release the decision for symbol k - depth.
      std::size_t target = k - depth;
      int state = best_state();
      for (std::size_t j = k + 1; j-- > target + 1;) state = from[j][state];
      out.u[target] = bit[target][state];
      decided = target + 1;
    }
  }
  if (n > 0) traceback(n, best_state(), decided);

  const auto c = encode_shaping_code(out.u);
  out.quadrants.resize(n);
  out.indices.resize(n);
  out.symbols.resize(n);
  double energy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    out.quadrants[k] = t[k] ^ c[k];
    out.indices[k] = (coded[k] << 2) | static_cast<std::uint32_t>(out.quadrants[k]);
    out.symbols[k] = constellation.point(out.indices[k]);
    energy += std::norm(out.symbols[k]);
  }
  out.mean_energy = n ? energy / static_cast<double>(n) : 0.0;
  return out;
}

std::vector<std::uint8_t> recover_shaping_bits(std::span<const int> quadrants) {
  std::vector<std::uint8_t> s(quadrants.size());
  int a1 = 0, a2 = 0;  // z1_{k-1}, z1_{k-2}
  int b1 = 0, b2 = 0;  // z2_{k-1}, z2_{k-2}
  for (std::size_t k = 0; k < quadrants.size(); ++k) {
    const int z1 = (quadrants[k] >> 1) & 1;
    const int z2 = quadrants[k] & 1;
    s[k] = static_cast<std::uint8_t>(z1 ^ a1 ^ a2 ^ z2 ^ b2);
    a2 = a1;
    a1 = z1;
    b2 = b1;
    b1 = z2;
  }
  return s;
}

Interleaver::Interleaver(std::size_t size, std::uint64_t seed) : seed_(seed), perm_(size) {
  if (size == 0) throw std::invalid_argument("interleaver size must be positive");
  if (size > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("interleaver too large");
  for (std::size_t i = 0; i < size; ++i) perm_[i] = static_cast<std::uint32_t>(i);
  boost::random::mt19937_64 rng(seed);
  for (std::size_t i = size - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm_[i], perm_[pick(rng)]);
  }
}

std::vector<std::uint8_t> Interleaver::interleave(std::span<const std::uint8_t> in) const {
  if (in.size() != perm_.size()) throw std::invalid_argument("interleave: size mismatch");
  std::vector<std::uint8_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm_[i]];
  return out;
}

std::vector<std::uint8_t> Interleaver::deinterleave(std::span<const std::uint8_t> in) const {
  if (in.size() != perm_.size()) throw std::invalid_argument("deinterleave: size mismatch");
  std::vector<std::uint8_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[perm_[i]] = in[i];
  return out;
}

std::vector<std::uint32_t> bicm_map(std::span<const std::uint8_t> bits, int K) {
  if (K < 1 || K > 30) throw std::invalid_argument("bicm_map: bad K");
  if (bits.size() % static_cast<std::size_t>(K) != 0)
    throw std::invalid_argument("bicm_map: bit count is not a multiple of K");
  std::vector<std::uint32_t> labels(bits.size() / K);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    std::uint32_t v = 0;
    for (int b = 0; b < K; ++b) v = (v << 1) | (bits[s * K + b] & 1u);
    labels[s] = v;
  }
  return labels;
}

std::vector<std::uint8_t> bicm_unmap(std::span<const std::uint32_t> labels, int K) {
  std::vector<std::uint8_t> bits(labels.size() * static_cast<std::size_t>(K));
  for (std::size_t s = 0; s < labels.size(); ++s)
    for (int b = 0; b < K; ++b) bits[s * K + b] = (labels[s] >> (K - 1 - b)) & 1u;
  return bits;
}

HardDecisions bicm_demap_hard(std::span<const cplx> received, const ShapedConstellation& constellation) {
  HardDecisions out;
  out.coded.resize(received.size());
  out.quadrants.resize(received.size());
  out.indices.resize(received.size());
  for (std::size_t i = 0; i < received.size(); ++i) {
    const auto idx = constellation.nearest(received[i]);
    out.indices[i] = idx;
    out.coded[i] = ShapedConstellation::coded_of(idx);
    out.quadrants[i] = ShapedConstellation::quadrant_of(idx);
  }
  return out;
}

LaneErrors lane_error_rates(std::span<const std::uint32_t> sent, std::span<const std::uint32_t> detected, int K) {
  if (sent.size() != detected.size()) throw std::invalid_argument("lane_error_rates: length mismatch");
  LaneErrors out;
  out.per_lane.assign(static_cast<std::size_t>(K), 0.0);
  if (sent.empty()) return out;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    const std::uint32_t diff = sent[i] ^ detected[i];
    for (int b = 0; b < K; ++b) out.per_lane[b] += (diff >> (K - 1 - b)) & 1u;
  }
  double total = 0;
  for (auto& v : out.per_lane) {
    total += v;
    v /= static_cast<double>(sent.size());
  }
  out.average = total / (static_cast<double>(sent.size()) * K);
  return out;
}

std::string FrameHeader::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "K=" << K << " scale=" << scale << " interleaver_seed=" << interleaver_seed
     << " traceback=" << traceback;
  return os.str();
}

FrameHeader FrameHeader::parse(const std::string& line) {
  FrameHeader h;
  std::istringstream is(line);
  std::string token;
  int seen = 0;
  while (is >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("frame header: malformed token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key != "K" && key != "scale" && key != "interleaver_seed" && key != "traceback")
      throw std::invalid_argument("frame header: unknown key '" + key + "'");
    try {
      if (key == "K") h.K = std::stoi(value);
      else if (key == "scale") h.scale = std::stod(value);
      else if (key == "interleaver_seed") h.interleaver_seed = std::stoull(value);
      else h.traceback = std::stoi(value);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("frame header: bad value for " + key);
    }
    ++seen;
  }
  if (seen != 4) throw std::invalid_argument("frame header: expected 4 fields");
  return h;
}

}  // namespace fibercode::shaping
