#include "fibercode/staircase.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/mersenne_twister.hpp>

#include "fibercode/parallel.hpp"

namespace fibercode::staircase {

StaircaseParams StaircaseParams::make(int m, int t, int parity_bits) {
  StaircaseParams params;
  params.m = m;
  params.code = std::make_shared<const bch::BchCode>(bch::BchCode::build(2 * m, t, parity_bits));
  params.validate();
  return params;
}

void StaircaseParams::validate() const {
  if (!code) throw std::invalid_argument("staircase: no component code");
  if (m < 2) throw std::invalid_argument("staircase: block size must be at least 2");
  if (code->length() != 2 * m) throw std::invalid_argument("staircase: component length must be 2m");
  if (code->parity_count() >= m)
    throw std::invalid_argument("staircase: parity r=" + std::to_string(code->parity_count()) +
                                " does not fit in a block of size m=" + std::to_string(m));
  if (window < 1) throw std::invalid_argument("staircase: window must hold at least one block");
  if (max_iterations < 1) throw std::invalid_argument("staircase: need at least one iteration");
}

Block encode_next(const StaircaseParams& params, const Block& prev,
                  std::span<const std::uint8_t> info) {
  const int m = params.m;
  const int k = params.info_columns();
  if (prev.size() != m) throw std::invalid_argument("encode_next: previous block has wrong size");
  if (static_cast<std::int64_t>(info.size()) != params.info_bits_per_block())
    throw std::invalid_argument("encode_next: expected " + std::to_string(params.info_bits_per_block()) +
                                " info bits");
  Block out(m);
  std::vector<std::uint8_t> message(static_cast<std::size_t>(m + k));
  std::vector<std::uint8_t> parity(static_cast<std::size_t>(params.parity()));
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) message[i] = prev.at(i, j);
    for (int c = 0; c < k; ++c) {
      const std::uint8_t bit = info[static_cast<std::size_t>(j) * k + c] & 1u;
      message[m + c] = bit;
      out.at(j, c) = bit;
    }
    params.code->compute_parity(message, parity);
    for (int c = 0; c < params.parity(); ++c) out.at(j, k + c) = parity[c];
  }
  return out;
}

StaircaseEncoder::StaircaseEncoder(StaircaseParams params)
    : params_(std::move(params)), prev_(params_.m) {
  params_.validate();
}

const Block& StaircaseEncoder::push(std::span<const std::uint8_t> info) {
  prev_ = encode_next(params_, prev_, info);
  return prev_;
}

bch::Syndromes word_syndrome(const StaircaseParams& params, const Block& prev, const Block& cur,
                             int row) {
  const int m = params.m;
  bch::Syndromes s;
  for (int i = 0; i < m; ++i)
    if (prev.at(i, row)) s ^= params.code->position_syndrome(i);
  for (int c = 0; c < m; ++c)
    if (cur.at(row, c)) s ^= params.code->position_syndrome(m + c);
  return s;
}

StaircaseDecoder::StaircaseDecoder(StaircaseParams params)
    : params_(std::move(params)), anchor_(params_.m) {
  params_.validate();
}

std::vector<Block> StaircaseDecoder::push(Block received) {
  const int m = params_.m;
  if (received.size() != m) throw std::invalid_argument("decoder: block has wrong size");
  std::vector<Block> out;
  if (static_cast<int>(blocks_.size()) == params_.window) out.push_back(emit());

  // Syndromes of the new pair; the previous block's columns are already
  // included in their current (partly corrected) state.
  const Block& prev = blocks_.empty() ? anchor_ : blocks_.back();
  std::vector<bch::Syndromes> syn(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (prev.at(i, j)) syn[j] ^= params_.code->position_syndrome(i);
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < m; ++c)
      if (received.at(j, c)) syn[j] ^= params_.code->position_syndrome(m + c);
  blocks_.push_back(std::move(received));
  syndromes_.push_back(std::move(syn));
  dirty_.emplace_back(static_cast<std::size_t>(m), 1);

  decode_window();
  return out;
}

std::vector<Block> StaircaseDecoder::flush() {
  std::vector<Block> out;
  while (!blocks_.empty()) out.push_back(emit());
  return out;
}

Block StaircaseDecoder::emit() {
  anchor_ = std::move(blocks_.front());
  blocks_.pop_front();
  syndromes_.pop_front();
  dirty_.pop_front();
  return anchor_;
}

void StaircaseDecoder::flip_bit(int block, int row, int col) {
  const int m = params_.m;
  const auto& code = *params_.code;
  auto& b = blocks_[static_cast<std::size_t>(block)];
  b.at(row, col) ^= 1u;
  // Row `row` of this block belongs to pair `block` ...
  syndromes_[block][row] ^= code.position_syndrome(m + col);
  dirty_[block][row] = 1;
  // ... and column `col` to the following pair, if it has arrived.
  if (block + 1 < static_cast<int>(blocks_.size())) {
    syndromes_[block + 1][col] ^= code.position_syndrome(row);
    dirty_[block + 1][col] = 1;
  }
}

void StaircaseDecoder::decode_window() {
  const int m = params_.m;
  const auto& code = *params_.code;
  const int pairs = static_cast<int>(blocks_.size());
  for (int iter = 0; iter < params_.max_iterations; ++iter) {
    bool any = false;
    pending_.clear();
    for (int p = 0; p < pairs; ++p) {
      auto& dirty = dirty_[p];
      for (int j = 0; j < m; ++j) {
        if (!dirty[j]) continue;
        dirty[j] = 0;
        const auto& syn = syndromes_[p][j];
        if (syn.zero()) continue;
        scratch_.clear();
        if (!code.locate(syn, scratch_)) {
          ++stats_.failures;
          continue;
        }
        if (p == 0 && scratch_.front() < m) {
          ++stats_.anchor_rejections;
          continue;
        }
        ++stats_.corrections;
        any = true;
        for (int pos : scratch_) {
          // Bits in the left half are column j of block p-1.
          const Flip f = pos < m ? Flip{p - 1, pos, j} : Flip{p, j, pos - m};
          if (params_.jacobi) pending_.push_back(f);
          else flip_bit(f.block, f.row, f.col);
        }
      }
    }
    if (params_.jacobi && !pending_.empty()) {
      std::sort(pending_.begin(), pending_.end());
      pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
      for (const auto& f : pending_) flip_bit(f.block, f.row, f.col);
    }
    if (!any) break;
    ++stats_.iterations;
  }
}

DecodeReport decode_stream(const StaircaseParams& params, const std::vector<Block>& received,
                           const std::vector<Block>& truth) {
  if (!truth.empty() && truth.size() != received.size())
    throw std::invalid_argument("decode_stream: truth and received lengths differ");
  DecodeReport report;
  StaircaseDecoder decoder(params);
  auto take = [&](std::vector<Block>&& out) {
    for (auto& b : out) report.blocks.push_back(std::move(b));
  };
  for (const auto& b : received) take(decoder.push(b));
  take(decoder.flush());
  if (!truth.empty()) {
    const int k = params.info_columns();
    for (std::size_t i = 0; i < report.blocks.size(); ++i)
      for (int r = 0; r < params.m; ++r)
        for (int c = 0; c < k; ++c)
          report.bit_errors += report.blocks[i].at(r, c) != truth[i].at(r, c);
    report.bits_compared = static_cast<std::int64_t>(report.blocks.size()) * params.info_bits_per_block();
  }
  report.stats = decoder.stats();
  return report;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct StreamResult {
  std::int64_t blocks = 0;
  std::int64_t errors = 0;
};

class Bsc {
 public:
  Bsc(double p, std::uint64_t seed) : rng_(seed), log_q_(std::log1p(-p)), p_(p) { next_gap(); }

  // Flips bits of `bits` at geometric gaps that carry over between calls.
  void apply(std::span<std::uint8_t> bits) {
    if (p_ <= 0) return;
    std::size_t i = gap_;
    while (i < bits.size()) {
      bits[i] ^= 1u;
      next_gap();
      i += 1 + gap_;
    }
    gap_ = i - bits.size();
  }

 private:
  void next_gap() {
    if (p_ <= 0) return;
    if (p_ >= 1) {
      gap_ = 0;
      return;
    }
    const double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    gap_ = static_cast<std::size_t>(std::floor(std::log(u) / log_q_));
  }

  boost::random::mt19937_64 rng_;
  double log_q_;
  double p_;
  std::size_t gap_ = 0;
};

StreamResult run_stream(const StaircaseParams& params, double p, std::uint64_t seed,
                        std::int64_t data_blocks, std::int64_t error_target, bool zero_data) {
  boost::random::mt19937_64 data_rng(splitmix64(seed));
  Bsc channel(p, splitmix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL));
  StaircaseEncoder encoder(params);
  StaircaseDecoder decoder(params);
  std::deque<Block> truth;
  std::vector<std::uint8_t> info(static_cast<std::size_t>(params.info_bits_per_block()));
  const int k = params.info_columns();
  StreamResult result;
  std::int64_t pushed = 0;
  std::int64_t counted_limit = data_blocks;

  auto consume = [&](std::vector<Block>&& out) {
    for (auto& b : out) {
      const Block& ref = truth.front();
      if (result.blocks < counted_limit) {
        for (int r = 0; r < params.m; ++r)
          for (int c = 0; c < k; ++c) result.errors += b.at(r, c) != ref.at(r, c);
        ++result.blocks;
      }
      truth.pop_front();
    }
  };

  auto push_one = [&] {
    if (!zero_data) {
      std::uint64_t word = 0;
      for (std::size_t i = 0; i < info.size(); ++i) {
        if (i % 64 == 0) word = data_rng();
        info[i] = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
      }
    }
    const Block& tx = encoder.push(info);
    truth.push_back(tx);
    Block rx = tx;
    channel.apply(rx.bits());
    consume(decoder.push(std::move(rx)));
    ++pushed;
  };

  while (pushed < data_blocks) {
    push_one();
    if (error_target > 0 && result.errors >= error_target) break;
  }
  counted_limit = pushed;
  for (int i = 0; i < params.window; ++i) push_one();
  consume(decoder.flush());
  return result;
}

}  // namespace

WaterfallPoint simulate_bsc(const StaircaseParams& params, double p, std::uint64_t seed,
                            const WaterfallOptions& options) {
  params.validate();
  if (!(p >= 0 && p <= 0.5)) throw std::invalid_argument("simulate_bsc: p must lie in [0, 1/2]");
  const int streams = std::max(1, options.streams);
  const std::int64_t budget = std::max(options.min_bits, options.max_bits);
  const std::int64_t per_block = params.info_bits_per_block();
  const std::int64_t total_blocks = std::max<std::int64_t>(1, (budget + per_block - 1) / per_block);
  const std::int64_t per_stream = (total_blocks + streams - 1) / streams;
  const std::int64_t error_target =
      options.target_errors > 0 ? std::max<std::int64_t>(1, options.target_errors / streams) : 0;

  std::vector<StreamResult> results(static_cast<std::size_t>(streams));
  parallel_for(static_cast<std::size_t>(streams), options.threads, [&](std::size_t s) {
    results[s] = run_stream(params, p, splitmix64(seed + 0x632BE59BD9B4E019ULL * (s + 1)), per_stream,
                            error_target, options.zero_data);
  });

  WaterfallPoint point;
  point.p_in = p;
  point.seed = seed;
  for (const auto& r : results) {
    point.blocks += r.blocks;
    point.bit_errors += r.errors;
  }
  point.bits = point.blocks * per_block;
  point.ber_out = point.bits ? static_cast<double>(point.bit_errors) / point.bits : 0.0;
  return point;
}

double error_floor_estimate(int m, int t, double p) {
  if (m <= t) throw std::invalid_argument("error_floor_estimate: m must exceed t");
  if (!(p >= 0 && p < 1)) throw std::invalid_argument("error_floor_estimate: p outside [0,1)");
  if (p == 0) return 0.0;
  const double s = t + 1;
  const double log_choose = std::lgamma(m + 1.0) - std::lgamma(s + 1.0) - std::lgamma(m - s + 1.0);
  const double log_ber = 2.0 * std::log(s / m) + 2.0 * log_choose + s * s * std::log(p);
  return std::exp(log_ber);
}

double q_inverse(double x) {
  if (!(x > 0 && x < 1)) throw std::invalid_argument("q_inverse: argument outside (0,1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * x);
}

double net_coding_gain(double rate, double p_in, double ber_out) {
  if (!(rate > 0 && rate <= 1)) throw std::invalid_argument("net_coding_gain: rate outside (0,1]");
  if (!(p_in > 0 && p_in < 0.5)) throw std::invalid_argument("net_coding_gain: p_in outside (0,1/2)");
  if (!(ber_out > 0 && ber_out <= p_in))
    throw std::invalid_argument("net_coding_gain: output target must lie in (0, p_in]");
  return 20.0 * std::log10(q_inverse(ber_out)) - 20.0 * std::log10(q_inverse(p_in)) +
         10.0 * std::log10(rate);
}

const std::vector<SystemDesign>& system_designs() {
  static const std::vector<SystemDesign> designs = {
      {"L500-EQ", 500, "EQ", 8, 1.61e-2, -6, 8.05, 190, 4, 36, 77, 95, 10.47, 7.48, false},
      {"L500-BP", 500, "BP", 8, 3.52e-3, -4, 8.73, 510, 3, 32, 239, 255, 9.41, 8.50, true},
      {"L1000-EQ", 1000, "EQ", 6, 3.88e-3, -6, 6.78, 510, 3, 32, 239, 255, 9.41, 6.62, true},
      {"L1000-BP", 1000, "BP", 8, 2.22e-2, -4, 7.77, 144, 4, 36, 3, 4, 10.68, 7.00, false},
      {"L2000-EQ", 2000, "EQ", 6, 2.52e-2, -6, 5.98, 120, 4, 32, 11, 15, 10.62, 5.40, false},
      {"L2000-BP", 2000, "BP", 6, 5.16e-3, -4, 6.72, 628, 4, 44, 146, 157, 9.50, 6.58, false},
  };
  return designs;
}

StaircaseParams params_for(const SystemDesign& design) {
  return StaircaseParams::make(design.m, design.t, design.parity);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("staircase stream: truncated header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_stream(std::ostream& out, const StaircaseParams& params, const std::vector<Block>& blocks) {
  put_u32(out, kStreamMagic);
  put_u32(out, static_cast<std::uint32_t>(params.m));
  put_u32(out, static_cast<std::uint32_t>(params.parity()));
  put_u32(out, static_cast<std::uint32_t>(params.code->t()));
  const std::size_t nbits = static_cast<std::size_t>(params.m) * params.m;
  std::vector<char> bytes((nbits + 7) / 8);
  for (const auto& b : blocks) {
    if (b.size() != params.m) throw std::invalid_argument("write_stream: block has wrong size");
    std::fill(bytes.begin(), bytes.end(), 0);
    auto bits = b.bits();
    for (std::size_t i = 0; i < nbits; ++i)
      if (bits[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

std::vector<Block> read_stream(std::istream& in, int& m, int& r, int& t) {
  if (get_u32(in) != kStreamMagic) throw std::runtime_error("staircase stream: bad magic");
  m = static_cast<int>(get_u32(in));
  r = static_cast<int>(get_u32(in));
  t = static_cast<int>(get_u32(in));
  if (m < 2 || m > 4096 || r >= m) throw std::runtime_error("staircase stream: implausible header");
  const std::size_t nbits = static_cast<std::size_t>(m) * m;
  std::vector<unsigned char> bytes((nbits + 7) / 8);
  std::vector<Block> blocks;
  while (in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    Block b(m);
    auto bits = b.bits();
    for (std::size_t i = 0; i < nbits; ++i) bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    blocks.push_back(std::move(b));
  }
  if (in.gcount() != 0) throw std::runtime_error("staircase stream: trailing partial block");
  return blocks;
}

}  // namespace fibercode::staircase
