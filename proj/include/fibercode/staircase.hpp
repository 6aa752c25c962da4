#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fibercode/bch.hpp"

namespace fibercode::staircase {

// Square bit matrix, row-major, one byte per bit.
class Block {
 public:
  Block() = default;
  explicit Block(int m) : m_(m), bits_(static_cast<std::size_t>(m) * m, 0) {}

  int size() const { return m_; }
  std::uint8_t& at(int row, int col) { return bits_[static_cast<std::size_t>(row) * m_ + col]; }
  std::uint8_t at(int row, int col) const { return bits_[static_cast<std::size_t>(row) * m_ + col]; }
  std::span<std::uint8_t> bits() { return bits_; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  bool operator==(const Block&) const = default;

 private:
  int m_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct StaircaseParams {
  int m = 0;
  std::shared_ptr<const bch::BchCode> code;
  int window = 7;          // received blocks held by the decoder
  int max_iterations = 8;  // per window position
  bool jacobi = false;     // buffer flips until the end of each iteration

  // Component code of length 2m with capability t; parity_bits = 0 keeps the
  // natural BCH degree.
  static StaircaseParams make(int m, int t, int parity_bits = 0);

  int parity() const { return code->parity_count(); }
  int info_columns() const { return m - parity(); }
  std::int64_t info_bits_per_block() const {
    return static_cast<std::int64_t>(m) * info_columns();
  }
  double rate() const { return 1.0 - static_cast<double>(parity()) / m; }
  void validate() const;
};

// Builds B_i from B_{i-1} and m*(m-r) info bits laid out row by row into
// the first m-r columns.
Block encode_next(const StaircaseParams& params, const Block& prev,
                  std::span<const std::uint8_t> info);

class StaircaseEncoder {
 public:
  explicit StaircaseEncoder(StaircaseParams params);
  const Block& push(std::span<const std::uint8_t> info);
  const Block& last() const { return prev_; }

 private:
  StaircaseParams params_;
  Block prev_;
};

// Syndrome at word (pair, row) over [B_{i-1}^T B_i], computed from scratch.
bch::Syndromes word_syndrome(const StaircaseParams& params, const Block& prev,
                             const Block& cur, int row);

struct DecoderStats {
  std::int64_t iterations = 0;       // iterations that found work to do
  std::int64_t corrections = 0;      // successful component decodes that flipped bits
  std::int64_t failures = 0;         // component decode failures
  std::int64_t anchor_rejections = 0;
};

// Sliding-window iterative decoder. The block before the window (initially
// the all-zero B_0) is treated as known and never modified.
class StaircaseDecoder {
 public:
  explicit StaircaseDecoder(StaircaseParams params);

  // Adds a received block; returns the blocks that left the window.
  std::vector<Block> push(Block received);
  std::vector<Block> flush();

  const DecoderStats& stats() const { return stats_; }

 private:
  struct Flip {
    int block;
    int row;
    int col;
    auto operator<=>(const Flip&) const = default;
  };

  void decode_window();
  void flip_bit(int block, int row, int col);
  Block emit();

  StaircaseParams params_;
  Block anchor_;
  std::deque<Block> blocks_;
  // syndromes_[p][j]: word j of pair p, pairing (anchor or blocks_[p-1], blocks_[p]).
  std::deque<std::vector<bch::Syndromes>> syndromes_;
  std::deque<std::vector<std::uint8_t>> dirty_;  // word changed since last attempt
  DecoderStats stats_;
  std::vector<int> scratch_;
  std::vector<Flip> pending_;
};

struct DecodeReport {
  std::vector<Block> blocks;
  std::int64_t bit_errors = 0;
  std::int64_t bits_compared = 0;
  double ber() const { return bits_compared ? static_cast<double>(bit_errors) / bits_compared : 0.0; }
  DecoderStats stats;
};

// Decodes a full stream (B_0 excluded). When truth is non-empty the info
// bits of every output block are compared against it.
DecodeReport decode_stream(const StaircaseParams& params, const std::vector<Block>& received,
                           const std::vector<Block>& truth = {});

struct WaterfallPoint {
  double p_in = 0;
  double ber_out = 0;
  std::int64_t blocks = 0;
  std::int64_t bits = 0;
  std::int64_t bit_errors = 0;
  std::uint64_t seed = 0;
};

struct WaterfallOptions {
  std::int64_t min_bits = 100'000'000;  // info bits counted
  std::int64_t max_bits = 0;            // 0: stop at min_bits
  std::int64_t target_errors = 100;     // stop once this many errors are counted; 0 runs the full budget
  bool zero_data = false;               // transmit the all-zero stream
  int streams = 1;                      // independent streams run in parallel
  int threads = 1;
};

// Encode random data, pass through a BSC(p), decode. Each stream runs W
// extra tail blocks that are excluded from the count.
WaterfallPoint simulate_bsc(const StaircaseParams& params, double p, std::uint64_t seed,
                            const WaterfallOptions& options);

// Union bound over minimal (t+1)x(t+1) stall patterns inside one block.
double error_floor_estimate(int m, int t, double p);

// Inverse Gaussian tail: q with Q(q) = x.
double q_inverse(double x);
double net_coding_gain(double rate, double p_in, double ber_out = 1e-15);

// One row of the pragmatic system design tables.
struct SystemDesign {
  std::string name;
  double length_km;
  std::string compensation;
  int K;
  double p_avg;
  double launch_dbm;
  double rate_table;    // I_P as tabulated
  int m;
  int t;
  int parity;
  int rate_num;
  int rate_den;
  double ncg_table;
  double spectral_efficiency_table;
  bool g709;
};

const std::vector<SystemDesign>& system_designs();
StaircaseParams params_for(const SystemDesign& design);

// Stream framing: 16-byte header (magic, m, r, t as little-endian uint32),
// then each block row-major, MSB first, zero-padded to whole bytes.
inline constexpr std::uint32_t kStreamMagic = 0x53435331;  // "SCS1"
void write_stream(std::ostream& out, const StaircaseParams& params, const std::vector<Block>& blocks);
std::vector<Block> read_stream(std::istream& in, int& m, int& r, int& t);

}  // namespace fibercode::staircase
