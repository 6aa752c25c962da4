#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fibercode/stats.hpp"

namespace fibercode::shaping {

using cplx = std::complex<double>;

// 2^(K+2)-point square QAM. Point index = (coded << 2) | (qx << 1) | qy,
// where the K coded bits are b_1 (most significant) .. b_K and the two
// quadrant bits are b_{K+1} = qx, b_{K+2} = qy. The coded bits hold the
// Gray code of the in-quadrant column, then of the row. A set quadrant bit
// moves the point by -2^(K/2+1) on its axis, so the four quadrants are
// translated copies of one Gray-labeled 2^K-QAM.
class ShapedConstellation {
 public:
  static ShapedConstellation build(int K);

  int K() const { return K_; }
  int side() const { return 1 << (K_ / 2 + 1); }  // points per axis
  std::size_t size() const { return points_.size(); }
  // Scale applied to the odd-integer grid (unit energy under uniform use).
  double scale() const { return scale_; }
  double uniform_energy() const { return 1.0; }

  const std::vector<cplx>& points() const { return points_; }
  cplx point(std::uint32_t index) const { return points_[index]; }
  cplx point(std::uint32_t coded, int quadrant) const { return points_[(coded << 2) | quadrant]; }
  static std::uint32_t coded_of(std::uint32_t index) { return index >> 2; }
  static int quadrant_of(std::uint32_t index) { return static_cast<int>(index & 3u); }

  // Nearest point; exact ties go to the lower index.
  std::uint32_t nearest(cplx y) const;

  // Integer grid coordinates (odd values) of a point.
  int grid_x(std::uint32_t index) const;
  int grid_y(std::uint32_t index) const;

  stats::LabeledConstellation labeled() const;

 private:
  int K_ = 0;
  double scale_ = 1;
  std::vector<cplx> points_;
  std::vector<std::uint32_t> level_key_;  // per ascending axis level: (gray << 1) | q
  int slice(double v) const;
};

std::uint32_t gray_encode(std::uint32_t v);
std::uint32_t gray_decode(std::uint32_t g);

// Binary polynomials as bit masks, bit i = coefficient of D^i.
std::uint32_t poly_mul(std::uint32_t a, std::uint32_t b);

struct ShapingCodeSpec {
  static constexpr std::uint32_t kG1 = 0b101;   // 1 + D^2
  static constexpr std::uint32_t kG2 = 0b111;   // 1 + D + D^2
  static constexpr std::uint32_t kH1 = 0b111;   // 1 + D + D^2
  static constexpr std::uint32_t kH2 = 0b101;   // 1 + D^2
  static constexpr std::uint32_t kInv1 = 0b10;  // D
  static constexpr std::uint32_t kInv2 = 0b11;  // 1 + D
  int traceback = 32;

  // G H^T = 0 and g H^T = 1.
  static bool identities_hold();
  void validate() const;
};

// Quadrant pairs are packed as (z1 << 1) | z2 with z1 -> qx, z2 -> qy.
std::vector<int> coset_representative(std::span<const std::uint8_t> data);
std::vector<int> encode_shaping_code(std::span<const std::uint8_t> u);

struct ShapeResult {
  std::vector<std::uint8_t> u;          // shaping-code input chosen by the search
  std::vector<int> quadrants;           // transmitted quadrant pair per symbol
  std::vector<std::uint32_t> indices;   // constellation point index per symbol
  std::vector<cplx> symbols;
  double mean_energy = 0;
};

// One data bit and K coded bits per symbol; the Viterbi search picks the
// code sequence that minimizes total energy. Decisions are released with a
// delay of spec.traceback symbols; the frame end is resolved by a full
// traceback from the best final state.
ShapeResult shape(const ShapingCodeSpec& spec, std::span<const std::uint8_t> data,
                  std::span<const std::uint32_t> coded, const ShapedConstellation& constellation);

// Syndrome former: s_k = z1_k + z1_{k-1} + z1_{k-2} + z2_k + z2_{k-2}.
std::vector<std::uint8_t> recover_shaping_bits(std::span<const int> quadrants);

// Seeded permutation of n positions.
class Interleaver {
 public:
  Interleaver(std::size_t size, std::uint64_t seed);
  std::size_t size() const { return perm_.size(); }
  std::uint64_t seed() const { return seed_; }
  // out[i] = in[perm[i]]
  std::vector<std::uint8_t> interleave(std::span<const std::uint8_t> in) const;
  std::vector<std::uint8_t> deinterleave(std::span<const std::uint8_t> in) const;
  std::span<const std::uint32_t> permutation() const { return perm_; }

 private:
  std::uint64_t seed_;
  std::vector<std::uint32_t> perm_;
};

// Groups K bits per symbol, first bit most significant.
std::vector<std::uint32_t> bicm_map(std::span<const std::uint8_t> bits, int K);
std::vector<std::uint8_t> bicm_unmap(std::span<const std::uint32_t> labels, int K);

struct HardDecisions {
  std::vector<std::uint32_t> coded;  // K bits per symbol
  std::vector<int> quadrants;
  std::vector<std::uint32_t> indices;
};
HardDecisions bicm_demap_hard(std::span<const cplx> received, const ShapedConstellation& constellation);

// Fraction of wrong coded bits, per lane (b_1..b_K) and averaged.
struct LaneErrors {
  std::vector<double> per_lane;
  double average = 0;
};
LaneErrors lane_error_rates(std::span<const std::uint32_t> sent, std::span<const std::uint32_t> detected, int K);

struct FrameHeader {
  int K = 6;
  double scale = 1;
  std::uint64_t interleaver_seed = 0;
  int traceback = 32;

  std::string to_string() const;
  static FrameHeader parse(const std::string& line);
  bool operator==(const FrameHeader&) const = default;
};

}  // namespace fibercode::shaping
