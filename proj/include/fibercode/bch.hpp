#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fibercode/gf.hpp"

namespace fibercode::bch {

inline constexpr int kMaxChecks = 8;

// One field element per check exponent z: sum over set bits of alpha^{z deg}.
// The first t entries are the odd syndromes S_1, S_3, ..., S_{2t-1}; any
// further entries belong to extra generator factors.
struct Syndromes {
  std::array<std::uint16_t, kMaxChecks> value{};

  bool zero() const {
    for (auto v : value)
      if (v != 0) return false;
    return true;
  }
  Syndromes& operator^=(const Syndromes& other) {
    for (int i = 0; i < kMaxChecks; ++i) value[i] ^= other.value[i];
    return *this;
  }
  bool operator==(const Syndromes&) const = default;
};

struct DecodeResult {
  bool success = false;
  std::vector<std::uint8_t> word;       // corrected word (received word on failure)
  std::vector<int> error_positions;     // ascending
};

// Shortened binary BCH code of the given length over GF(2^n), with n the
// smallest exponent such that 2^n - 1 >= length. Word position p carries the
// coefficient of x^{length-1-p}: message bits first, parity in the last r
// positions.
class BchCode {
 public:
  // Generator = lcm of the minimal polynomials of alpha^1..alpha^{2t}. When
  // parity_bits exceeds that degree, minimal polynomials of further
  // cyclotomic cosets (fewest factors, smallest representatives first) are
  // multiplied in until the degree matches exactly.
  static BchCode build(int length, int t, int parity_bits = 0);

  int field_degree() const { return field_->degree(); }
  int mother_length() const { return field_->order(); }
  int length() const { return length_; }
  int shortening() const { return mother_length() - length_; }
  int t() const { return t_; }
  int parity_count() const { return parity_; }
  int message_length() const { return length_ - parity_; }
  const GaloisField& field() const { return *field_; }
  // Coefficients g_0..g_r.
  const std::vector<std::uint8_t>& generator() const { return generator_; }
  std::span<const int> check_exponents() const { return checks_; }
  int degree_of(int position) const { return length_ - 1 - position; }

  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> message) const;
  // Writes the r parity bits of `message` into parity (systematic remainder).
  void compute_parity(std::span<const std::uint8_t> message,
                      std::span<std::uint8_t> parity) const;

  Syndromes syndromes(std::span<const std::uint8_t> word) const;
  // Contribution of a single set bit at `position` to every check.
  const Syndromes& position_syndrome(int position) const { return position_terms_[position]; }

  // Bounded-distance decoding from syndromes: Berlekamp-Massey, then a Chien
  // search restricted to the unshortened support. Succeeds only if the
  // locator has degree <= t, all its roots fall on real positions, and any
  // extra checks agree. Positions are appended in ascending order.
  bool locate(const Syndromes& syndromes, std::vector<int>& positions) const;

  DecodeResult decode(std::span<const std::uint8_t> received) const;

 private:
  BchCode(std::shared_ptr<const GaloisField> field, int length, int t);

  std::shared_ptr<const GaloisField> field_;
  int length_;
  int t_;
  int parity_ = 0;
  std::vector<std::uint8_t> generator_;
  std::uint64_t generator_low_ = 0;  // g without its leading term, bit i = g_i
  std::vector<int> checks_;
  std::vector<Syndromes> position_terms_;
};

// Smallest n with 2^n - 1 >= length.
int field_degree_for_length(int length);

// Cyclotomic coset of s modulo 2^n - 1, ascending.
std::vector<int> cyclotomic_coset(int s, int n);

}  // namespace fibercode::bch
