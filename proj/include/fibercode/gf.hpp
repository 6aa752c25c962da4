#pragma once

#include <cstdint>
#include <vector>

namespace fibercode::bch {

// GF(2^m) with log/antilog tables. The defining primitive polynomial is
// pinned per m (see primitive_polynomial) so codes are reproducible.
class GaloisField {
 public:
  explicit GaloisField(int m);

  // Bit i of the result is the coefficient of x^i.
  //   m=3  x^3+x+1          m=8  x^8+x^4+x^3+x^2+1
  //   m=4  x^4+x+1          m=9  x^9+x^4+1
  //   m=5  x^5+x^2+1        m=10 x^10+x^3+1
  //   m=6  x^6+x+1          m=11 x^11+x^2+1
  //   m=7  x^7+x^3+1        m=12 x^12+x^6+x^4+x+1
  static std::uint32_t primitive_polynomial(int m);

  int degree() const { return m_; }
  int order() const { return order_; }  // 2^m - 1

  // alpha^e for any integer e.
  std::uint16_t exp(long long e) const {
    long long r = e % order_;
    if (r < 0) r += order_;
    return exp_[static_cast<std::size_t>(r)];
  }
  int log(std::uint16_t x) const { return log_[x]; }  // x != 0
  // alpha^e for 0 <= e < 2*order, no reduction.
  std::uint16_t exp_unreduced(int e) const { return exp_[static_cast<std::size_t>(e)]; }

  std::uint16_t mul(std::uint16_t a, std::uint16_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[static_cast<std::size_t>(log_[a] + log_[b])];
  }
  std::uint16_t div(std::uint16_t a, std::uint16_t b) const;
  std::uint16_t pow(std::uint16_t a, long long e) const;

 private:
  int m_;
  int order_;
  std::vector<std::uint16_t> exp_;  // doubled so mul needs no reduction
  std::vector<int> log_;
};

}  // namespace fibercode::bch
