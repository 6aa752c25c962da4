#include "fibercode/gf.hpp"

#include <stdexcept>
#include <string>

namespace fibercode::bch {

std::uint32_t GaloisField::primitive_polynomial(int m) {
  switch (m) {
    case 3: return 0b1011;
    case 4: return 0b10011;
    case 5: return 0b100101;
    case 6: return 0b1000011;
    case 7: return 0b10001001;
    case 8: return 0b100011101;
    case 9: return 0b1000010001;
    case 10: return 0b10000001001;
    case 11: return 0b100000000101;
    case 12: return 0b1000001010011;
    default: throw std::invalid_argument("no pinned primitive polynomial for m=" + std::to_string(m));
  }
}

GaloisField::GaloisField(int m) : m_(m), order_((1 << m) - 1) {
  const std::uint32_t poly = primitive_polynomial(m);
  exp_.resize(2 * static_cast<std::size_t>(order_));
  log_.assign(static_cast<std::size_t>(order_) + 1, -1);
  std::uint32_t x = 1;
  for (int i = 0; i < order_; ++i) {
    if (log_[x] != -1) throw std::logic_error("polynomial is not primitive");
    exp_[i] = static_cast<std::uint16_t>(x);
    log_[x] = i;
    x <<= 1;
    if (x & (1u << m)) x ^= poly;
  }
  if (x != 1) throw std::logic_error("polynomial is not primitive");
  for (int i = order_; i < 2 * order_; ++i) exp_[i] = exp_[i - order_];
}

std::uint16_t GaloisField::div(std::uint16_t a, std::uint16_t b) const {
  if (b == 0) throw std::domain_error("division by zero in GF(2^m)");
  if (a == 0) return 0;
  return exp(static_cast<long long>(log_[a]) - log_[b]);
}

std::uint16_t GaloisField::pow(std::uint16_t a, long long e) const {
  if (a == 0) return e == 0 ? 1 : 0;
  return exp(static_cast<long long>(log_[a]) * e);
}

}  // namespace fibercode::bch
