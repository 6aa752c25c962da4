#include "fibercode/bch.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace fibercode::bch {
namespace {

using BinaryPoly = std::vector<std::uint8_t>;  // coefficient of x^i at [i]

BinaryPoly multiply(const BinaryPoly& a, const BinaryPoly& b) {
  BinaryPoly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i])
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
  return out;
}

// Product of (x + alpha^j) over the coset; the result has binary coefficients.
BinaryPoly minimal_polynomial(const GaloisField& gf, const std::vector<int>& coset) {
  std::vector<std::uint16_t> poly{1};
  for (int j : coset) {
    const std::uint16_t root = gf.exp(j);
    std::vector<std::uint16_t> next(poly.size() + 1, 0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] ^= poly[i];
      next[i] ^= gf.mul(poly[i], root);
    }
    poly = std::move(next);
  }
  BinaryPoly out(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (poly[i] > 1) throw std::logic_error("minimal polynomial is not binary");
    out[i] = static_cast<std::uint8_t>(poly[i]);
  }
  return out;
}

}  // namespace

int field_degree_for_length(int length) {
  int n = 1;
  while ((1 << n) - 1 < length) ++n;
  return n;
}

std::vector<int> cyclotomic_coset(int s, int n) {
  const int order = (1 << n) - 1;
  std::set<int> coset;
  int v = s % order;
  while (coset.insert(v).second) v = (2 * v) % order;
  return {coset.begin(), coset.end()};
}

BchCode::BchCode(std::shared_ptr<const GaloisField> field, int length, int t)
    : field_(std::move(field)), length_(length), t_(t) {}

BchCode BchCode::build(int length, int t, int parity_bits) {
  if (t < 2 || t > 4) throw std::invalid_argument("supported error-correcting capability is 2..4");
  if (length < 3 || length > (1 << 11) - 1)
    throw std::invalid_argument("code length must lie in [3, 2047]");
  const int n = std::max(3, field_degree_for_length(length));
  BchCode code(std::make_shared<GaloisField>(n), length, t);
  const auto& gf = *code.field_;

  std::vector<int> used_reps;
  BinaryPoly gen{1};
  for (int s = 1; s <= 2 * t; ++s) {
    auto coset = cyclotomic_coset(s, n);
    if (std::find(used_reps.begin(), used_reps.end(), coset.front()) != used_reps.end()) continue;
    used_reps.push_back(coset.front());
    gen = multiply(gen, minimal_polynomial(gf, coset));
  }
  for (int s = 1; s < 2 * t; s += 2) code.checks_.push_back(s);

  int natural = static_cast<int>(gen.size()) - 1;
  if (parity_bits != 0 && parity_bits < natural)
    throw std::invalid_argument("requested parity count is below the BCH bound for t=" + std::to_string(t));
  if (parity_bits > natural) {
    // Unused cosets, ordered by representative.
    std::vector<std::vector<int>> spare;
    std::set<int> seen(used_reps.begin(), used_reps.end());
    for (int s = 0; s < gf.order(); ++s) {
      auto coset = cyclotomic_coset(s, n);
      if (seen.insert(coset.front()).second) spare.push_back(std::move(coset));
    }
    const int need = parity_bits - natural;
    std::vector<std::size_t> chosen;
    auto size_of = [&](std::size_t i) { return static_cast<int>(spare[i].size()); };
    for (std::size_t a = 0; a < spare.size() && chosen.empty(); ++a)
      if (size_of(a) == need) chosen = {a};
    for (std::size_t a = 0; a < spare.size() && chosen.empty(); ++a)
      for (std::size_t b = a + 1; b < spare.size() && chosen.empty(); ++b)
        if (size_of(a) + size_of(b) == need) chosen = {a, b};
    for (std::size_t a = 0; a < spare.size() && chosen.empty(); ++a)
      for (std::size_t b = a + 1; b < spare.size() && chosen.empty(); ++b)
        for (std::size_t c = b + 1; c < spare.size() && chosen.empty(); ++c)
          if (size_of(a) + size_of(b) + size_of(c) == need) chosen = {a, b, c};
    if (chosen.empty())
      throw std::invalid_argument("no generator of degree " + std::to_string(parity_bits) + " exists");
    for (auto i : chosen) {
      gen = multiply(gen, minimal_polynomial(gf, spare[i]));
      code.checks_.push_back(spare[i].front());
    }
  }
  if (static_cast<int>(code.checks_.size()) > kMaxChecks)
    throw std::invalid_argument("too many generator factors");

  code.generator_ = gen;
  code.parity_ = static_cast<int>(gen.size()) - 1;
  if (code.parity_ >= length) throw std::invalid_argument("code length leaves no message bits");
  if (code.parity_ > 63) throw std::invalid_argument("parity register wider than 63 bits");
  for (int i = 0; i < code.parity_; ++i)
    if (gen[i]) code.generator_low_ |= std::uint64_t{1} << i;

  code.position_terms_.resize(static_cast<std::size_t>(length));
  for (int p = 0; p < length; ++p) {
    const long long deg = code.degree_of(p);
    for (std::size_t c = 0; c < code.checks_.size(); ++c)
      code.position_terms_[p].value[c] = gf.exp(code.checks_[c] * deg);
  }
  return code;
}

void BchCode::compute_parity(std::span<const std::uint8_t> message,
                             std::span<std::uint8_t> parity) const {
  if (static_cast<int>(message.size()) != message_length() ||
      static_cast<int>(parity.size()) != parity_)
    throw std::invalid_argument("message/parity length mismatch");
  const int r = parity_;
  const std::uint64_t mask = (std::uint64_t{1} << r) - 1;
  std::uint64_t reg = 0;
  for (auto bit : message) {
    const std::uint64_t feedback = (bit & 1u) ^ ((reg >> (r - 1)) & 1u);
    reg = (reg << 1) & mask;
    if (feedback) reg ^= generator_low_;
  }
  // Register bit d is the coefficient of x^d; position k + (r-1-d).
  for (int d = 0; d < r; ++d) parity[r - 1 - d] = static_cast<std::uint8_t>((reg >> d) & 1u);
}

std::vector<std::uint8_t> BchCode::encode(std::span<const std::uint8_t> message) const {
  if (static_cast<int>(message.size()) != message_length())
    throw std::invalid_argument("message length must be " + std::to_string(message_length()));
  std::vector<std::uint8_t> word(message.begin(), message.end());
  word.resize(static_cast<std::size_t>(length_));
  compute_parity(message, std::span<std::uint8_t>(word).subspan(message.size()));
  return word;
}

Syndromes BchCode::syndromes(std::span<const std::uint8_t> word) const {
  if (static_cast<int>(word.size()) != length_)
    throw std::invalid_argument("word length must be " + std::to_string(length_));
  Syndromes s;
  for (int p = 0; p < length_; ++p)
    if (word[p] & 1u) s ^= position_terms_[p];
  return s;
}

bool BchCode::locate(const Syndromes& syn, std::vector<int>& positions) const {
  if (syn.zero()) return true;
  const auto& gf = *field_;
  const int two_t = 2 * t_;

  // Full syndrome sequence: S_{2k} = S_k^2 for binary codes.
  std::array<std::uint16_t, 2 * 4 + 1> S{};
  for (int k = 1; k <= two_t; ++k) {
    if (k % 2 == 1) S[k] = syn.value[(k - 1) / 2];
    else S[k] = gf.mul(S[k / 2], S[k / 2]);
  }

  // Berlekamp-Massey.
  std::array<std::uint16_t, 2 * 4 + 2> C{}, B{}, T{};
  C[0] = B[0] = 1;
  int L = 0, shift = 1;
  std::uint16_t b = 1;
  for (int i = 0; i < two_t; ++i) {
    std::uint16_t d = S[i + 1];
    for (int j = 1; j <= L; ++j) d ^= gf.mul(C[j], S[i + 1 - j]);
    if (d == 0) {
      ++shift;
      continue;
    }
    const std::uint16_t coef = gf.div(d, b);
    if (2 * L <= i) {
      T = C;
      for (int j = 0; j + shift < static_cast<int>(C.size()); ++j) C[j + shift] ^= gf.mul(coef, B[j]);
      L = i + 1 - L;
      B = T;
      b = d;
      shift = 1;
    } else {
      for (int j = 0; j + shift < static_cast<int>(C.size()); ++j) C[j + shift] ^= gf.mul(coef, B[j]);
      ++shift;
    }
  }
  if (L == 0 || L > t_) return false;
  for (int j = L + 1; j < static_cast<int>(C.size()); ++j)
    if (C[j] != 0) return false;

  // Chien search: error at degree e iff Lambda(alpha^{-e}) = 0. term[j]
  // holds log(C_j alpha^{-je}) and is stepped down by j per degree.
  const int order = gf.order();
  std::array<int, 5> term{};
  for (int j = 1; j <= L; ++j) term[j] = C[j] ? gf.log(C[j]) : -1;
  const std::size_t first = positions.size();
  int found = 0;
  for (int e = 0; e < length_ && found < L; ++e) {
    std::uint16_t acc = 1;
    for (int j = 1; j <= L; ++j) {
      if (term[j] < 0) continue;
      acc ^= gf.exp_unreduced(term[j]);
      term[j] -= j;
      if (term[j] < 0) term[j] += order;
    }
    if (acc == 0) {
      positions.push_back(length_ - 1 - e);
      ++found;
    }
  }
  if (found != L) {
    positions.resize(first);
    return false;
  }

  // Extra generator factors must agree with the proposed pattern.
  for (std::size_t c = static_cast<std::size_t>(t_); c < checks_.size(); ++c) {
    std::uint16_t v = 0;
    for (std::size_t i = first; i < positions.size(); ++i) v ^= position_terms_[positions[i]].value[c];
    if (v != syn.value[c]) {
      positions.resize(first);
      return false;
    }
  }
  std::sort(positions.begin() + static_cast<std::ptrdiff_t>(first), positions.end());
  return true;
}

DecodeResult BchCode::decode(std::span<const std::uint8_t> received) const {
  DecodeResult out;
  out.word.assign(received.begin(), received.end());
  const auto syn = syndromes(received);
  out.success = locate(syn, out.error_positions);
  if (out.success)
    for (int p : out.error_positions) out.word[p] ^= 1u;
  else
    out.error_positions.clear();
  return out;
}

}  // namespace fibercode::bch
