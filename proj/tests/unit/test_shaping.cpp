#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "fibercode/shaping.hpp"

using namespace fibercode;
using shaping::ShapedConstellation;

namespace {

std::uint32_t brute_nearest(const ShapedConstellation& c, shaping::cplx y) {
  std::uint32_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < c.size(); ++i) {
    const double d = std::norm(y - c.point(i));
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::vector<std::uint8_t> random_bits(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = rng() & 1;
  return v;
}

std::vector<std::uint32_t> random_coded(std::size_t n, int K, std::mt19937_64& rng) {
  std::vector<std::uint32_t> v(n);
  for (auto& c : v) c = static_cast<std::uint32_t>(rng() & ((1u << K) - 1u));
  return v;
}

// Bits of a short sequence packed as a polynomial, bit k = coefficient of D^k.
std::uint32_t pack(std::span<const std::uint8_t> v) {
  std::uint32_t p = 0;
  for (std::size_t k = 0; k < v.size(); ++k) p |= static_cast<std::uint32_t>(v[k] & 1u) << k;
  return p;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_SUITE("shaping") {

TEST_CASE("constellation geometry") {
  for (int K : {2, 4, 6, 8}) {
    CAPTURE(K);
    auto c = ShapedConstellation::build(K);
    CHECK(c.size() == (std::size_t{1} << (K + 2)));
    CHECK(c.side() * c.side() == static_cast<int>(c.size()));
    double e = 0;
    std::set<std::pair<int, int>> grid;
    for (std::uint32_t i = 0; i < c.size(); ++i) {
      const int x = c.grid_x(i), y = c.grid_y(i);
      CHECK(std::abs(x) % 2 == 1);
      CHECK(std::abs(y) % 2 == 1);
      CHECK(std::abs(x) < c.side());
      grid.insert({x, y});
      CHECK(c.point(i) == shaping::cplx(x, y) * c.scale());
      e += std::norm(c.point(i));
    }
    CHECK(grid.size() == c.size());
    CHECK(e / c.size() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.uniform_energy() == 1.0);
  }
  CHECK_THROWS(ShapedConstellation::build(3));
  CHECK_THROWS(ShapedConstellation::build(10));
  CHECK_THROWS(ShapedConstellation::build(0));
}

TEST_CASE("labeling: Gray inside each quadrant, quadrants are translated copies") {
  for (int K : {2, 4, 6, 8}) {
    CAPTURE(K);
    auto c = ShapedConstellation::build(K);
    const int shift = c.side();  // quadrant offset in grid units
    int violations = 0;
    for (std::uint32_t i = 0; i < c.size(); ++i)
      for (std::uint32_t j = 0; j < c.size(); ++j) {
        if (ShapedConstellation::quadrant_of(i) != ShapedConstellation::quadrant_of(j)) continue;
        const int dx = std::abs(c.grid_x(i) - c.grid_x(j)), dy = std::abs(c.grid_y(i) - c.grid_y(j));
        if (dx + dy != 2) continue;
        if (std::popcount(ShapedConstellation::coded_of(i) ^ ShapedConstellation::coded_of(j)) != 1) ++violations;
      }
    CHECK(violations == 0);
    for (std::uint32_t coded = 0; coded < (1u << K); ++coded) {
      const std::uint32_t q0 = coded << 2;
      for (std::uint32_t q = 1; q < 4; ++q) {
        CHECK(c.grid_x(q0 | q) == c.grid_x(q0) - ((q >> 1) ? shift : 0));
        CHECK(c.grid_y(q0 | q) == c.grid_y(q0) - ((q & 1) ? shift : 0));
      }
    }
  }
}

TEST_CASE("K=2 layout by hand") {
  auto c = ShapedConstellation::build(2);
  CHECK(c.scale() == doctest::Approx(1 / std::sqrt(10.0)));
  // coded=0 sits at (1,1) in quadrant 0 and moves by -4 per quadrant bit.
  CHECK(c.grid_x(0) == 1);
  CHECK(c.grid_y(0) == 1);
  CHECK(c.grid_x(0b10) == -3);
  CHECK(c.grid_y(0b01) == -3);
  // coded = b1 b2 = 10: x column 1 -> grid 3.
  CHECK(c.grid_x(0b1000) == 3);
  CHECK(c.grid_y(0b1000) == 1);
  CHECK(c.grid_y(0b0100) == 3);
}

TEST_CASE("nearest point") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int K : {2, 4, 6, 8}) {
    auto c = ShapedConstellation::build(K);
    for (int i = 0; i < 3000; ++i) {
      const shaping::cplx y(1.3 * n01(rng), 1.3 * n01(rng));
      CHECK(c.nearest(y) == brute_nearest(c, y));
    }
    for (std::uint32_t i = 0; i < c.size(); ++i) CHECK(c.nearest(c.point(i)) == i);
    // The origin is equidistant from four points: lowest index wins.
    CHECK(c.nearest(0.0) == brute_nearest(c, 0.0));
  }
}

TEST_CASE("labeled view") {
  auto c = ShapedConstellation::build(4);
  auto l = c.labeled();
  CHECK(l.bits == 6);
  CHECK_NOTHROW(l.validate());
  // index (coded=0b1000, qx=1, qy=0): b1 = 1 at label bit 0, qx at bit K.
  const std::uint32_t idx = (0b1000u << 2) | 0b10u;
  CHECK(l.labels[idx] == (1u | (1u << 4)));
}

TEST_CASE("Gray codes and binary polynomials") {
  for (std::uint32_t v = 0; v < 1024; ++v) {
    CHECK(shaping::gray_decode(shaping::gray_encode(v)) == v);
    CHECK(std::popcount(shaping::gray_encode(v) ^ shaping::gray_encode(v + 1)) == 1);
  }
  CHECK(shaping::poly_mul(0b11, 0b11) == 0b101);
  CHECK(shaping::poly_mul(0b101, 0b111) == 0b11011);
  using S = shaping::ShapingCodeSpec;
  CHECK(S::identities_hold());
  CHECK((shaping::poly_mul(S::kG1, S::kH1) ^ shaping::poly_mul(S::kG2, S::kH2)) == 0);
  CHECK((shaping::poly_mul(S::kInv1, S::kH1) ^ shaping::poly_mul(S::kInv2, S::kH2)) == 1);
  S bad;
  bad.traceback = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("code sequences and coset representatives as polynomial products") {
  using S = shaping::ShapingCodeSpec;
  std::mt19937_64 rng(2);
  const std::size_t n = 20;
  const std::uint32_t mask = (1u << n) - 1u;
  for (int trial = 0; trial < 100; ++trial) {
    auto u = random_bits(n, rng);
    auto c = shaping::encode_shaping_code(u);
    std::vector<std::uint8_t> c1(n), c2(n);
    for (std::size_t k = 0; k < n; ++k) {
      c1[k] = (c[k] >> 1) & 1;
      c2[k] = c[k] & 1;
    }
    const std::uint32_t up = pack(u);
    CHECK(pack(c1) == (shaping::poly_mul(up, S::kG1) & mask));
    CHECK(pack(c2) == (shaping::poly_mul(up, S::kG2) & mask));
    CHECK(((shaping::poly_mul(pack(c1), S::kH1) ^ shaping::poly_mul(pack(c2), S::kH2)) & mask) == 0);
    // Syndrome former kills code sequences.
    auto s0 = shaping::recover_shaping_bits(c);
    CHECK(std::all_of(s0.begin(), s0.end(), [](auto b) { return b == 0; }));

    auto s = random_bits(n, rng);
    auto t = shaping::coset_representative(s);
    std::vector<std::uint8_t> t1(n), t2(n);
    for (std::size_t k = 0; k < n; ++k) {
      t1[k] = (t[k] >> 1) & 1;
      t2[k] = t[k] & 1;
    }
    CHECK(pack(t1) == (shaping::poly_mul(pack(s), S::kInv1) & mask));
    CHECK(pack(t2) == (shaping::poly_mul(pack(s), S::kInv2) & mask));
    std::vector<int> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = t[k] ^ c[k];
    CHECK(shaping::recover_shaping_bits(z) == s);
  }
}

TEST_CASE("shaping is transparent") {
  std::mt19937_64 rng(3);
  shaping::ShapingCodeSpec spec;
  for (int K : {2, 4, 6, 8}) {
    auto c = ShapedConstellation::build(K);
    const std::size_t n = 5000;
    auto data = random_bits(n, rng);
    auto coded = random_coded(n, K, rng);
    auto r = shaping::shape(spec, data, coded, c);
    REQUIRE(r.symbols.size() == n);
    auto hard = shaping::bicm_demap_hard(r.symbols, c);
    CHECK(hard.coded == coded);
    CHECK(hard.quadrants == r.quadrants);
    CHECK(hard.indices == r.indices);
    CHECK(shaping::recover_shaping_bits(hard.quadrants) == data);
    // Exactly one shaping bit per symbol comes back.
    CHECK(shaping::recover_shaping_bits(hard.quadrants).size() == n);
    // Transmitted quadrants are the coset representative plus a code word.
    auto t = shaping::coset_representative(data);
    auto cw = shaping::encode_shaping_code(r.u);
    for (std::size_t k = 0; k < n; ++k) CHECK(r.quadrants[k] == (t[k] ^ cw[k]));
  }
  auto c6 = ShapedConstellation::build(6);
  CHECK_THROWS(shaping::shape(spec, std::vector<std::uint8_t>(3), std::vector<std::uint32_t>(4), c6));
  CHECK_THROWS(shaping::shape(spec, std::vector<std::uint8_t>(1), std::vector<std::uint32_t>{64}, c6));
}

TEST_CASE("shaping lowers the average energy") {
  std::mt19937_64 rng(4);
  auto c = ShapedConstellation::build(6);
  const std::size_t n = 100000;
  auto data = random_bits(n, rng);
  auto coded = random_coded(n, 6, rng);
  auto r = shaping::shape({}, data, coded, c);
  double uniform = 0;
  for (std::size_t k = 0; k < n; ++k) uniform += std::norm(c.point(coded[k], static_cast<int>(rng() & 3)));
  uniform /= n;
  const double gain_db = 10 * std::log10(uniform / r.mean_energy);
  MESSAGE("shaping gain " << gain_db << " dB");
  CHECK(gain_db >= 0.5);

  // All-zero data over a constant label: the zero code sequence keeps every
  // symbol on the innermost point.
  std::vector<std::uint8_t> zeros(n, 0);
  std::vector<std::uint32_t> same(n, 0);
  auto z = shaping::shape({}, zeros, same, c);
  std::vector<int> hist(4, 0);
  for (int q : z.quadrants) ++hist[q];
  CHECK(hist[0] == static_cast<int>(n));
  CHECK(z.mean_energy == doctest::Approx(std::norm(c.point(0))));
}

TEST_CASE("Viterbi output is optimal on short frames") {
  std::mt19937_64 rng(5);
  auto c = ShapedConstellation::build(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + trial % 9;  // up to 12 symbols
    auto data = random_bits(n, rng);
    auto coded = random_coded(n, 4, rng);
    auto r = shaping::shape({}, data, coded, c);
    auto t = shaping::coset_representative(data);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t u = 0; u < (1u << n); ++u) {
      std::vector<std::uint8_t> ub(n);
      for (std::size_t k = 0; k < n; ++k) ub[k] = (u >> k) & 1u;
      auto cw = shaping::encode_shaping_code(ub);
      double e = 0;
      for (std::size_t k = 0; k < n; ++k) e += std::norm(c.point(coded[k], t[k] ^ cw[k]));
      best = std::min(best, e);
    }
    CHECK(r.mean_energy * n <= best * (1 + 1e-12));
  }
}

TEST_CASE("longer traceback never costs energy") {
  std::mt19937_64 rng(6);
  auto c = ShapedConstellation::build(6);
  const std::size_t n = 40000;
  auto data = random_bits(n, rng);
  auto coded = random_coded(n, 6, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (int tb : {1, 2, 4, 8, 16, 32, 64}) {
    shaping::ShapingCodeSpec spec;
    spec.traceback = tb;
    auto r = shaping::shape(spec, data, coded, c);
    MESSAGE("traceback " << tb << " energy " << r.mean_energy);
    CHECK(r.mean_energy <= previous + 1e-12);
    previous = r.mean_energy;
    CHECK(shaping::recover_shaping_bits(r.quadrants) == data);
  }
}

TEST_CASE("quadrant errors propagate to at most three shaping bits") {
  std::mt19937_64 rng(7);
  auto c = ShapedConstellation::build(6);
  const std::size_t n = 200000;
  auto data = random_bits(n, rng);
  auto r = shaping::shape({}, data, random_coded(n, 6, rng), c);
  auto q = r.quadrants;
  std::bernoulli_distribution hit(1e-3);
  std::vector<std::size_t> where;
  for (std::size_t k = 0; k < n; ++k)
    if (hit(rng)) {
      q[k] ^= 1 << (rng() & 1);
      where.push_back(k);
    }
  auto s = shaping::recover_shaping_bits(q);
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (s[k] == data[k]) continue;
    ++wrong;
    // Every wrong output lies within two symbols after an injected error.
    const bool near = std::any_of(where.begin(), where.end(), [&](std::size_t w) { return k >= w && k <= w + 2; });
    CHECK(near);
  }
  CHECK(wrong > 0);
  CHECK(wrong <= 3 * where.size());
}

TEST_CASE("interleaver") {
  shaping::Interleaver a(1000, 42), b(1000, 42), d(1000, 43);
  auto perm = std::vector<std::uint32_t>(a.permutation().begin(), a.permutation().end());
  auto sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 1000; ++i) CHECK(sorted[i] == i);
  CHECK(std::equal(perm.begin(), perm.end(), b.permutation().begin()));
  CHECK(!std::equal(perm.begin(), perm.end(), d.permutation().begin()));
  CHECK(a.seed() == 42);
  std::mt19937_64 rng(8);
  auto bits = random_bits(1000, rng);
  auto mixed = a.interleave(bits);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(mixed[i] == bits[perm[i]]);
  CHECK(a.deinterleave(mixed) == bits);
  CHECK_THROWS(a.interleave(std::vector<std::uint8_t>(5)));
  CHECK_THROWS(shaping::Interleaver(0, 1));
}

TEST_CASE("BICM mapping") {
  std::vector<std::uint8_t> bits{1, 0, 1, 1, 1, 0};
  auto labels = shaping::bicm_map(bits, 3);
  CHECK(labels == std::vector<std::uint32_t>{0b101, 0b110});
  CHECK(shaping::bicm_unmap(labels, 3) == bits);
  CHECK_THROWS(shaping::bicm_map(bits, 4));
  std::mt19937_64 rng(9);
  auto many = random_bits(6 * 1000, rng);
  CHECK(shaping::bicm_unmap(shaping::bicm_map(many, 6), 6) == many);
}

TEST_CASE("lane error rates") {
  std::vector<std::uint32_t> sent{0b00, 0b11, 0b10, 0b01};
  std::vector<std::uint32_t> got{0b10, 0b11, 0b10, 0b00};
  auto e = shaping::lane_error_rates(sent, got, 2);
  CHECK(e.per_lane[0] == doctest::Approx(0.25));
  CHECK(e.per_lane[1] == doctest::Approx(0.25));
  CHECK(e.average == doctest::Approx(0.25));
  CHECK_THROWS(shaping::lane_error_rates(sent, std::vector<std::uint32_t>(2), 2));
  auto same = shaping::lane_error_rates(sent, sent, 2);
  CHECK(same.average == 0.0);
}

TEST_CASE("K=2 hard-decision lane errors match the boundary integrals") {
  auto c = ShapedConstellation::build(2);
  const double sigma = 0.35 * c.scale() * 2;  // per dimension
  // Levels along one axis in grid units and their in-quadrant Gray bit.
  const int level[4] = {-3, -1, 1, 3};
  int gray_bit[4];
  for (int L = 0; L < 4; ++L) {
    // Any index with this x level; read its coded bit b1.
    for (std::uint32_t i = 0; i < c.size(); ++i)
      if (c.grid_x(i) == level[L]) {
        gray_bit[L] = (ShapedConstellation::coded_of(i) >> 1) & 1;
        break;
      }
  }
  const double bounds[5] = {-1e9, -2, 0, 2, 1e9};
  double p_lane = 0;
  for (int tx = 0; tx < 4; ++tx)
    for (int rx = 0; rx < 4; ++rx) {
      if (gray_bit[rx] == gray_bit[tx]) continue;
      const double lo = (bounds[rx] - level[tx]) * c.scale() / sigma;
      const double hi = (bounds[rx + 1] - level[tx]) * c.scale() / sigma;
      p_lane += (phi(hi) - phi(lo)) / 4;
    }

  std::mt19937_64 rng(10);
  std::normal_distribution<double> noise(0, sigma);
  const std::size_t n = 400000;
  std::vector<std::uint32_t> sent(n), idx(n);
  std::vector<shaping::cplx> rx(n);
  for (std::size_t k = 0; k < n; ++k) {
    idx[k] = static_cast<std::uint32_t>(rng() & 15u);
    sent[k] = ShapedConstellation::coded_of(idx[k]);
    rx[k] = c.point(idx[k]) + shaping::cplx(noise(rng), noise(rng));
  }
  auto hard = shaping::bicm_demap_hard(rx, c);
  auto lanes = shaping::lane_error_rates(sent, hard.coded, 2);
  const double sd = std::sqrt(p_lane * (1 - p_lane) / n);
  MESSAGE("analytic " << p_lane << " lanes " << lanes.per_lane[0] << " " << lanes.per_lane[1]);
  CHECK(std::abs(lanes.per_lane[0] - p_lane) < 3 * sd);
  CHECK(std::abs(lanes.per_lane[1] - p_lane) < 3 * sd);

  // Noiseless: no errors at all.
  std::vector<shaping::cplx> clean(n);
  for (std::size_t k = 0; k < n; ++k) clean[k] = c.point(idx[k]);
  CHECK(shaping::lane_error_rates(sent, shaping::bicm_demap_hard(clean, c).coded, 2).average == 0.0);
}

TEST_CASE("lanes of a larger constellation are unequal") {
  auto c = ShapedConstellation::build(6);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0, 0.6 * c.scale());
  const std::size_t n = 200000;
  std::vector<std::uint32_t> sent(n);
  std::vector<shaping::cplx> rx(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::uint32_t>(rng() % c.size());
    sent[k] = ShapedConstellation::coded_of(i);
    rx[k] = c.point(i) + shaping::cplx(noise(rng), noise(rng));
  }
  auto lanes = shaping::lane_error_rates(sent, shaping::bicm_demap_hard(rx, c).coded, 6);
  const auto [lo, hi] = std::minmax_element(lanes.per_lane.begin(), lanes.per_lane.end());
  MESSAGE("lane range " << *lo << " .. " << *hi);
  CHECK(*hi > 1.5 * *lo);
  CHECK(lanes.average > 0);
}

TEST_CASE("frame header") {
  shaping::FrameHeader h{8, 0.0123456789, 987654321, 48};
  auto text = h.to_string();
  CHECK(text.rfind("K=8 ", 0) == 0);
  CHECK(shaping::FrameHeader::parse(text) == h);
  CHECK_THROWS(shaping::FrameHeader::parse("K=8 scale=1 interleaver_seed=1"));
  CHECK_THROWS(shaping::FrameHeader::parse("K=8 scale=1 interleaver_seed=1 traceback=x"));
  CHECK_THROWS(shaping::FrameHeader::parse("K=8 scale=1 interleaver_seed=1 depth=3"));
  CHECK_THROWS(shaping::FrameHeader::parse("K8 scale=1 interleaver_seed=1 traceback=3"));
}

}  // TEST_SUITE
