#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "fibercode/fft.hpp"
#include "fibercode/rx.hpp"
#include "fibercode/wdm.hpp"

using namespace fibercode;

namespace {

constexpr double kTs = 1e-11;

double max_rel_error(const std::vector<cplx>& got, const std::vector<cplx>& want) {
  double peak = 0, err = 0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    peak = std::max(peak, std::abs(want[i]));
    err = std::max(err, std::abs(got[i] - want[i]));
  }
  return err / peak;
}

}  // namespace

TEST_SUITE("wdm") {

TEST_CASE("ring constellation basics") {
  wdm::RingConstellation c{64, 1.0, 256};
  CHECK(c.num_rings == 64);
  CHECK(c.radius(3) == 3.0);
  // E|phi|^2 over rings 1..N, brute force.
  double sum = 0;
  for (int i = 1; i <= 64; ++i) sum += i * i;
  CHECK(c.mean_square() == doctest::Approx(sum / 64));
  CHECK_THROWS((wdm::RingConstellation{0, 1.0, 8}.validate()));
  CHECK_THROWS((wdm::RingConstellation{4, 0.0, 8}.validate()));
  CHECK_THROWS((wdm::RingConstellation{4, 1.0, 2}.validate()));
}

TEST_CASE("single ring, four phases") {
  wdm::RingConstellation c{1, 0.5, 4};
  wdm::Rng rng(1);
  auto f = wdm::draw_symbols(c, 64, 3, kTs, rng);
  std::set<int> phases;
  for (std::size_t i = 0; i < f.symbols.size(); ++i) {
    CHECK(std::abs(f.symbols[i]) == doctest::Approx(0.5));
    const double a = std::arg(f.symbols[i]);
    const double q = a / (std::numbers::pi / 2);
    CHECK(std::abs(q - std::round(q)) < 1e-12);
    phases.insert(f.phase_index[i]);
    CHECK(f.ring_index[i] == 1);
  }
  CHECK(phases.size() == 4);
  CHECK_THROWS(wdm::draw_symbols(c, 0, 1, kTs, rng));
  CHECK_THROWS(wdm::draw_symbols(c, 8, 2, kTs, rng));
}

TEST_CASE("every symbol sits on its ring") {
  wdm::RingConstellation c{16, 0.3, 256};
  wdm::Rng rng(2);
  auto f = wdm::draw_symbols(c, 256, 5, kTs, rng);
  for (std::size_t i = 0; i < f.symbols.size(); ++i) {
    CHECK(std::abs(f.symbols[i]) == doctest::Approx(c.radius(f.ring_index[i])).epsilon(1e-12));
    CHECK(std::abs(std::arg(f.symbols[i] * std::polar(1.0, -2 * std::numbers::pi * f.phase_index[i] / 256))) < 1e-9);
  }
}

TEST_CASE("ring histogram is uniform") {
  wdm::RingConstellation c{64, 1.0, 256};
  wdm::Rng rng(3);
  auto f = wdm::draw_symbols(c, 1 << 20, 1, kTs, rng);
  std::vector<double> counts(64, 0);
  for (int r : f.ring_index) counts[r - 1] += 1;
  const double n = f.ring_index.size(), p = 1.0 / 64;
  const double mean = n * p, sd = std::sqrt(n * p * (1 - p));
  double chi2 = 0;
  for (double k : counts) {
    CHECK(std::abs(k - mean) < 3 * sd);
    chi2 += (k - mean) * (k - mean) / mean;
  }
  // 63 degrees of freedom; 0.1% upper quantile is about 103.
  CHECK(chi2 < 103);
}

TEST_CASE("back-to-back recovers every symbol") {
  wdm::RingConstellation c{8, 1e-3, 64};
  wdm::Rng rng(4);
  auto frame = wdm::draw_symbols(c, 512, 5, kTs, rng);
  auto field = wdm::modulate(frame, {8});
  CHECK(field.size() == 512 * 8);
  CHECK(field.sample_rate() == doctest::Approx(8 / kTs));
  for (int l = -2; l <= 2; ++l) {
    auto coi = rx::extract_channel(field, l, kTs);
    auto got = rx::sample_symbols(coi, kTs, 512, 0);
    CHECK(max_rel_error(got, frame.channel(l)) < 1e-9);
  }
}

TEST_CASE("single symbol single channel") {
  std::vector<std::vector<cplx>> ch{std::vector<cplx>(16)};
  ch[0][5] = cplx(0.3, -0.2) * 1e-6;
  auto frame = wdm::frame_from_channels(ch, kTs);
  auto field = wdm::modulate(frame, {4});
  auto got = rx::sample_symbols(field, kTs, 16, 0);
  CHECK(std::abs(got[5] - ch[0][5]) < 1e-9 * std::abs(ch[0][5]));
  for (int k = 0; k < 16; ++k)
    if (k != 5) CHECK(std::abs(got[k]) < 1e-9 * std::abs(ch[0][5]));
}

TEST_CASE("no leakage into a neighbouring channel") {
  std::vector<std::vector<cplx>> ch(3, std::vector<cplx>(64));
  ch[2][10] = 1e-6;  // channel +1 only
  auto frame = wdm::frame_from_channels(ch, kTs);
  auto field = wdm::modulate(frame, {4});
  auto coi = rx::sample_symbols(rx::extract_channel(field, 0, kTs), kTs, 64, 0);
  double leak = 0;
  for (auto v : coi) leak += std::norm(v);
  CHECK(leak < 1e-8 * 1e-12);
}

TEST_CASE("each channel's energy stays in its band") {
  wdm::RingConstellation c{4, 1.0, 16};
  wdm::Rng rng(5);
  auto frame = wdm::draw_symbols(c, 256, 5, kTs, rng);
  auto field = wdm::modulate(frame, {8});
  std::vector<cplx> spec(field.samples().begin(), field.samples().end());
  fft_forward(spec);
  const long long n = spec.size(), S = 256;
  double total = 0;
  for (auto v : spec) total += std::norm(v);
  for (int l = -2; l <= 2; ++l) {
    double in_band = 0;
    for (long long q = -S / 2; q < S / 2; ++q) in_band += std::norm(spec[((l * S + q) % n + n) % n]);
    CHECK(in_band / total > 0.1);
  }
  double all_bands = 0;
  for (int l = -2; l <= 2; ++l)
    for (long long q = -S / 2; q < S / 2; ++q) all_bands += std::norm(spec[((l * S + q) % n + n) % n]);
  CHECK(all_bands / total > 0.999);
}

TEST_CASE("launch power") {
  wdm::RingConstellation c{16, 1.0, 256};
  wdm::Rng rng(6);
  auto frame = wdm::draw_symbols(c, 4096, 5, kTs, rng);
  for (double dbm : {-4.0, -6.0}) {
    const double P = wdm::dbm_to_watt(dbm);
    auto scaled = wdm::set_average_power(frame, P);
    CHECK(scaled.mean_energy() / kTs == doctest::Approx(P).epsilon(1e-12));
    auto field = wdm::modulate(scaled, {8});
    // Five channels, each carrying P.
    CHECK(field.mean_power() / 5 == doctest::Approx(P).epsilon(0.01));
  }
  CHECK(wdm::dbm_to_watt(-4) == doctest::Approx(3.98e-4).epsilon(1e-3));
  CHECK(wdm::watt_to_dbm(1e-3) == doctest::Approx(0.0));

  auto a = wdm::set_average_power(frame, 1e-3);
  auto b = wdm::set_average_power(frame, 2e-3);
  for (std::size_t i = 0; i < a.symbols.size(); ++i)
    CHECK(std::norm(b.symbols[i]) == doctest::Approx(2 * std::norm(a.symbols[i])));
  CHECK(b.constellation->ring_spacing == doctest::Approx(std::sqrt(2.0) * a.constellation->ring_spacing));

  auto zero = wdm::frame_from_channels({std::vector<cplx>(8)}, kTs);
  CHECK_THROWS(wdm::set_average_power(zero, 1e-3));
  CHECK_THROWS(wdm::set_average_power(frame, 0.0));
}

TEST_CASE("grid checks") {
  wdm::RingConstellation c{4, 1.0, 16};
  wdm::Rng rng(7);
  auto frame = wdm::draw_symbols(c, 64, 5, kTs, rng);
  CHECK_THROWS(wdm::modulate(frame, {4}));
  CHECK_THROWS(wdm::modulate(frame, {6}));
  auto odd = wdm::draw_symbols(c, 48, 1, kTs, rng);
  CHECK_THROWS(wdm::modulate(odd, {4}));
  CHECK_THROWS(wdm::frame_from_channels({std::vector<cplx>(8), std::vector<cplx>(8)}, kTs));
  CHECK_THROWS(wdm::frame_from_channels({std::vector<cplx>(8), std::vector<cplx>(8), std::vector<cplx>(4)}, kTs));
}

TEST_CASE("symbol CSV round trip") {
  wdm::RingConstellation c{4, 0.1, 16};
  wdm::Rng rng(8);
  auto frame = wdm::draw_symbols(c, 16, 3, kTs, rng);
  std::stringstream ss;
  wdm::write_frame_csv(ss, frame);
  CHECK(ss.str().rfind("k,l,re,im\n", 0) == 0);
  auto back = wdm::read_frame_csv(ss, kTs);
  CHECK(back.num_slots == 16);
  CHECK(back.num_channels == 3);
  for (std::size_t i = 0; i < frame.symbols.size(); ++i) CHECK(back.symbols[i] == frame.symbols[i]);
  std::stringstream bad("x,y\n");
  CHECK_THROWS(wdm::read_frame_csv(bad, kTs));
}

}  // TEST_SUITE
