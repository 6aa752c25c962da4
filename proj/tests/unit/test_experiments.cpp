#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fibercode/experiments.hpp"

using namespace fibercode;
using namespace fibercode::experiments;

namespace {

config::Config from_text(const std::string& text) {
  std::istringstream in(text);
  return config::Config::parse(in, "test");
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::size_t count_fields(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

SignalSettings tiny_signal() {
  SignalSettings s;
  s.channels = 3;
  s.rings = 4;
  s.phase_levels = 16;
  s.slots = 256;
  s.guard = 8;
  s.samples_per_symbol = 4;
  return s;
}

LinkSettings short_link() {
  LinkSettings link;
  link.length = 100e3;
  link.step = 1e3;
  link.bp_step = 10e3;
  return link;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("derive_seed is deterministic and spreads indices") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (std::uint64_t i = 0; i < 256; ++i) seen.insert(derive_seed(m, i));
  CHECK(seen.size() == 4 * 256);
}

TEST_CASE("scale names") {
  CHECK(parse_scale("desk") == Scale::Desk);
  CHECK(parse_scale("paper") == Scale::Paper);
  CHECK_THROWS_AS(parse_scale("huge"), config::ConfigError);
}

TEST_CASE("capacity config defaults and overrides") {
  const auto empty = from_text("");
  const auto desk = CapacityConfig::from(empty, Scale::Desk);
  CHECK(desk.compensations.size() == 2);
  CHECK(desk.signal.rings == 16);
  CHECK(desk.signal.slots == 4096);
  const auto paper = CapacityConfig::from(empty, Scale::Paper);
  CHECK(paper.signal.rings == 64);
  CHECK(paper.signal.slots == 16384);
  CHECK(paper.mc_samples == 100000);

  const auto cfg = from_text(
      "[link]\nlengths = 500 km, 1000 km\ncompensation = EQ\nstep = 50 m\nnoise = off\n"
      "[signal]\npowers_dbm = -6 -2\nrings = 8\n");
  const auto c = CapacityConfig::from(cfg, Scale::Desk);
  CHECK(c.lengths == std::vector<double>{5e5, 1e6});
  REQUIRE(c.compensations.size() == 1);
  CHECK(c.compensations[0] == rx::Compensation::EQ);
  CHECK(c.powers_dbm == std::vector<double>{-6, -2});
  CHECK(c.signal.rings == 8);
  CHECK(cfg.unused_keys().empty());
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(CapacityConfig::from(from_text("[signal]\nchannels = 4\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(CapacityConfig::from(from_text("[signal]\nslots = 1000\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(CapacityConfig::from(from_text("[signal]\nsamples_per_symbol = 4\n"), Scale::Desk),
                  config::ConfigError);
  CHECK_THROWS_AS(CapacityConfig::from(from_text("[link]\nlength = -1 km\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(CapacityConfig::from(from_text("[link]\ncompensation = XY\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(WaterfallConfig::from(from_text("[waterfall]\ncodes = nope\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(WaterfallConfig::from(from_text("[waterfall]\np_in = 0.7\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(ShapeDemoConfig::from(from_text("[shaping]\nK = 5\n"), Scale::Desk), config::ConfigError);
  CHECK_THROWS_AS(PragmaticConfig::from(from_text("[pragmatic]\ndesign = L3000-BP\n"), Scale::Desk),
                  config::ConfigError);
}

TEST_CASE("waterfall default grid brackets each operating point") {
  const auto w = WaterfallConfig::from(from_text(""), Scale::Desk);
  REQUIRE(w.curves.size() == staircase::system_designs().size());
  CHECK(w.options.min_bits == 20'000'000);
  for (const auto& curve : w.curves) {
    const auto& d = *std::find_if(staircase::system_designs().begin(), staircase::system_designs().end(),
                                  [&](const auto& s) { return s.name == curve.code; });
    CHECK(std::is_sorted(curve.p_in.begin(), curve.p_in.end()));
    CHECK(std::find_if(curve.p_in.begin(), curve.p_in.end(),
                       [&](double p) { return std::fabs(p - d.p_avg) < 1e-15; }) != curve.p_in.end());
    const bool has_cliff = std::find(curve.p_in.begin(), curve.p_in.end(), 4.8e-3) != curve.p_in.end();
    CHECK(has_cliff == d.g709);
  }
  CHECK(WaterfallConfig::from(from_text(""), Scale::Paper).options.min_bits == 1'000'000'000);
}

TEST_CASE("pragmatic config follows the design row") {
  const auto p = PragmaticConfig::from(from_text("[pragmatic]\ndesign = L500-BP\n"), Scale::Desk);
  CHECK(p.link.length == doctest::Approx(5e5));
  CHECK(p.link.compensation == rx::Compensation::BP);
  CHECK(p.blocks == 4);
  CHECK(PragmaticConfig::from(from_text(""), Scale::Paper).blocks == 64);
  const auto q = PragmaticConfig::from(from_text("[link]\nlength = 0 km\ncompensation = EQ\n"), Scale::Desk);
  CHECK(q.link.length == 0);
  CHECK(q.link.compensation == rx::Compensation::EQ);
}

TEST_CASE("capacity point is reproducible and BP and EQ share a realization") {
  const auto link = short_link();
  const auto sig = tiny_signal();
  const rx::Compensation both[] = {rx::Compensation::BP, rx::Compensation::EQ};
  const auto a = run_capacity_point(link, both, sig, -4, 4000, 77);
  const auto b = run_capacity_point(link, both, sig, -4, 4000, 77);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].mi_bits == b[i].mi_bits);
    CHECK(a[i].xpm_phase == b[i].xpm_phase);
    CHECK(a[i].mi_bits > 0);
    CHECK(a[i].mi_bits <= std::log2(4.0 * 16.0) + 1e-9);
  }
  CHECK(a[0].compensation == rx::Compensation::BP);
  CHECK(a[1].compensation == rx::Compensation::EQ);
  CHECK(a[0].snr_db == a[1].snr_db);

  // The single-receiver overload sees the same channel as the joint run.
  LinkSettings eq = link;
  eq.compensation = rx::Compensation::EQ;
  const auto single = run_capacity_point(eq, sig, -4, 4000, 77);
  CHECK(single.mi_bits == a[1].mi_bits);

  const auto other = run_capacity_point(link, both, sig, -4, 4000, 78);
  CHECK(other[0].mi_bits != a[0].mi_bits);
}

TEST_CASE("back-to-back capacity point") {
  LinkSettings link = short_link();
  link.length = 0;
  link.noise = false;
  const auto row = run_capacity_point(link, tiny_signal(), -4, 2000, 5);
  CHECK(std::isinf(row.snr_db));
  CHECK(row.evm_db < -100);
  CHECK(row.mi_bits == doctest::Approx(std::log2(64.0)).epsilon(1e-6));
}

TEST_CASE("capacity sweep CSV is byte-identical for a fixed seed") {
  CapacityConfig c;
  c.lengths = {50e3};
  c.powers_dbm = {-6, -2};
  c.link = short_link();
  c.signal = tiny_signal();
  c.mc_samples = 1000;
  c.threads = 2;
  const auto rows = run_capacity_sweep(c, 3);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].compensation == rx::Compensation::BP);
  CHECK(rows[1].compensation == rx::Compensation::BP);
  CHECK(rows[2].compensation == rx::Compensation::EQ);
  CHECK(rows[0].power_dbm == -6);
  CHECK(rows[1].power_dbm == -2);
  // Same point, same realization, different receivers.
  CHECK(rows[0].seed == rows[2].seed);

  std::ostringstream a, b;
  write_capacity_csv(a, rows, 0xabcULL, 3);
  c.threads = 1;
  write_capacity_csv(b, run_capacity_sweep(c, 3), 0xabcULL, 3);
  CHECK(a.str() == b.str());

  const auto lines = lines_of(a.str());
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "# fibercode capacity schema=1");
  CHECK(lines[1].rfind("L_m,comp,P_dBm,SNR_dB,I_bits,stderr", 0) == 0);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    CHECK(count_fields(lines[i]) == count_fields(lines[1]));
    CHECK(lines[i].find(",0000000000000abc,3,") != std::string::npos);
  }
}

TEST_CASE("waterfall run and CSV") {
  WaterfallConfig w;
  w.curves = {{"L2000-EQ", {0.02, 0.03}}};
  w.options.min_bits = 200000;
  w.options.target_errors = 0;
  const auto rows = run_ber_waterfall(w, 9);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].m == 120);
  CHECK(rows[0].t == 4);
  CHECK(rows[0].r == 32);
  CHECK(rows[0].point.bits >= 200000);
  CHECK(rows[0].point.ber_out <= rows[1].point.ber_out);
  CHECK(rows[1].point.ber_out > 0);
  std::ostringstream out;
  write_waterfall_csv(out, rows, 1, 9);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "# fibercode waterfall schema=1");
  CHECK(lines[1] == "code,m,t,r,p_in,ber_out,bit_errors,bits_simulated,blocks,config_hash,seed");
  CHECK(lines[2].rfind("L2000-EQ,120,4,32,0.02,", 0) == 0);
}

TEST_CASE("noiseless back-to-back pragmatic chain is error free") {
  PragmaticConfig p;
  p.design = "L2000-EQ";
  p.link.length = 0;
  p.link.noise = false;
  p.link.compensation = rx::Compensation::EQ;
  p.signal = tiny_signal();
  p.signal.slots = 1024;
  p.signal.guard = 16;
  p.blocks = 2;
  p.threads = 3;
  const auto row = run_pragmatic_endtoend(p, 4);
  CHECK(row.K == 6);
  CHECK(row.p_avg == 0);
  CHECK(row.ber_post == 0);
  CHECK(row.shaping_bit_error == 0);
  CHECK(row.bits_post == 2 * 120 * (120 - 32));
  CHECK(row.rate == doctest::Approx(11.0 / 15.0));
  CHECK(row.se_achieved == doctest::Approx(6 * 11.0 / 15.0 + 1));
  CHECK(row.i_p == doctest::Approx(7.0));
  REQUIRE(row.lane_error.size() == 6);

  p.threads = 1;
  const auto serial = run_pragmatic_endtoend(p, 4);
  CHECK(serial.p_avg == row.p_avg);

  std::ostringstream out;
  write_pragmatic_csv(out, {row}, 2, 4);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "# fibercode pragmatic schema=1");
  CHECK(count_fields(lines[2]) == count_fields(lines[1]));
}

TEST_CASE("shape demo recovers data and lowers energy") {
  const auto row = run_shape_demo(4, 20000, 32, 11);
  CHECK(row.recovered);
  CHECK(row.gain_db > 0.5);
  double share = 0;
  for (double q : row.quadrant_share) share += q;
  CHECK(share == doctest::Approx(1.0));
  const auto again = run_shape_demo(4, 20000, 32, 11);
  CHECK(again.shaped_energy == row.shaped_energy);

  std::ostringstream out;
  write_shape_csv(out, {row}, 0, 11);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "# fibercode shaping schema=1");
  CHECK(count_fields(lines[2]) == count_fields(lines[1]));
}

TEST_CASE("sample configs parse with every key used") {
  const std::string dir = FIBERCODE_CONFIG_DIR;
  {
    const auto cfg = config::Config::load(dir + "/capacity.ini");
    const auto c = CapacityConfig::from(cfg, Scale::Desk);
    CHECK(c.compensations.size() == 2);
    CHECK(c.powers_dbm.size() == 6);
    CHECK(cfg.unused_keys().empty());
  }
  {
    const auto cfg = config::Config::load(dir + "/waterfall.ini");
    const auto w = WaterfallConfig::from(cfg, Scale::Desk);
    CHECK(w.curves.size() == 2);
    CHECK(cfg.unused_keys().empty());
  }
  {
    const auto cfg = config::Config::load(dir + "/pragmatic.ini");
    const auto p = PragmaticConfig::from(cfg, Scale::Desk);
    CHECK(p.link.length == doctest::Approx(2e6));
    CHECK(p.link.compensation == rx::Compensation::EQ);
    CHECK(cfg.unused_keys().empty());
  }
  {
    const auto cfg = config::Config::load(dir + "/shape.ini");
    const auto s = ShapeDemoConfig::from(cfg, Scale::Desk);
    CHECK(s.K == std::vector<int>{2, 4, 6, 8});
    CHECK(cfg.unused_keys().empty());
  }
}

}  // TEST_SUITE
