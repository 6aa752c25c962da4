#include "fibercode/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "fibercode/parallel.hpp"
#include "fibercode/shaping.hpp"
#include "fibercode/wdm.hpp"

namespace fibercode::experiments {

using config::Config;
using config::ConfigError;
using config::Unit;

Scale parse_scale(const std::string& text) {
  if (text == "desk") return Scale::Desk;
  if (text == "paper") return Scale::Paper;
  throw ConfigError("unknown scale '" + text + "' (expected desk or paper)");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t x = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

int as_int(const Config& cfg, const std::string& key, long long fallback, long long lo, long long hi) {
  const long long v = cfg.get_int(key, fallback);
  if (v < lo || v > hi)
    throw ConfigError(key + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return static_cast<int>(v);
}

unsigned threads_from(const Config& cfg) {
  const long long t = cfg.get_int("run.threads", 0);
  if (t < 0) throw ConfigError("run.threads must be >= 0");
  return t == 0 ? default_thread_count() : static_cast<unsigned>(t);
}

// read_compensation is false when the caller parses link.compensation as a list.
LinkSettings link_from(const Config& cfg, LinkSettings link, bool read_compensation) {
  link.length = cfg.get_quantity("link.length", Unit::Length, link.length);
  if (read_compensation) {
    try {
      link.compensation = rx::parse_compensation(cfg.get_string("link.compensation", rx::to_string(link.compensation)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("link.compensation: ") + e.what());
    }
  }
  link.step = cfg.get_quantity("link.step", Unit::Length, link.step);
  link.bp_step = cfg.get_quantity("link.bp_step", Unit::Length, link.bp_step);
  link.symmetric_bp = cfg.get_bool("link.symmetric_bp", link.symmetric_bp);
  link.noise = cfg.get_bool("link.noise", link.noise);
  link.fiber.beta2 = cfg.get_quantity("fiber.beta2", Unit::None, link.fiber.beta2);
  link.fiber.alpha = cfg.get_quantity("fiber.alpha", Unit::None, link.fiber.alpha);
  link.fiber.gamma = cfg.get_quantity("fiber.gamma", Unit::None, link.fiber.gamma);
  link.fiber.nu_s = cfg.get_quantity("fiber.nu_s", Unit::Frequency, link.fiber.nu_s);
  link.fiber.k_t = cfg.get_quantity("fiber.k_t", Unit::None, link.fiber.k_t);
  try {
    link.fiber.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fiber: ") + e.what());
  }
  if (!(link.length >= 0)) throw ConfigError("link.length must be >= 0");
  if (!(link.step > 0) || !(link.bp_step > 0)) throw ConfigError("step sizes must be > 0");
  return link;
}

SignalSettings signal_from(const Config& cfg, Scale scale) {
  SignalSettings s;
  if (scale == Scale::Paper) {
    s.rings = 64;
    s.slots = 1 << 14;
  }
  s.channels = as_int(cfg, "signal.channels", s.channels, 1, 63);
  if (s.channels % 2 == 0) throw ConfigError("signal.channels must be odd (2B+1)");
  s.rings = as_int(cfg, "signal.rings", s.rings, 1, 4096);
  s.phase_levels = as_int(cfg, "signal.phase_levels", s.phase_levels, 4, 1 << 16);
  s.slots = as_int(cfg, "signal.slots", s.slots, 4, 1 << 24);
  if (!is_power_of_two(s.slots)) throw ConfigError("signal.slots must be a power of two");
  s.guard = as_int(cfg, "signal.guard", s.guard, 0, s.slots / 4);
  const double rate = cfg.get_quantity("signal.symbol_rate", Unit::Frequency, 100e9);
  if (!(rate > 0)) throw ConfigError("signal.symbol_rate must be > 0");
  s.symbol_period = 1.0 / rate;
  s.samples_per_symbol = as_int(cfg, "signal.samples_per_symbol", s.samples_per_symbol, 2, 1024);
  if (!is_power_of_two(s.samples_per_symbol) || s.samples_per_symbol <= s.channels)
    throw ConfigError("signal.samples_per_symbol must be a power of two above the channel count");
  return s;
}

std::vector<rx::Compensation> compensations_from(const Config& cfg) {
  std::vector<rx::Compensation> out;
  for (const auto& name : cfg.get_string_list("link.compensation", {"BP", "EQ"})) {
    try {
      out.push_back(rx::parse_compensation(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("link.compensation: ") + e.what());
    }
  }
  if (out.empty()) throw ConfigError("link.compensation is empty");
  return out;
}

const staircase::SystemDesign& design_named(const std::string& name) {
  for (const auto& d : staircase::system_designs())
    if (d.name == name) return d;
  std::string known;
  for (const auto& d : staircase::system_designs()) known += " " + d.name;
  throw ConfigError("unknown code design '" + name + "' (known:" + known + ")");
}

void schema_line(std::ostream& out, const std::string& kind) {
  out << "# fibercode " << kind << " schema=" << kSchemaVersion << "\n";
}

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

CapacityConfig CapacityConfig::from(const Config& cfg, Scale scale) {
  CapacityConfig c;
  c.link = link_from(cfg, c.link, false);
  c.compensations = compensations_from(cfg);
  c.lengths = cfg.get_quantity_list("link.lengths", Unit::Length, {c.link.length});
  c.signal = signal_from(cfg, scale);
  c.powers_dbm = cfg.get_quantity_list("signal.powers_dbm", Unit::None, c.powers_dbm);
  if (c.powers_dbm.empty()) throw ConfigError("signal.powers_dbm is empty");
  if (c.lengths.empty()) throw ConfigError("link.lengths is empty");
  c.mc_samples = static_cast<std::size_t>(as_int(cfg, "mi.samples", scale == Scale::Paper ? 100000 : 20000, 100, 1 << 30));
  c.threads = threads_from(cfg);
  c.write_models = cfg.get_bool("output.models", false);
  return c;
}

std::vector<CapacityRow> run_capacity_point(const LinkSettings& link,
                                            std::span<const rx::Compensation> receivers,
                                            const SignalSettings& signal, double power_dbm,
                                            std::size_t mc_samples, std::uint64_t seed,
                                            unsigned mi_threads) {
  const double power = wdm::dbm_to_watt(power_dbm);
  wdm::RingConstellation constellation{signal.rings, 1.0, signal.phase_levels};
  wdm::Rng rng(derive_seed(seed, 1));
  auto frame = wdm::draw_symbols(constellation, signal.slots, signal.channels, signal.symbol_period, rng);
  frame = wdm::set_average_power(std::move(frame), power);

  auto field = wdm::modulate(frame, wdm::GridSpec{signal.samples_per_symbol});
  fiber::PropagationPlan plan;
  plan.total_length = link.length;
  plan.step_size = link.step;
  plan.noise_enabled = link.noise;
  plan.noise_seed = derive_seed(seed, 2);
  if (link.length > 0) field = fiber::ssfm_propagate(std::move(field), link.fiber, plan);
  const auto coi_field = rx::extract_channel(field, 0, signal.symbol_period);

  const auto all_tx = frame.channel(0);
  const auto all_rings = frame.channel_rings(0);
  const std::vector<cplx> tx(all_tx.begin() + signal.guard, all_tx.end() - signal.guard);
  const std::vector<int> rings(all_rings.begin() + signal.guard, all_rings.end() - signal.guard);
  std::vector<double> radii(static_cast<std::size_t>(signal.rings));
  for (int i = 1; i <= signal.rings; ++i) radii[i - 1] = frame.constellation->radius(i);

  std::vector<CapacityRow> rows;
  for (const auto comp : receivers) {
    rx::RxConfig rxc;
    rxc.compensation = comp;
    rxc.bp_step_size = link.bp_step;
    rxc.symmetric_bp = link.symmetric_bp;
    const auto coi = rx::compensate(coi_field, rxc, link.fiber, link.length);
    const auto received = rx::sample_symbols(coi, signal.symbol_period, signal.slots, signal.guard);

    CapacityRow row;
    row.length = link.length;
    row.compensation = comp;
    row.power_dbm = power_dbm;
    row.seed = seed;
    const double psd = fiber::ase_psd(link.fiber, link.length);
    row.snr_db = psd > 0 ? stats::snr_db({power, psd, 101e9}) : std::numeric_limits<double>::infinity();
    row.xpm_phase = rx::estimate_xpm_phase(received, tx);
    const auto rotated = rx::back_rotate(received, tx, row.xpm_phase);
    std::vector<cplx> derotated(received.size());
    const cplx w = std::polar(1.0, -row.xpm_phase);
    for (std::size_t i = 0; i < received.size(); ++i) derotated[i] = received[i] * w;
    row.evm_db = rx::evm_db(derotated, tx);
    row.model = stats::fit_model(rotated, rings, radii);
    const auto mi = stats::mutual_information(row.model, signal.phase_levels, mc_samples,
                                              derive_seed(seed, 3), mi_threads);
    row.mi_bits = mi.bits;
    row.std_error = mi.std_error;
    rows.push_back(std::move(row));
  }
  return rows;
}

CapacityRow run_capacity_point(const LinkSettings& link, const SignalSettings& signal,
                               double power_dbm, std::size_t mc_samples, std::uint64_t seed,
                               unsigned mi_threads) {
  const rx::Compensation comp[] = {link.compensation};
  return run_capacity_point(link, comp, signal, power_dbm, mc_samples, seed, mi_threads).front();
}

std::vector<CapacityRow> run_capacity_sweep(const CapacityConfig& config, std::uint64_t seed) {
  struct Job {
    std::size_t length_index, power_index;
  };
  std::vector<Job> jobs;
  for (std::size_t li = 0; li < config.lengths.size(); ++li)
    for (std::size_t pi = 0; pi < config.powers_dbm.size(); ++pi) jobs.push_back({li, pi});

  std::vector<std::vector<CapacityRow>> results(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    LinkSettings link = config.link;
    link.length = config.lengths[job.length_index];
    const double p_dbm = config.powers_dbm[job.power_index];
    // Every receiver sees the same realization at a given (length, power).
    const std::uint64_t point_seed = derive_seed(seed, job.length_index * 4096 + job.power_index);
    try {
      results[j] = run_capacity_point(link, config.compensations, config.signal, p_dbm,
                                      config.mc_samples, point_seed, 1);
    } catch (const fiber::NumericalBlowup& e) {
      std::ostringstream msg;
      msg << e.what() << " (P = " << p_dbm << " dBm, L = " << link.length / 1e3 << " km)";
      throw fiber::NumericalBlowup(msg.str());
    }
  });

  // Rows ordered by length, receiver, power.
  std::vector<CapacityRow> rows;
  for (std::size_t li = 0; li < config.lengths.size(); ++li)
    for (std::size_t ci = 0; ci < config.compensations.size(); ++ci)
      for (std::size_t j = 0; j < jobs.size(); ++j)
        if (jobs[j].length_index == li) rows.push_back(results[j][ci]);
  return rows;
}

void write_capacity_csv(std::ostream& out, const std::vector<CapacityRow>& rows,
                        std::uint64_t config_hash, std::uint64_t seed) {
  schema_line(out, "capacity");
  out << "L_m,comp,P_dBm,SNR_dB,I_bits,stderr,xpm_phase_rad,evm_dB,config_hash,seed,point_seed\n";
  for (const auto& r : rows)
    out << fmt(r.length) << ',' << rx::to_string(r.compensation) << ',' << fmt(r.power_dbm) << ','
        << fmt(r.snr_db) << ',' << fmt(r.mi_bits) << ',' << fmt(r.std_error, 4) << ','
        << fmt(r.xpm_phase) << ',' << fmt(r.evm_db, 6) << ',' << config::hex64(config_hash) << ','
        << seed << ',' << r.seed << '\n';
}

// ---------------------------------------------------------------------------

WaterfallConfig WaterfallConfig::from(const Config& cfg, Scale scale) {
  WaterfallConfig w;
  std::vector<std::string> names;
  for (const auto& d : staircase::system_designs()) names.push_back(d.name);
  names = cfg.get_string_list("waterfall.codes", names);
  const auto explicit_p = cfg.get_quantity_list("waterfall.p_in", Unit::None, {});
  for (const auto& p : explicit_p)
    if (!(p > 0 && p < 0.5)) throw ConfigError("waterfall.p_in values must lie in (0, 1/2)");
  for (const auto& name : names) {
    const auto& d = design_named(name);
    WaterfallCurve curve{name, explicit_p};
    if (curve.p_in.empty()) {
      for (double f : {0.8, 0.9, 1.0, 1.1}) curve.p_in.push_back(d.p_avg * f);
      if (d.g709) curve.p_in.push_back(4.8e-3);
      std::sort(curve.p_in.begin(), curve.p_in.end());
    }
    w.curves.push_back(curve);
  }
  const long long default_bits = scale == Scale::Paper ? 1'000'000'000LL : 20'000'000LL;
  w.options.min_bits = cfg.get_int("waterfall.bits", default_bits);
  if (w.options.min_bits < 1) throw ConfigError("waterfall.bits must be positive");
  w.options.target_errors = cfg.get_int("waterfall.target_errors", 100);
  if (w.options.target_errors < 0) throw ConfigError("waterfall.target_errors must be >= 0");
  w.options.zero_data = cfg.get_bool("waterfall.zero_data", false);
  w.options.threads = static_cast<int>(threads_from(cfg));
  w.options.streams = as_int(cfg, "waterfall.streams", w.options.threads, 1, 4096);
  w.window = as_int(cfg, "waterfall.window", 7, 1, 64);
  w.iterations = as_int(cfg, "waterfall.iterations", 8, 1, 1000);
  return w;
}

std::vector<WaterfallRow> run_ber_waterfall(const WaterfallConfig& config, std::uint64_t seed) {
  std::vector<WaterfallRow> rows;
  std::uint64_t index = 0;
  for (const auto& curve : config.curves) {
    const auto& d = design_named(curve.code);
    auto params = staircase::params_for(d);
    params.window = config.window;
    params.max_iterations = config.iterations;
    for (double p : curve.p_in) {
      WaterfallRow row;
      row.code = d.name;
      row.m = d.m;
      row.t = d.t;
      row.r = params.parity();
      row.point = staircase::simulate_bsc(params, p, derive_seed(seed, index++), config.options);
      row.point.seed = seed;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_waterfall_csv(std::ostream& out, const std::vector<WaterfallRow>& rows,
                         std::uint64_t config_hash, std::uint64_t seed) {
  schema_line(out, "waterfall");
  out << "code,m,t,r,p_in,ber_out,bit_errors,bits_simulated,blocks,config_hash,seed\n";
  for (const auto& r : rows)
    out << r.code << ',' << r.m << ',' << r.t << ',' << r.r << ',' << fmt(r.point.p_in) << ','
        << fmt(r.point.ber_out) << ',' << r.point.bit_errors << ',' << r.point.bits << ','
        << r.point.blocks << ',' << config::hex64(config_hash) << ',' << seed << '\n';
}

// ---------------------------------------------------------------------------

PragmaticConfig PragmaticConfig::from(const Config& cfg, Scale scale) {
  PragmaticConfig p;
  p.design = cfg.get_string("pragmatic.design", p.design);
  const auto& d = design_named(p.design);
  LinkSettings defaults;
  defaults.length = d.length_km * 1e3;
  defaults.compensation = rx::parse_compensation(d.compensation);
  defaults.step = 1e3;
  p.link = link_from(cfg, defaults, true);
  p.signal = signal_from(cfg, scale);
  p.power_dbm = cfg.get_quantity("pragmatic.power_dbm", Unit::None, d.launch_dbm);
  p.blocks = as_int(cfg, "pragmatic.blocks", scale == Scale::Paper ? 64 : 4, 1, 1 << 20);
  p.interleaver_seed = static_cast<std::uint64_t>(cfg.get_int("pragmatic.interleaver_seed", 1));
  p.traceback = as_int(cfg, "pragmatic.traceback", 32, 1, 4096);
  p.threads = threads_from(cfg);
  return p;
}

namespace {

// Random shaped traffic for a neighbouring channel or guard interval.
std::vector<cplx> random_shaped(const shaping::ShapedConstellation& c, const shaping::ShapingCodeSpec& spec,
                                std::size_t n, boost::random::mt19937_64& rng) {
  boost::random::uniform_int_distribution<std::uint32_t> coded(0, (1u << c.K()) - 1);
  std::vector<std::uint8_t> data(n);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = static_cast<std::uint8_t>(rng() & 1u);
    labels[i] = coded(rng);
  }
  return shaping::shape(spec, data, labels, c).symbols;
}

}  // namespace

PragmaticRow run_pragmatic_endtoend(const PragmaticConfig& config, std::uint64_t seed) {
  const auto& d = design_named(config.design);
  const auto params = staircase::params_for(d);
  const int K = d.K;
  const auto constellation = shaping::ShapedConstellation::build(K);
  shaping::ShapingCodeSpec spec;
  spec.traceback = config.traceback;
  const auto& sig = config.signal;
  const int payload = sig.slots - 2 * sig.guard;

  // Staircase-encode random data, then interleave each block.
  boost::random::mt19937_64 rng(derive_seed(seed, 1));
  const int total_blocks = config.blocks + params.window;
  staircase::StaircaseEncoder encoder(params);
  shaping::Interleaver interleaver(static_cast<std::size_t>(params.m) * params.m, config.interleaver_seed);
  std::vector<staircase::Block> sent;
  std::vector<std::uint8_t> stream;
  std::vector<std::uint8_t> info(static_cast<std::size_t>(params.info_bits_per_block()));
  for (int b = 0; b < total_blocks; ++b) {
    for (auto& bit : info) bit = static_cast<std::uint8_t>(rng() & 1u);
    sent.push_back(encoder.push(info));
    const auto mixed = interleaver.interleave(sent.back().bits());
    stream.insert(stream.end(), mixed.begin(), mixed.end());
  }
  const std::size_t coded_bits = stream.size();
  while (stream.size() % static_cast<std::size_t>(K) != 0) stream.push_back(0);
  const auto labels = shaping::bicm_map(stream, K);
  const std::size_t frames = (labels.size() + payload - 1) / payload;

  std::vector<std::uint32_t> detected(labels.size());
  std::vector<std::uint8_t> data_bits(labels.size()), data_recovered(labels.size());
  for (auto& bit : data_bits) bit = static_cast<std::uint8_t>(rng() & 1u);

  parallel_for(frames, config.threads, [&](std::size_t f) {
    std::vector<std::uint32_t> padded_labels(static_cast<std::size_t>(payload));
    std::vector<std::uint8_t> padded_data(static_cast<std::size_t>(payload));
    boost::random::mt19937_64 frame_rng(derive_seed(seed, 100 + f));
    const std::size_t begin = f * payload;
    const std::size_t count = std::min<std::size_t>(payload, labels.size() - begin);
    boost::random::uniform_int_distribution<std::uint32_t> coded(0, (1u << K) - 1);
    for (std::size_t i = 0; i < static_cast<std::size_t>(payload); ++i) {
      padded_labels[i] = i < count ? labels[begin + i] : coded(frame_rng);
      padded_data[i] = i < count ? data_bits[begin + i] : static_cast<std::uint8_t>(frame_rng() & 1u);
    }
    const auto shaped = shaping::shape(spec, padded_data, padded_labels, constellation);

    std::vector<std::vector<cplx>> channels(static_cast<std::size_t>(sig.channels));
    for (int l = 0; l < sig.channels; ++l) {
      auto& ch = channels[l];
      if (l == sig.channels / 2) {
        ch = random_shaped(constellation, spec, sig.guard, frame_rng);
        ch.insert(ch.end(), shaped.symbols.begin(), shaped.symbols.end());
        auto tail = random_shaped(constellation, spec, sig.guard, frame_rng);
        ch.insert(ch.end(), tail.begin(), tail.end());
      } else {
        ch = random_shaped(constellation, spec, sig.slots, frame_rng);
      }
    }
    auto frame = wdm::frame_from_channels(channels, sig.symbol_period);
    const double before = frame.mean_energy();
    frame = wdm::set_average_power(std::move(frame), wdm::dbm_to_watt(config.power_dbm));
    const double amplitude = std::sqrt(frame.mean_energy() / before);

    auto field = wdm::modulate(frame, wdm::GridSpec{sig.samples_per_symbol});
    fiber::PropagationPlan plan;
    plan.total_length = config.link.length;
    plan.step_size = config.link.step;
    plan.noise_enabled = config.link.noise;
    plan.noise_seed = derive_seed(seed, 10000 + f);
    if (config.link.length > 0) field = fiber::ssfm_propagate(std::move(field), config.link.fiber, plan);
    auto coi = rx::extract_channel(field, 0, sig.symbol_period);
    rx::RxConfig rxc;
    rxc.compensation = config.link.compensation;
    rxc.bp_step_size = config.link.bp_step;
    rxc.symmetric_bp = config.link.symmetric_bp;
    coi = rx::compensate(std::move(coi), rxc, config.link.fiber, config.link.length);
    auto received = rx::sample_symbols(coi, sig.symbol_period, sig.slots, sig.guard);

    std::vector<cplx> tx(shaped.symbols.size());
    for (std::size_t i = 0; i < tx.size(); ++i) tx[i] = shaped.symbols[i] * amplitude;
    const double phase = rx::estimate_xpm_phase(received, tx);
    const cplx w = std::polar(1.0 / amplitude, -phase);
    for (auto& y : received) y *= w;
    const auto hard = shaping::bicm_demap_hard(received, constellation);
    const auto s_hat = shaping::recover_shaping_bits(hard.quadrants);
    for (std::size_t i = 0; i < count; ++i) {
      detected[begin + i] = hard.coded[i];
      data_recovered[begin + i] = s_hat[i];
    }
  });

  PragmaticRow row;
  row.length = config.link.length;
  row.compensation = config.link.compensation;
  row.design = d.name;
  row.K = K;
  row.rate = params.rate();
  row.power_dbm = config.power_dbm;
  row.seed = seed;
  const auto lanes = shaping::lane_error_rates(labels, detected, K);
  row.lane_error = lanes.per_lane;
  row.p_avg = lanes.average;
  row.i_p = stats::pragmatic_rate(K, row.p_avg);
  row.se_achieved = K * row.rate + 1.0;
  std::size_t shaping_errors = 0;
  for (std::size_t i = 0; i < data_bits.size(); ++i) shaping_errors += data_bits[i] != data_recovered[i];
  row.shaping_bit_error = data_bits.empty() ? 0.0 : static_cast<double>(shaping_errors) / data_bits.size();

  // Hard bits back into blocks, then staircase decoding.
  auto rx_bits = shaping::bicm_unmap(detected, K);
  rx_bits.resize(coded_bits);
  const std::size_t block_bits = static_cast<std::size_t>(params.m) * params.m;
  std::vector<staircase::Block> received_blocks;
  for (int b = 0; b < total_blocks; ++b) {
    const auto bits = interleaver.deinterleave(std::span<const std::uint8_t>(rx_bits).subspan(b * block_bits, block_bits));
    staircase::Block blk(params.m);
    std::copy(bits.begin(), bits.end(), blk.bits().begin());
    received_blocks.push_back(std::move(blk));
  }
  const auto report = staircase::decode_stream(params, received_blocks);
  std::int64_t errors = 0;
  const int k = params.info_columns();
  for (int b = 0; b < config.blocks; ++b)
    for (int r = 0; r < params.m; ++r)
      for (int c = 0; c < k; ++c) errors += report.blocks[b].at(r, c) != sent[b].at(r, c);
  row.bits_post = static_cast<std::int64_t>(config.blocks) * params.info_bits_per_block();
  row.ber_post = static_cast<double>(errors) / static_cast<double>(row.bits_post);
  return row;
}

void write_pragmatic_csv(std::ostream& out, const std::vector<PragmaticRow>& rows,
                         std::uint64_t config_hash, std::uint64_t seed) {
  schema_line(out, "pragmatic");
  out << "L_m,comp,design,K,R,P_dBm,p_avg,I_P,se_achieved,ber_post,bits_post,shaping_bit_error,lane_error,config_hash,seed\n";
  for (const auto& r : rows) {
    std::string lanes;
    for (std::size_t i = 0; i < r.lane_error.size(); ++i) lanes += (i ? ";" : "") + fmt(r.lane_error[i], 6);
    out << fmt(r.length) << ',' << rx::to_string(r.compensation) << ',' << r.design << ',' << r.K << ','
        << fmt(r.rate) << ',' << fmt(r.power_dbm) << ',' << fmt(r.p_avg) << ',' << fmt(r.i_p) << ','
        << fmt(r.se_achieved) << ',' << fmt(r.ber_post) << ',' << r.bits_post << ','
        << fmt(r.shaping_bit_error) << ',' << lanes << ',' << config::hex64(config_hash) << ',' << seed
        << '\n';
  }
}

// ---------------------------------------------------------------------------

ShapeDemoConfig ShapeDemoConfig::from(const Config& cfg, Scale scale) {
  ShapeDemoConfig s;
  s.symbols = scale == Scale::Paper ? 1000000 : 100000;
  std::vector<int> ks;
  for (double k : cfg.get_quantity_list("shaping.K", Unit::None, {6})) {
    if (k != std::floor(k) || k < 2 || k > 8 || static_cast<int>(k) % 2) throw ConfigError("shaping.K values must be 2, 4, 6 or 8");
    ks.push_back(static_cast<int>(k));
  }
  s.K = ks;
  s.symbols = static_cast<std::size_t>(as_int(cfg, "shaping.symbols", static_cast<long long>(s.symbols), 1, 1 << 28));
  s.traceback = as_int(cfg, "shaping.traceback", s.traceback, 1, 4096);
  return s;
}

ShapeDemoRow run_shape_demo(int K, std::size_t symbols, int traceback, std::uint64_t seed) {
  const auto c = shaping::ShapedConstellation::build(K);
  shaping::ShapingCodeSpec spec;
  spec.traceback = traceback;
  boost::random::mt19937_64 rng(seed);
  boost::random::uniform_int_distribution<std::uint32_t> coded(0, (1u << K) - 1);
  std::vector<std::uint8_t> data(symbols);
  std::vector<std::uint32_t> labels(symbols);
  for (std::size_t i = 0; i < symbols; ++i) {
    data[i] = static_cast<std::uint8_t>(rng() & 1u);
    labels[i] = coded(rng);
  }
  const auto shaped = shaping::shape(spec, data, labels, c);
  ShapeDemoRow row;
  row.K = K;
  row.traceback = traceback;
  row.symbols = symbols;
  row.seed = seed;
  double uniform = 0;
  for (std::size_t i = 0; i < symbols; ++i)
    for (int q = 0; q < 4; ++q) uniform += 0.25 * std::norm(c.point(labels[i], q));
  row.uniform_energy = uniform / static_cast<double>(symbols);
  row.shaped_energy = shaped.mean_energy;
  row.gain_db = 10.0 * std::log10(row.uniform_energy / row.shaped_energy);
  for (int q : shaped.quadrants) row.quadrant_share[q] += 1.0 / static_cast<double>(symbols);
  row.recovered = shaping::recover_shaping_bits(shaped.quadrants) == data;
  return row;
}

void write_shape_csv(std::ostream& out, const std::vector<ShapeDemoRow>& rows,
                     std::uint64_t config_hash, std::uint64_t seed) {
  schema_line(out, "shaping");
  out << "K,traceback,symbols,uniform_energy,shaped_energy,gain_dB,q00,q01,q10,q11,recovered,config_hash,seed\n";
  for (const auto& r : rows)
    out << r.K << ',' << r.traceback << ',' << r.symbols << ',' << fmt(r.uniform_energy) << ','
        << fmt(r.shaped_energy) << ',' << fmt(r.gain_db, 6) << ',' << fmt(r.quadrant_share[0], 6) << ','
        << fmt(r.quadrant_share[1], 6) << ',' << fmt(r.quadrant_share[2], 6) << ','
        << fmt(r.quadrant_share[3], 6) << ',' << (r.recovered ? 1 : 0) << ',' << config::hex64(config_hash)
        << ',' << seed << '\n';
}

}  // namespace fibercode::experiments
