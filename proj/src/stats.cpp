#include "fibercode/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fibercode/parallel.hpp"

namespace fibercode::stats {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kLog2e = 1.44269504088896340736;

// Precomputed quadratic form of one ring's Gaussian.
struct GaussianTerm {
  double mx, my;
  double a, b, c;  // inverse covariance entries
  double log_norm;
  double l11, l21, l22;  // Cholesky factor for sampling

  double log_density(double x, double y) const {
    const double dx = x - mx, dy = y - my;
    return log_norm - 0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy);
  }
};

GaussianTerm make_term(const RingFit& fit) {
  if (!fit.cov.positive_semidefinite())
    throw std::invalid_argument("ring " + std::to_string(fit.ring) + " has a non-PSD covariance");
  const Cov2 cov = regularized(fit);
  const double det = cov.det();
  GaussianTerm t{};
  t.mx = fit.mean.real();
  t.my = fit.mean.imag();
  t.a = cov.yy / det;
  t.b = -cov.xy / det;
  t.c = cov.xx / det;
  t.log_norm = -std::log(kTwoPi * std::sqrt(det));
  t.l11 = std::sqrt(cov.xx);
  t.l21 = cov.xy / t.l11;
  t.l22 = std::sqrt(std::max(cov.yy - t.l21 * t.l21, 0.0));
  return t;
}

double log_sum_exp(std::span<const double> values) {
  const double peak = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

}  // namespace

bool RingGaussianModel::valid(std::size_t min_count) const {
  if (rings.empty()) return false;
  return std::all_of(rings.begin(), rings.end(),
                     [&](const RingFit& r) { return r.count >= min_count; });
}

RingGaussianModel fit_model(std::span<const cplx> back_rotated,
                            std::span<const int> ring_index,
                            std::span<const double> radii) {
  if (back_rotated.size() != ring_index.size())
    throw std::invalid_argument("symbols and ring labels differ in length");
  const std::size_t n_rings = radii.size();
  std::vector<double> sx(n_rings), sy(n_rings);
  std::vector<std::size_t> count(n_rings);
  for (std::size_t i = 0; i < back_rotated.size(); ++i) {
    const int r = ring_index[i];
    if (r < 1 || static_cast<std::size_t>(r) > n_rings)
      throw std::invalid_argument("ring index out of range");
    sx[r - 1] += back_rotated[i].real();
    sy[r - 1] += back_rotated[i].imag();
    ++count[r - 1];
  }
  RingGaussianModel model;
  model.rings.resize(n_rings);
  for (std::size_t r = 0; r < n_rings; ++r) {
    if (count[r] < 2)
      throw std::invalid_argument("ring " + std::to_string(r + 1) + " has fewer than 2 samples");
    auto& fit = model.rings[r];
    fit.ring = static_cast<int>(r + 1);
    fit.radius = radii[r];
    fit.count = count[r];
    fit.mean = cplx(sx[r] / count[r], sy[r] / count[r]);
  }
  // Second pass for a numerically stable centred covariance.
  for (std::size_t i = 0; i < back_rotated.size(); ++i) {
    auto& fit = model.rings[ring_index[i] - 1];
    const double dx = back_rotated[i].real() - fit.mean.real();
    const double dy = back_rotated[i].imag() - fit.mean.imag();
    fit.cov.xx += dx * dx;
    fit.cov.xy += dx * dy;
    fit.cov.yy += dy * dy;
  }
  for (auto& fit : model.rings) {
    const double denom = static_cast<double>(fit.count - 1);
    fit.cov.xx /= denom;
    fit.cov.xy /= denom;
    fit.cov.yy /= denom;
  }
  return model;
}

Cov2 regularized(const RingFit& fit) {
  const double floor = 1e-15 * (fit.cov.trace() + std::norm(fit.mean)) +
                       std::numeric_limits<double>::min();
  Cov2 cov = fit.cov;
  cov.xx += floor;
  cov.yy += floor;
  return cov;
}

double conditional_density(const RingGaussianModel& model, cplx y, int ring,
                           double phase) {
  if (ring < 1 || static_cast<std::size_t>(ring) > model.rings.size())
    throw std::invalid_argument("ring not in model");
  const auto term = make_term(model.rings[ring - 1]);
  const cplx u = y * std::polar(1.0, -phase);
  return std::exp(term.log_density(u.real(), u.imag()));
}

MiEstimate mutual_information(const RingGaussianModel& model, int phase_levels,
                              std::size_t mc_samples, std::uint64_t seed,
                              unsigned threads) {
  if (model.rings.empty()) throw std::invalid_argument("empty model");
  if (phase_levels < 1) throw std::invalid_argument("phase_levels must be >= 1");
  if (mc_samples < 2) throw std::invalid_argument("need at least two Monte-Carlo samples");

  std::vector<GaussianTerm> terms;
  terms.reserve(model.rings.size());
  for (const auto& fit : model.rings) terms.push_back(make_term(fit));
  const int n_rings = static_cast<int>(terms.size());

  std::vector<cplx> rotation(static_cast<std::size_t>(phase_levels));
  for (int p = 0; p < phase_levels; ++p)
    rotation[p] = std::polar(1.0, kTwoPi * p / phase_levels);
  const double log_hypotheses = std::log(static_cast<double>(n_rings) * phase_levels);

  // Fixed-size chunks with their own seeds keep results independent of the
  // worker count.
  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (mc_samples + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks), squares(chunks);
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (chunk + 1));
    std::uniform_int_distribution<int> ring_dist(0, n_rings - 1);
    std::uniform_int_distribution<int> phase_dist(0, phase_levels - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> logs(static_cast<std::size_t>(n_rings) * phase_levels);
    const std::size_t begin = chunk * kChunk;
    const std::size_t end = std::min(mc_samples, begin + kChunk);
    double sum = 0.0, sq = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      const int i = ring_dist(rng);
      const int p = phase_dist(rng);
      const double z1 = normal(rng), z2 = normal(rng);
      const auto& t = terms[i];
      const cplx u(t.mx + t.l11 * z1, t.my + t.l21 * z1 + t.l22 * z2);
      const cplx y = u * rotation[p];
      const double log_cond = t.log_density(u.real(), u.imag());
      std::size_t idx = 0;
      for (int q = 0; q < phase_levels; ++q) {
        const cplx v = y * std::conj(rotation[q]);
        for (int j = 0; j < n_rings; ++j) logs[idx++] = terms[j].log_density(v.real(), v.imag());
      }
      const double log_marginal = log_sum_exp(logs) - log_hypotheses;
      const double bits = (log_cond - log_marginal) * kLog2e;
      sum += bits;
      sq += bits * bits;
    }
    sums[chunk] = sum;
    squares[chunk] = sq;
  });

  double sum = 0.0, sq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sq += squares[c];
  }
  const double n = static_cast<double>(mc_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), mc_samples};
}

double snr_db(const SnrSpec& spec) {
  if (!(spec.launch_power > 0.0) || !(spec.noise_psd > 0.0) || !(spec.bandwidth > 0.0))
    throw std::invalid_argument("SNR inputs must be positive");
  return 10.0 * std::log10(spec.launch_power / (spec.noise_psd * spec.bandwidth));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double pragmatic_rate(int coded_bits, double p_avg) {
  if (coded_bits < 1) throw std::invalid_argument("K must be >= 1");
  if (!(p_avg >= 0.0 && p_avg <= 0.5)) throw std::invalid_argument("p_avg must lie in [0, 1/2]");
  return 1.0 + coded_bits * (1.0 - binary_entropy(p_avg));
}

void LabeledConstellation::validate() const {
  if (bits < 1 || bits > 16 || labels.empty())
    throw std::invalid_argument("constellation is not labeled");
  const std::size_t m = std::size_t{1} << bits;
  if (points.size() != m || labels.size() != m)
    throw std::invalid_argument("labeling must cover all 2^bits points");
  std::vector<bool> seen(m);
  for (auto l : labels) {
    if (l >= m || seen[l]) throw std::invalid_argument("labels must be a bijection onto 2^bits");
    seen[l] = true;
  }
}

namespace {

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

// H(Y | the label bits selected by mask), uniform input.
double conditional_entropy(std::span<const std::uint32_t> labels,
                           const std::vector<std::vector<double>>& transition,
                           std::uint32_t mask) {
  const std::size_t m = labels.size();
  const std::size_t ny = transition.front().size();
  // Group points by the masked label value.
  std::vector<std::uint32_t> keys;
  for (auto l : labels) keys.push_back(l & mask);
  std::vector<std::uint32_t> distinct = keys;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  double h = 0.0;
  std::vector<double> py(ny);
  for (auto key : distinct) {
    std::fill(py.begin(), py.end(), 0.0);
    std::size_t members = 0;
    for (std::size_t x = 0; x < m; ++x) {
      if (keys[x] != key) continue;
      ++members;
      for (std::size_t y = 0; y < ny; ++y) py[y] += transition[x][y];
    }
    for (auto& v : py) v /= static_cast<double>(members);
    h += static_cast<double>(members) / static_cast<double>(m) * entropy_bits(py);
  }
  return h;
}

}  // namespace

BitCapacities pid_capacities_discrete(std::span<const std::uint32_t> labels, int bits,
                                      const std::vector<std::vector<double>>& transition) {
  LabeledConstellation check;
  check.bits = bits;
  check.labels.assign(labels.begin(), labels.end());
  check.points.resize(labels.size());
  check.validate();
  if (transition.size() != labels.size() || transition.front().empty())
    throw std::invalid_argument("transition matrix must have one row per point");

  const double h_y = conditional_entropy(labels, transition, 0u);
  BitCapacities out;
  double previous = 0.0;
  for (int i = 0; i < bits; ++i) {
    const double marginal = h_y - conditional_entropy(labels, transition, 1u << i);
    out.per_bit.push_back(marginal);
    out.c_pid += marginal;
    const std::uint32_t prefix = (i + 1 == 32) ? ~0u : ((1u << (i + 1)) - 1u);
    const double joint = h_y - conditional_entropy(labels, transition, prefix);
    out.chain_terms.push_back(joint - previous);
    previous = joint;
  }
  out.mutual_information = previous;
  return out;
}

BitCapacities pid_capacities_awgn(const LabeledConstellation& constellation,
                                  double noise_variance, std::size_t mc_samples,
                                  std::uint64_t seed) {
  constellation.validate();
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  const int bits = constellation.bits;
  const std::size_t m = constellation.points.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * noise_variance));

  std::vector<double> per_bit(bits), chain(bits);
  double total = 0.0, total_sq = 0.0;
  std::vector<double> w(m);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    const std::size_t x = pick(rng);
    const cplx y = constellation.points[x] + cplx(normal(rng), normal(rng));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      w[j] = std::norm(y - constellation.points[j]) / noise_variance;
      best = std::min(best, w[j]);
    }
    double all = 0.0;
    for (auto& v : w) {
      v = std::exp(best - v);
      all += v;
    }
    const std::uint32_t label = constellation.labels[x];
    double prev_sum = all;
    for (int i = 0; i < bits; ++i) {
      const std::uint32_t bit = 1u << i;
      const std::uint32_t prefix = (bit << 1) - 1u;
      double match_bit = 0.0, match_prefix = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const auto lj = constellation.labels[j];
        if ((lj & bit) == (label & bit)) match_bit += w[j];
        if ((lj & prefix) == (label & prefix)) match_prefix += w[j];
      }
      per_bit[i] += std::log2(2.0 * match_bit / all);
      chain[i] += std::log2(2.0 * match_prefix / prev_sum);
      prev_sum = match_prefix;
    }
    const double sample = std::log2(static_cast<double>(m) * w[x] / all);
    total += sample;
    total_sq += sample * sample;
  }
  const double n = static_cast<double>(mc_samples);
  BitCapacities out;
  for (int i = 0; i < bits; ++i) {
    out.per_bit.push_back(per_bit[i] / n);
    out.chain_terms.push_back(chain[i] / n);
    out.c_pid += per_bit[i] / n;
  }
  out.mutual_information = total / n;
  out.std_error = std::sqrt(std::max(0.0, total_sq / n - out.mutual_information * out.mutual_information) / n);
  return out;
}

BitCapacities pid_capacities_empirical(std::span<const std::uint32_t> tx_labels,
                                       std::span<const std::uint32_t> rx_labels, int bits) {
  if (tx_labels.size() != rx_labels.size() || tx_labels.empty())
    throw std::invalid_argument("need equal-length, non-empty label sequences");
  if (bits < 1 || bits > 16) throw std::invalid_argument("constellation is not labeled");
  const std::size_t m = std::size_t{1} << bits;
  std::vector<std::vector<double>> transition(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < tx_labels.size(); ++i) {
    if (tx_labels[i] >= m || rx_labels[i] >= m) throw std::invalid_argument("label out of range");
    transition[tx_labels[i]][rx_labels[i]] += 1.0;
  }
  for (auto& row : transition) {
    double total = 0.0;
    for (double v : row) total += v;
    if (total == 0.0) throw std::invalid_argument("some transmitted label never observed");
    for (auto& v : row) v /= total;
  }
  std::vector<std::uint32_t> labels(m);
  for (std::size_t i = 0; i < m; ++i) labels[i] = static_cast<std::uint32_t>(i);
  return pid_capacities_discrete(labels, bits, transition);
}

void write_model_csv(std::ostream& out, const RingGaussianModel& model) {
  out << "ring,radius,mu_re,mu_im,omega_xx,omega_xy,omega_yy,count\n";
  out.precision(17);
  for (const auto& r : model.rings)
    out << r.ring << ',' << r.radius << ',' << r.mean.real() << ',' << r.mean.imag() << ','
        << r.cov.xx << ',' << r.cov.xy << ',' << r.cov.yy << ',' << r.count << '\n';
}

RingGaussianModel read_model_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ring,radius", 0) != 0)
    throw std::runtime_error("model CSV must start with its header");
  RingGaussianModel model;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f[8];
    for (auto& s : f)
      if (!std::getline(row, s, ',')) throw std::runtime_error("bad model row: " + line);
    RingFit fit;
    fit.ring = std::stoi(f[0]);
    fit.radius = std::stod(f[1]);
    fit.mean = cplx(std::stod(f[2]), std::stod(f[3]));
    fit.cov = {std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
    fit.count = std::stoul(f[7]);
    model.rings.push_back(fit);
  }
  return model;
}

}  // namespace fibercode::stats
