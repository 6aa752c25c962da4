#include "fibercode/fiber.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace fibercode::fiber {

void FiberParams::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(nu_s > 0.0)) throw std::invalid_argument("nu_s must be > 0");
  if (!(k_t >= 1.0)) throw std::invalid_argument("K_T must be >= 1");
  if (!std::isfinite(beta2)) throw std::invalid_argument("beta2 must be finite");
}

double ase_psd(const FiberParams& params, double length) {
  return length * params.alpha * kPlanck * params.nu_s * params.k_t;
}

OpticalField::OpticalField(std::vector<cplx> samples, double sample_rate,
                           double center_freq_offset)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      center_freq_offset_(center_freq_offset) {
  if (samples_.size() < 2 || !std::has_single_bit(samples_.size()))
    throw std::invalid_argument("field length must be a power of two >= 2");
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw std::invalid_argument("sample rate must be positive");
}

double OpticalField::energy() const {
  double sum = 0.0;
  for (const auto& v : samples_) sum += std::norm(v);
  return sum * dt();
}

double OpticalField::mean_power() const { return energy() / duration(); }

bool OpticalField::all_finite() const {
  for (const auto& v : samples_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

std::vector<double> OpticalField::angular_frequencies() const {
  const std::size_t n = size();
  const double df = sample_rate_ / static_cast<double>(n);
  std::vector<double> omega(n);
  for (std::size_t q = 0; q < n; ++q) {
    const double bin = q < n / 2 ? static_cast<double>(q)
                                 : static_cast<double>(q) - static_cast<double>(n);
    omega[q] = 2.0 * kPi * (bin * df + center_freq_offset_);
  }
  return omega;
}

namespace {

std::vector<cplx> transfer_function(const std::vector<double>& omega,
                                    double beta2, double alpha, double h) {
  std::vector<cplx> tf(omega.size());
  const double gain = std::exp(-0.5 * alpha * h);
  for (std::size_t q = 0; q < omega.size(); ++q)
    tf[q] = std::polar(gain, 0.5 * beta2 * omega[q] * omega[q] * h);
  return tf;
}

void apply_transfer(std::span<cplx> samples, const std::vector<cplx>& tf) {
  fft_forward(samples);
  for (std::size_t q = 0; q < samples.size(); ++q) samples[q] *= tf[q];
  fft_inverse(samples);
}

void apply_nonlinear(std::span<cplx> samples, double gamma, double h) {
  if (gamma == 0.0 || h == 0.0) return;
  const double k = gamma * h;
  for (auto& a : samples) a *= std::polar(1.0, k * std::norm(a));
}

void add_noise(std::span<cplx> samples, double variance, NoiseSource& noise) {
  if (variance <= 0.0) return;
  const double sigma = std::sqrt(0.5 * variance);
  for (auto& a : samples) {
    const double re = noise.gaussian();
    const double im = noise.gaussian();
    a += cplx(sigma * re, sigma * im);
  }
}

double noise_variance(const FiberParams& params, double h, double sample_rate) {
  return params.alpha * kPlanck * params.nu_s * params.k_t * h * sample_rate;
}

}  // namespace

OpticalField nonlinear_step(OpticalField field, double gamma, double h) {
  apply_nonlinear(field.samples(), gamma, h);
  return field;
}

OpticalField linear_step(OpticalField field, double beta2, double alpha, double h) {
  if (h == 0.0 || (beta2 == 0.0 && alpha == 0.0)) return field;
  const auto tf = transfer_function(field.angular_frequencies(), beta2, alpha, h);
  apply_transfer(field.samples(), tf);
  return field;
}

OpticalField inject_ase(OpticalField field, const FiberParams& params, double h,
                        NoiseSource& noise) {
  if (h <= 0.0) return field;
  add_noise(field.samples(), noise_variance(params, h, field.sample_rate()), noise);
  return field;
}

std::vector<double> segment_lengths(double total_length, double step_size) {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be > 0");
  if (!(total_length >= 0.0)) throw std::invalid_argument("length must be >= 0");
  std::vector<double> segments;
  const double ratio = total_length / step_size;
  auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  segments.assign(full, step_size);
  const double rest = total_length - static_cast<double>(full) * step_size;
  if (rest > 1e-9 * step_size) segments.push_back(rest);
  return segments;
}

OpticalField ssfm_propagate(OpticalField field, const FiberParams& params,
                            const PropagationPlan& plan) {
  params.validate();
  const auto segments = segment_lengths(plan.total_length, plan.step_size);
  if (segments.empty()) return field;

  const double alpha_lin = plan.ideal_raman ? 0.0 : params.alpha;
  const auto omega = field.angular_frequencies();
  const bool linear_active = params.beta2 != 0.0 || alpha_lin != 0.0;

  // At most two distinct segment lengths: the regular step and the tail.
  double cached_h = -1.0;
  std::vector<cplx> tf;
  auto transfer_for = [&](double h) -> const std::vector<cplx>& {
    if (h != cached_h) {
      tf = transfer_function(omega, params.beta2, alpha_lin,
                             plan.symmetric ? 0.5 * h : h);
      cached_h = h;
    }
    return tf;
  };

  NoiseSource noise(plan.noise_seed);
  auto samples = field.samples();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double h = segments[i];
    if (plan.symmetric) {
      if (linear_active) apply_transfer(samples, transfer_for(h));
      apply_nonlinear(samples, params.gamma, h);
      if (linear_active) apply_transfer(samples, transfer_for(h));
    } else {
      apply_nonlinear(samples, params.gamma, h);
      if (linear_active) apply_transfer(samples, transfer_for(h));
    }
    if (plan.noise_enabled)
      add_noise(samples, noise_variance(params, h, field.sample_rate()), noise);
    if ((i % 64 == 63 || i + 1 == segments.size()) && !field.all_finite()) {
      std::ostringstream msg;
      msg << "non-finite field after " << (i + 1) << " of " << segments.size()
          << " steps (step " << plan.step_size << " m)";
      throw NumericalBlowup(msg.str());
    }
  }
  return field;
}

namespace {

void put_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double get_f64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("truncated field snapshot");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(std::ostream& out, const OpticalField& field) {
  std::ostringstream header;
  header.precision(17);
  header << "fibercode-field v1 sample_rate=" << field.sample_rate()
         << " length=" << field.size()
         << " center_freq_offset=" << field.center_freq_offset() << "\n";
  out << header.str();
  for (const auto& v : field.samples()) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
  }
}

OpticalField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing field header");
  std::istringstream header(line);
  std::string magic, version;
  header >> magic >> version;
  if (magic != "fibercode-field" || version != "v1")
    throw std::runtime_error("not a field snapshot: " + magic);
  double sample_rate = 0.0, offset = 0.0;
  std::size_t length = 0;
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad header token " + token);
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "sample_rate") sample_rate = std::stod(value);
    else if (key == "length") length = std::stoul(value);
    else if (key == "center_freq_offset") offset = std::stod(value);
  }
  std::vector<cplx> samples(length);
  for (auto& v : samples) {
    const double re = get_f64(in);
    const double im = get_f64(in);
    v = cplx(re, im);
  }
  return OpticalField(std::move(samples), sample_rate, offset);
}

}  // namespace fibercode::fiber
