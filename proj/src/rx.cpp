#include "fibercode/rx.hpp"

#include <cmath>
#include <stdexcept>

namespace fibercode::rx {

using fiber::OpticalField;

std::string to_string(Compensation c) { return c == Compensation::BP ? "BP" : "EQ"; }

Compensation parse_compensation(const std::string& text) {
  if (text == "BP" || text == "bp") return Compensation::BP;
  if (text == "EQ" || text == "eq") return Compensation::EQ;
  throw std::invalid_argument("unknown compensation '" + text + "' (expected BP or EQ)");
}

void RxConfig::validate() const {
  if (compensation == Compensation::BP && !(bp_step_size > 0.0))
    throw std::invalid_argument("bp_step_size must be > 0 for backpropagation");
}

namespace {

// Samples per symbol of the grid, which must be an integer dividing the
// field length.
long long samples_per_symbol(const OpticalField& field, double symbol_period) {
  const double os = field.sample_rate() * symbol_period;
  const auto rounded = std::llround(os);
  if (rounded < 1 || std::abs(os - static_cast<double>(rounded)) > 1e-6 * os)
    throw std::invalid_argument("oversampling factor f_s * T_s is not an integer");
  if (static_cast<long long>(field.size()) % rounded != 0)
    throw std::invalid_argument("field length is not a whole number of symbol slots");
  return rounded;
}

void check_finite(const OpticalField& field) {
  if (!field.all_finite()) throw fiber::NumericalBlowup("non-finite samples in received field");
}

}  // namespace

OpticalField extract_channel(const OpticalField& field, int coi_index,
                             double symbol_period) {
  const long long n = static_cast<long long>(field.size());
  const long long slots = n / samples_per_symbol(field, symbol_period);
  const long long centre = coi_index * slots;
  if (std::llabs(centre) + slots / 2 > n / 2)
    throw std::out_of_range("channel index " + std::to_string(coi_index) +
                            " lies outside the simulated bandwidth");

  std::vector<cplx> spectrum(field.samples().begin(), field.samples().end());
  fft_forward(spectrum);
  std::vector<cplx> out(spectrum.size(), cplx(0.0, 0.0));
  for (long long q = -slots / 2; q < slots - slots / 2; ++q) {
    const long long src = ((centre + q) % n + n) % n;
    const long long dst = (q % n + n) % n;
    out[dst] = spectrum[src];
  }
  fft_inverse(out);
  return OpticalField(std::move(out), field.sample_rate(),
                      field.center_freq_offset() + coi_index / symbol_period);
}

OpticalField backpropagate(OpticalField field, const fiber::FiberParams& params,
                           double length, double step, bool symmetric) {
  if (!(step > 0.0)) throw std::invalid_argument("backpropagation step must be > 0");
  check_finite(field);
  if (length == 0.0) return field;
  // With no nonlinearity every inverse split step commutes; collapse to one.
  if (params.gamma == 0.0) return linear_equalize(std::move(field), params.beta2, length);

  const auto segments = fiber::segment_lengths(length, step);
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    const double h = *it;
    if (symmetric) {
      field = fiber::linear_step(std::move(field), params.beta2, 0.0, -0.5 * h);
      field = fiber::nonlinear_step(std::move(field), params.gamma, -h);
      field = fiber::linear_step(std::move(field), params.beta2, 0.0, -0.5 * h);
    } else {
      field = fiber::linear_step(std::move(field), params.beta2, 0.0, -h);
      field = fiber::nonlinear_step(std::move(field), params.gamma, -h);
    }
  }
  check_finite(field);
  return field;
}

OpticalField linear_equalize(OpticalField field, double beta2, double length) {
  return fiber::linear_step(std::move(field), beta2, 0.0, -length);
}

OpticalField compensate(OpticalField field, const RxConfig& config,
                        const fiber::FiberParams& params, double length) {
  config.validate();
  if (config.compensation == Compensation::EQ)
    return linear_equalize(std::move(field), params.beta2, length);
  return backpropagate(std::move(field), params, length, config.bp_step_size,
                       config.symmetric_bp);
}

std::vector<cplx> sample_symbols(const OpticalField& field, double symbol_period,
                                 int num_slots, int guard_slots) {
  const long long os = samples_per_symbol(field, symbol_period);
  if (static_cast<long long>(field.size()) != os * num_slots)
    throw std::invalid_argument("field does not span num_slots symbol periods");
  if (guard_slots < 0 || 2 * guard_slots >= num_slots)
    throw std::invalid_argument("guard slots leave no payload");

  // Baseband brick-wall: same mask as extracting channel 0.
  OpticalField filtered = extract_channel(field, 0, symbol_period);
  const double scale = std::sqrt(symbol_period);
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(num_slots - 2 * guard_slots));
  for (int k = guard_slots; k < num_slots - guard_slots; ++k)
    out.push_back(filtered.samples()[static_cast<std::size_t>(k * os)] * scale);
  return out;
}

std::vector<cplx> back_rotate(std::span<const cplx> received,
                              std::span<const cplx> transmitted, double xpm_phase) {
  if (received.size() != transmitted.size())
    throw std::invalid_argument("received and transmitted sequences differ in length");
  std::vector<cplx> out(received.size());
  for (std::size_t i = 0; i < received.size(); ++i)
    out[i] = received[i] * std::polar(1.0, -(xpm_phase + std::arg(transmitted[i])));
  return out;
}

double estimate_xpm_phase(std::span<const cplx> received,
                          std::span<const cplx> transmitted) {
  if (received.size() != transmitted.size())
    throw std::invalid_argument("received and transmitted sequences differ in length");
  if (received.empty()) return 0.0;
  cplx corr(0.0, 0.0);
  for (std::size_t i = 0; i < received.size(); ++i)
    corr += received[i] * std::conj(transmitted[i]);
  const double coarse = std::arg(corr);
  const cplx derotate = std::polar(1.0, -coarse);
  double sum = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i)
    sum += std::arg(received[i] * std::conj(transmitted[i]) * derotate);
  return coarse + sum / static_cast<double>(received.size());
}

double evm_db(std::span<const cplx> received, std::span<const cplx> transmitted) {
  if (received.size() != transmitted.size())
    throw std::invalid_argument("received and transmitted sequences differ in length");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) {
    err += std::norm(received[i] - transmitted[i]);
    ref += std::norm(transmitted[i]);
  }
  return 10.0 * std::log10(err / ref);
}

}  // namespace fibercode::rx
