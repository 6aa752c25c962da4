#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "fibercode/fft.hpp"

namespace fibercode::fiber {

inline constexpr double kPlanck = 6.62607015e-34;  // J s
inline constexpr double kPi = 3.14159265358979323846;

// Physical constants of a standard single-mode span with ideal distributed
// Raman amplification. All quantities SI.
struct FiberParams {
  double beta2 = -21.668e-27;  // s^2/m
  double alpha = 4.605e-5;     // 1/m
  double gamma = 1.27e-3;      // 1/(W m)
  double nu_s = 193.41e12;     // Hz
  double k_t = 1.13;           // phonon occupancy factor

  void validate() const;
};

// N_ASE = L alpha h nu_s K_T, in W/Hz.
double ase_psd(const FiberParams& params, double length);

class NumericalBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniformly sampled complex envelope, |a|^2 in W. The sample count is a
// power of two so the whole field lives on one FFT grid with periodic time.
class OpticalField {
 public:
  OpticalField(std::vector<cplx> samples, double sample_rate,
               double center_freq_offset = 0.0);

  std::span<cplx> samples() { return samples_; }
  std::span<const cplx> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double sample_rate() const { return sample_rate_; }
  double dt() const { return 1.0 / sample_rate_; }
  double duration() const { return static_cast<double>(size()) / sample_rate_; }
  // Offset of baseband 0 Hz from the carrier nu_s.
  double center_freq_offset() const { return center_freq_offset_; }
  void set_center_freq_offset(double hz) { center_freq_offset_ = hz; }

  // Integral of |A|^2 dt over the period (J).
  double energy() const;
  double mean_power() const;
  bool all_finite() const;

  // Physical angular frequency (relative to nu_s) of every FFT bin.
  std::vector<double> angular_frequencies() const;

 private:
  std::vector<cplx> samples_;
  double sample_rate_;
  double center_freq_offset_;
};

struct PropagationPlan {
  double total_length = 0.0;  // m
  double step_size = 100.0;   // m
  bool noise_enabled = false;
  std::uint64_t noise_seed = 0;
  // Loss is exactly balanced by distributed gain; alpha then only sets the
  // noise level.
  bool ideal_raman = true;
  // L(h/2) N(h) L(h/2) instead of N(h) L(h).
  bool symmetric = false;
};

// Per-propagation noise generator (owns its RNG state).
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}
  double gaussian() { return normal_(engine_); }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

// a -> a exp(j gamma |a|^2 h)
OpticalField nonlinear_step(OpticalField field, double gamma, double h);

// Spectrum times exp((j beta2 w^2 / 2 - alpha / 2) h).
OpticalField linear_step(OpticalField field, double beta2, double alpha, double h);

// Adds circular complex Gaussian noise with per-sample variance
// alpha h_P nu_s K_T h f_s.
OpticalField inject_ase(OpticalField field, const FiberParams& params, double h,
                        NoiseSource& noise);

// Lengths of the successive split-step segments; the last one is shortened
// so the sum lands exactly on total_length.
std::vector<double> segment_lengths(double total_length, double step_size);

OpticalField ssfm_propagate(OpticalField field, const FiberParams& params,
                            const PropagationPlan& plan);

// Snapshot format: one text header line
//   "fibercode-field v1 sample_rate=<Hz> length=<N> center_freq_offset=<Hz>\n"
// followed by N little-endian (re, im) float64 pairs.
void write_field(std::ostream& out, const OpticalField& field);
OpticalField read_field(std::istream& in);

}  // namespace fibercode::fiber
