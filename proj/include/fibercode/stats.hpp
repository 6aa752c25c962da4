#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fibercode/fft.hpp"

namespace fibercode::stats {

// Symmetric 2x2 covariance of (re, im).
struct Cov2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }
  bool positive_semidefinite() const { return xx >= 0.0 && yy >= 0.0 && det() >= -1e-12 * trace() * trace(); }
};

struct RingFit {
  int ring = 0;  // 1-based
  double radius = 0.0;
  cplx mean;
  Cov2 cov;
  std::size_t count = 0;
};

// Per-ring Gaussian model of back-rotated receiver outputs:
//   f(y | ring i, phase phi) = N(mu_i e^{j phi}, R(phi) Omega_i R(phi)^T)
struct RingGaussianModel {
  std::vector<RingFit> rings;

  // Every ring carries at least min_count samples.
  bool valid(std::size_t min_count = 100) const;
};

// Sample mean and unbiased sample covariance per transmitted ring.
// ring_index is 1-based; radii[i-1] is the radius of ring i.
RingGaussianModel fit_model(std::span<const cplx> back_rotated,
                            std::span<const int> ring_index,
                            std::span<const double> radii);

// Covariance used for density evaluation: diagonals raised by
// 1e-15 (trace + |mu|^2) so noiseless fits stay invertible.
Cov2 regularized(const RingFit& fit);

double conditional_density(const RingGaussianModel& model, cplx y, int ring,
                           double phase);

struct MiEstimate {
  double bits = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo I(X;Y) with X uniform over rings x phase_levels phases, Y drawn
// from the model, and f(y) summed exactly over all ring/phase hypotheses.
MiEstimate mutual_information(const RingGaussianModel& model, int phase_levels,
                              std::size_t mc_samples, std::uint64_t seed,
                              unsigned threads = 1);

struct SnrSpec {
  double launch_power = 0.0;    // W
  double noise_psd = 0.0;       // W/Hz
  double bandwidth = 101e9;     // Hz
};

// 10 log10(P / (N_ASE W))
double snr_db(const SnrSpec& spec);

// H2(p) in bits; H2(0) = H2(1) = 0.
double binary_entropy(double p);

// I_P = 1 + K (1 - H2(p_avg))
double pragmatic_rate(int coded_bits, double p_avg);

// Labeled discrete constellation: labels[i] is the M-bit label of points[i];
// bit j of a label (LSB first) is b_{j+1}.
struct LabeledConstellation {
  std::vector<cplx> points;
  std::vector<std::uint32_t> labels;
  int bits = 0;

  void validate() const;
};

struct BitCapacities {
  std::vector<double> per_bit;      // I(b_i; Y)
  double c_pid = 0.0;               // sum of per_bit
  std::vector<double> chain_terms;  // I(b_i; Y | b_1..b_{i-1})
  double mutual_information = 0.0;  // I(X; Y) = sum of chain terms
  double std_error = 0.0;           // Monte-Carlo standard error of I(X;Y); 0 if exact
};

// Exact computation for a discrete memoryless channel with uniform input;
// transition[x][y] = P(y | point x).
BitCapacities pid_capacities_discrete(std::span<const std::uint32_t> labels, int bits,
                                      const std::vector<std::vector<double>>& transition);

// Monte-Carlo over circular AWGN of total variance noise_variance.
BitCapacities pid_capacities_awgn(const LabeledConstellation& constellation,
                                  double noise_variance, std::size_t mc_samples,
                                  std::uint64_t seed);

// Empirical transition matrix from (transmitted label, detected label) pairs.
BitCapacities pid_capacities_empirical(std::span<const std::uint32_t> tx_labels,
                                       std::span<const std::uint32_t> rx_labels, int bits);

// CSV: ring,radius,mu_re,mu_im,omega_xx,omega_xy,omega_yy,count
void write_model_csv(std::ostream& out, const RingGaussianModel& model);
RingGaussianModel read_model_csv(std::istream& in);

}  // namespace fibercode::stats
