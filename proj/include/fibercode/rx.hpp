#pragma once

#include <span>
#include <string>
#include <vector>

#include "fibercode/fiber.hpp"

namespace fibercode::rx {

enum class Compensation { BP, EQ };

std::string to_string(Compensation c);
Compensation parse_compensation(const std::string& text);

struct RxConfig {
  Compensation compensation = Compensation::BP;
  double bp_step_size = 1000.0;  // m
  int coi_index = 0;
  double xpm_phase = 0.0;  // rad
  bool symmetric_bp = false;

  void validate() const;
};

// Ideal band-pass around channel coi_index (width 1/T_s), shifted to 0 Hz.
fiber::OpticalField extract_channel(const fiber::OpticalField& field, int coi_index,
                                    double symbol_period);

// Split-step inversion with negative steps: per segment, in reverse order,
// the inverse linear step then the inverse nonlinear step. Noise is never
// injected; the loss term is omitted as in forward ideal-Raman propagation.
fiber::OpticalField backpropagate(fiber::OpticalField field,
                                  const fiber::FiberParams& params, double length,
                                  double step, bool symmetric = false);

// Spectrum times exp(-j beta2 w^2 length / 2).
fiber::OpticalField linear_equalize(fiber::OpticalField field, double beta2,
                                    double length);

// BP or EQ according to config.
fiber::OpticalField compensate(fiber::OpticalField field, const RxConfig& config,
                               const fiber::FiberParams& params, double length);

// Brick-wall matched filter over the baseband 1/T_s band, then the values at
// t = k T_s scaled by sqrt(T_s). Slots [guard, num_slots - guard) are returned.
std::vector<cplx> sample_symbols(const fiber::OpticalField& field,
                                 double symbol_period, int num_slots,
                                 int guard_slots = 0);

// rx * exp(-j (xpm_phase + arg tx)), element-wise.
std::vector<cplx> back_rotate(std::span<const cplx> received,
                              std::span<const cplx> transmitted, double xpm_phase);

// Data-aided mean of arg(rx conj(tx)), unwrapped around the phase of the
// correlation sum.
double estimate_xpm_phase(std::span<const cplx> received,
                          std::span<const cplx> transmitted);

// 10 log10(sum|rx - tx|^2 / sum|tx|^2)
double evm_db(std::span<const cplx> received, std::span<const cplx> transmitted);

}  // namespace fibercode::rx
