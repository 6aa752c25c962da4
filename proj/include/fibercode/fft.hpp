#pragma once

#include <complex>
#include <span>

namespace fibercode {

using cplx = std::complex<double>;

// In-place DFTs on arbitrary lengths. forward is unnormalized
// (X[q] = sum x[n] e^{-j 2 pi q n / N}); inverse carries the 1/N factor so
// that inverse(forward(x)) == x.
void fft_forward(std::span<cplx> data);
void fft_inverse(std::span<cplx> data);

}  // namespace fibercode
