#pragma once

#include <complex>
#include <span>
#include <vector>

// Thin wrapper over FFTW. Plans are cached per length and shared between
// threads; execution uses the new-array interface, which FFTW documents as
// thread-safe.
namespace kkdre::fft {

using cplx = std::complex<double>;

std::vector<cplx> forward(std::span<const cplx> x);

// Normalized inverse: inverse(forward(x)) == x.
std::vector<cplx> inverse(std::span<const cplx> X);

std::vector<cplx> forward_real(std::span<const double> x);

// Signed bin index of DFT bin k for an n-point transform, in [-n/2, n/2).
inline long signed_bin(std::size_t k, std::size_t n) {
  const long kk = static_cast<long>(k);
  const long nn = static_cast<long>(n);
  return (2 * kk < nn) ? kk : kk - nn;
}

}  // namespace kkdre::fft
