#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kkdre {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Uniformly sampled time series. All frames in this library are treated as
// one period of a periodic signal: filtering, resampling and delays are
// circular.
template <typename T>
struct BasicWaveform {
  std::vector<T> samples;
  double sample_rate_hz = 1.0;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

using Waveform = BasicWaveform<cplx>;
using RealWaveform = BasicWaveform<double>;

double power(std::span<const cplx> x);
double power(std::span<const double> x);
inline double power(const Waveform& w) { return power(std::span<const cplx>(w.samples)); }
inline double power(const RealWaveform& w) { return power(std::span<const double>(w.samples)); }

// Two-sided PSD with DC in the middle.
struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<double> psd_db_hz;

  double bin_width_hz() const;
  // Integral of the linear PSD over [lo, hi] (inclusive bin centres).
  double band_power(double lo_hz, double hi_hz) const;
  double total_power() const;
};

struct RrcSpec {
  double rolloff_beta = 0.01;
  int samples_per_symbol = 4;
  int span_symbols = 64;

  void validate() const;
};

// Raised-cosine spectrum at frequency f (in units of the symbol rate),
// normalized to 1 at DC. Aliased copies spaced by 1 sum to exactly 1.
double raised_cosine(double f_over_baud, double beta);
double root_raised_cosine(double f_over_baud, double beta);

// FFT-domain resampling: the spectrum is truncated or zero-padded, so
// content below min(old, new) Nyquist is preserved exactly. The new length
// len * new_rate / old_rate must be an integer.
Waveform resample(const Waveform& w, double new_rate_hz);
RealWaveform resample(const RealWaveform& w, double new_rate_hz);

// Root-raised-cosine taps from frequency sampling over one period of
// span_symbols * samples_per_symbol samples; span*sps + 1 taps with the
// two end taps halved so the response is exactly symmetric. Folding the
// taps onto a period gives the circular filter used by pulse shaping, and
// two such filters cascaded circularly are Nyquist at symbol spacing.
// Normalized to unit energy.
std::vector<double> rrc_taps(const RrcSpec& spec);

// Fold an odd-length symmetric tap vector onto a circular period of
// (taps.size() - 1) samples centred at index period/2.
std::vector<double> fold_taps(std::span<const double> taps);

// Hilbert transform: multiply positive bins by -j and negative bins by +j;
// DC and Nyquist bins are zeroed. hilbert(cos) == sin.
std::vector<double> hilbert(std::span<const double> x);

// Welch estimate with a periodic Hann window and 50% overlap.
Spectrum psd(const Waveform& w, std::size_t segment_len = 4096);

// Multiply the spectrum of w by response(f_hz).
template <typename F>
Waveform filter_frequency_domain(const Waveform& w, F&& response);

// Bin-accurate power of w restricted to [lo, hi] Hz (full-frame FFT).
double band_power(const Waveform& w, double lo_hz, double hi_hz);

}  // namespace kkdre

#include "kkdre/fft.hpp"

namespace kkdre {

template <typename F>
Waveform filter_frequency_domain(const Waveform& w, F&& response) {
  auto X = fft::forward(w.samples);
  const std::size_t n = X.size();
  const double df = w.sample_rate_hz / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    X[k] *= response(static_cast<double>(fft::signed_bin(k, n)) * df);
  }
  return Waveform{fft::inverse(X), w.sample_rate_hz};
}

}  // namespace kkdre
