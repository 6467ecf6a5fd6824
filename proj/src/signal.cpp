#include "kkdre/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kkdre/error.hpp"

namespace kkdre {

double power(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

double power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double Spectrum::bin_width_hz() const {
  return freq_hz.size() < 2 ? 0.0 : freq_hz[1] - freq_hz[0];
}

double Spectrum::band_power(double lo_hz, double hi_hz) const {
  const double df = bin_width_hz();
  double acc = 0.0;
  for (std::size_t k = 0; k < freq_hz.size(); ++k) {
    if (freq_hz[k] >= lo_hz && freq_hz[k] <= hi_hz) acc += std::pow(10.0, psd_db_hz[k] / 10.0) * df;
  }
  return acc;
}

double Spectrum::total_power() const {
  return band_power(-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

void RrcSpec::validate() const {
  if (!(rolloff_beta >= 0.0 && rolloff_beta <= 1.0)) {
    throw Error(Errc::InvalidRolloff, "rolloff must lie in [0, 1]");
  }
  if (samples_per_symbol < 2) throw Error(Errc::InvalidArgument, "samples_per_symbol must be >= 2");
  if (span_symbols < 16 || span_symbols % 2 != 0) {
    throw Error(Errc::InvalidArgument, "span_symbols must be an even integer >= 16");
  }
}

double raised_cosine(double f, double beta) {
  const double af = std::abs(f);
  if (beta <= 0.0) {
    if (af < 0.5) return 1.0;
    return af == 0.5 ? 0.5 : 0.0;
  }
  const double f1 = 0.5 * (1.0 - beta);
  const double f2 = 0.5 * (1.0 + beta);
  if (af <= f1) return 1.0;
  if (af >= f2) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi / beta * (af - f1)));
}

double root_raised_cosine(double f, double beta) { return std::sqrt(raised_cosine(f, beta)); }

namespace {

void check_rates(std::size_t n, double old_rate, double new_rate) {
  if (n == 0) throw Error(Errc::EmptyWaveform, "cannot resample an empty waveform");
  if (!(old_rate > 0.0) || !(new_rate > 0.0)) throw Error(Errc::NonPositiveRate, "sample rates must be > 0");
}

std::size_t resampled_length(std::size_t n, double old_rate, double new_rate) {
  const double exact = static_cast<double>(n) * new_rate / old_rate;
  const double rounded = std::round(exact);
  if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6) {
    throw Error(Errc::NonIntegerLength, "resampled length " + std::to_string(exact) + " is not an integer");
  }
  return static_cast<std::size_t>(rounded);
}

// Maps an n-bin spectrum onto m bins. The input Nyquist bin (even n) is split
// between +/- n/2 when growing; the output Nyquist bin is dropped when
// shrinking.
std::vector<cplx> remap_spectrum(const std::vector<cplx>& X, std::size_t m) {
  const std::size_t n = X.size();
  std::vector<cplx> Y(m, cplx{});
  const bool n_even = n % 2 == 0;
  const bool m_even = m % 2 == 0;
  for (std::size_t j = 0; j < m; ++j) {
    const long f = fft::signed_bin(j, m);
    if (m_even && m < n && f == -static_cast<long>(m / 2)) continue;
    const long af = std::abs(f);
    if (2 * af < static_cast<long>(n)) {
      Y[j] = X[static_cast<std::size_t>(f < 0 ? f + static_cast<long>(n) : f)];
    } else if (n_even && af == static_cast<long>(n / 2) && m > n) {
      Y[j] = 0.5 * X[n / 2];
    }
  }
  return Y;
}

}  // namespace

Waveform resample(const Waveform& w, double new_rate_hz) {
  check_rates(w.size(), w.sample_rate_hz, new_rate_hz);
  if (new_rate_hz == w.sample_rate_hz) return w;
  const std::size_t m = resampled_length(w.size(), w.sample_rate_hz, new_rate_hz);
  auto Y = remap_spectrum(fft::forward(w.samples), m);
  auto y = fft::inverse(Y);
  const double gain = static_cast<double>(m) / static_cast<double>(w.size());
  for (auto& v : y) v *= gain;
  return Waveform{std::move(y), new_rate_hz};
}

RealWaveform resample(const RealWaveform& w, double new_rate_hz) {
  check_rates(w.size(), w.sample_rate_hz, new_rate_hz);
  if (new_rate_hz == w.sample_rate_hz) return w;
  const std::size_t m = resampled_length(w.size(), w.sample_rate_hz, new_rate_hz);
  auto Y = remap_spectrum(fft::forward_real(w.samples), m);
  auto y = fft::inverse(Y);
  const double gain = static_cast<double>(m) / static_cast<double>(w.size());
  RealWaveform out{std::vector<double>(m), new_rate_hz};
  for (std::size_t i = 0; i < m; ++i) out.samples[i] = y[i].real() * gain;
  return out;
}

std::vector<double> rrc_taps(const RrcSpec& spec) {
  spec.validate();
  const std::size_t period = static_cast<std::size_t>(spec.span_symbols) * spec.samples_per_symbol;
  std::vector<cplx> H(period);
  for (std::size_t k = 0; k < period; ++k) {
    const double f = static_cast<double>(fft::signed_bin(k, period)) / spec.span_symbols;
    H[k] = root_raised_cosine(f, spec.rolloff_beta);
  }
  const auto h = fft::inverse(H);
  double energy = 0.0;
  for (const auto& v : h) energy += v.real() * v.real();
  const double norm = 1.0 / std::sqrt(energy);

  const std::size_t half = period / 2;
  std::vector<double> taps(period + 1);
  for (std::size_t i = 0; i <= period; ++i) {
    const std::size_t src = (i + period - half) % period;
    taps[i] = h[src].real() * norm;
  }
  taps.front() *= 0.5;
  taps.back() = taps.front();
  // Enforce exact symmetry; the inverse FFT leaves ~1e-18 asymmetry.
  for (std::size_t i = 1; i < half; ++i) {
    const double avg = 0.5 * (taps[i] + taps[period - i]);
    taps[i] = avg;
    taps[period - i] = avg;
  }
  return taps;
}

std::vector<double> fold_taps(std::span<const double> taps) {
  if (taps.size() < 2) return {taps.begin(), taps.end()};
  const std::size_t period = taps.size() - 1;
  std::vector<double> out(period, 0.0);
  for (std::size_t i = 0; i < taps.size(); ++i) out[i % period] += taps[i];
  return out;
}

std::vector<double> hilbert(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw Error(Errc::TooShort, "hilbert needs at least 8 samples");
  auto X = fft::forward_real(x);
  const cplx minus_j{0.0, -1.0};
  for (std::size_t k = 0; k < n; ++k) {
    const long f = fft::signed_bin(k, n);
    if (f == 0 || (n % 2 == 0 && 2 * std::abs(f) == static_cast<long>(n))) {
      X[k] = 0.0;
    } else if (f > 0) {
      X[k] *= minus_j;
    } else {
      X[k] *= -minus_j;
    }
  }
  const auto y = fft::inverse(X);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
  return out;
}

Spectrum psd(const Waveform& w, std::size_t segment_len) {
  const std::size_t n = w.size();
  if (segment_len < 2 || (segment_len & (segment_len - 1)) != 0) {
    throw Error(Errc::InvalidArgument, "segment length must be a power of two");
  }
  if (segment_len > n) throw Error(Errc::TooShort, "waveform shorter than one PSD segment");

  std::vector<double> window(segment_len);
  double wsum2 = 0.0;
  for (std::size_t i = 0; i < segment_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(segment_len));
    wsum2 += window[i] * window[i];
  }

  const std::size_t hop = segment_len / 2;
  const std::size_t segments = (n - segment_len) / hop + 1;
  std::vector<double> acc(segment_len, 0.0);
  std::vector<cplx> buf(segment_len);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < segment_len; ++i) buf[i] = w.samples[start + i] * window[i];
    const auto X = fft::forward(buf);
    for (std::size_t k = 0; k < segment_len; ++k) acc[k] += std::norm(X[k]);
  }

  const double fs = w.sample_rate_hz;
  const double scale = 1.0 / (static_cast<double>(segments) * fs * wsum2);
  Spectrum out;
  out.freq_hz.resize(segment_len);
  out.psd_db_hz.resize(segment_len);
  const std::size_t half = segment_len / 2;
  for (std::size_t i = 0; i < segment_len; ++i) {
    const std::size_t k = (i + half) % segment_len;
    const double lin = acc[k] * scale;
    out.freq_hz[i] = (static_cast<double>(i) - static_cast<double>(half)) * fs / static_cast<double>(segment_len);
    out.psd_db_hz[i] = 10.0 * std::log10(std::max(lin, 1e-40));
  }
  return out;
}

double band_power(const Waveform& w, double lo_hz, double hi_hz) {
  if (w.empty()) return 0.0;
  const auto X = fft::forward(w.samples);
  const std::size_t n = X.size();
  const double df = w.sample_rate_hz / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(fft::signed_bin(k, n)) * df;
    if (f >= lo_hz && f <= hi_hz) acc += std::norm(X[k]);
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace kkdre
