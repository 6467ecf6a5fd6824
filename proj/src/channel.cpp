#include "kkdre/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kkdre/dre.hpp"
#include "kkdre/error.hpp"
#include "kkdre/fft.hpp"

namespace kkdre {

void FiberSpec::validate() const {
  if (!(length_km >= 0.0)) throw Error(Errc::ConfigInvariantViolated, "fiber length must be >= 0");
  if (!(center_freq_thz > 0.0)) throw Error(Errc::ConfigInvariantViolated, "centre frequency must be > 0");
  if (!std::isfinite(dispersion_ps_nm_km)) throw Error(Errc::ConfigInvariantViolated, "dispersion must be finite");
}

void OsnrSpec::validate() const {
  if (!(ref_bandwidth_hz > 0.0)) throw Error(Errc::ConfigInvariantViolated, "reference bandwidth must be > 0");
  if (target_db && !std::isfinite(*target_db)) throw Error(Errc::ConfigInvariantViolated, "OSNR target must be finite");
}

void PdSpec::validate() const {
  if (!(responsivity > 0.0)) throw Error(Errc::ConfigInvariantViolated, "responsivity must be > 0");
}

Waveform optical_bpf(const Waveform& w, double bandwidth_hz, double center_hz) {
  if (!(bandwidth_hz > 0.0) || bandwidth_hz > w.sample_rate_hz) {
    throw Error(Errc::BandExceedsNyquist, "filter bandwidth must lie in (0, sample rate]");
  }
  if (w.empty()) throw Error(Errc::EmptyWaveform, "empty waveform");
  const double lo = center_hz - 0.5 * bandwidth_hz;
  const double hi = center_hz + 0.5 * bandwidth_hz;
  return filter_frequency_domain(w, [lo, hi](double f) { return (f >= lo && f <= hi) ? 1.0 : 0.0; });
}

double bpf_center_for(double signal_edge_hz, double tone_offset_hz) {
  const double lo = std::min(-signal_edge_hz, tone_offset_hz);
  const double hi = std::max(signal_edge_hz, tone_offset_hz);
  return 0.5 * (lo + hi);
}

Waveform apply_cd(const Waveform& w, const FiberSpec& fiber) {
  fiber.validate();
  if (fiber.length_km == 0.0 || fiber.dispersion_ps_nm_km == 0.0) return w;
  const double lambda = kSpeedOfLight / (fiber.center_freq_thz * 1e12);
  const double d_si = fiber.dispersion_ps_nm_km * 1e-6;  // s/m^2
  const double k = kPi * lambda * lambda * d_si * fiber.length_km * 1e3 / kSpeedOfLight;
  return filter_frequency_domain(w, [k](double f) { return std::polar(1.0, -k * f * f); });
}

double osnr_noise_variance(double signal_power, double sample_rate_hz, const OsnrSpec& osnr) {
  osnr.validate();
  if (!osnr.target_db) return 0.0;
  return signal_power * sample_rate_hz / (osnr.ref_bandwidth_hz * std::pow(10.0, *osnr.target_db / 10.0));
}

Waveform load_osnr(const Waveform& w, const OsnrSpec& osnr, std::uint64_t seed) {
  osnr.validate();
  if (!osnr.target_db) return w;
  const double var = osnr_noise_variance(power(w), w.sample_rate_hz, osnr);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * var));
  Waveform out = w;
  for (auto& v : out.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += cplx{re, im};
  }
  return out;
}

double measure_osnr(const Waveform& w, double noise_lo_hz, double noise_hi_hz, double ref_bandwidth_hz) {
  if (w.empty()) throw Error(Errc::EmptyWaveform, "empty waveform");
  if (!(noise_hi_hz > noise_lo_hz)) throw Error(Errc::InvalidArgument, "empty noise region");
  const auto X = fft::forward(w.samples);
  const std::size_t n = X.size();
  const double df = w.sample_rate_hz / static_cast<double>(n);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  double total = 0.0, noise = 0.0;
  std::size_t noise_bins = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = std::norm(X[k]) / n2;
    total += p;
    const double f = static_cast<double>(fft::signed_bin(k, n)) * df;
    if (f >= noise_lo_hz && f <= noise_hi_hz) {
      noise += p;
      ++noise_bins;
    }
  }
  if (noise_bins == 0) throw Error(Errc::InvalidArgument, "noise region holds no bins");
  const double per_bin = noise / static_cast<double>(noise_bins);
  const double signal = total - per_bin * static_cast<double>(n);
  const double noise_ref = per_bin / df * ref_bandwidth_hz;
  if (!(signal > 0.0) || !(noise_ref > 0.0)) throw Error(Errc::NoSignalPower, "no signal above the noise floor");
  return 10.0 * std::log10(signal / noise_ref);
}

double measure_cspr(const Waveform& w, double tone_offset_hz) {
  if (w.empty()) throw Error(Errc::EmptyWaveform, "empty waveform");
  if (std::abs(tone_offset_hz) >= 0.5 * w.sample_rate_hz) {
    throw Error(Errc::ToneAboveNyquist, "tone offset exceeds Nyquist");
  }
  const std::size_t n = w.size();
  const double cycles_per_sample = tone_offset_hz / w.sample_rate_hz;
  std::size_t m = n;
  if (cycles_per_sample != 0.0) {
    const double periods = std::floor(static_cast<double>(n) * std::abs(cycles_per_sample) + 1e-9);
    if (periods >= 1.0) {
      m = std::min(n, static_cast<std::size_t>(std::llround(periods / std::abs(cycles_per_sample))));
    }
  }
  cplx proj{};
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double cyc = static_cast<double>(i) * cycles_per_sample;
    cyc -= std::floor(cyc);
    proj += w.samples[i] * std::polar(1.0, -2.0 * kPi * cyc);
    total += std::norm(w.samples[i]);
  }
  proj /= static_cast<double>(m);
  total /= static_cast<double>(m);
  const double tone = std::norm(proj);
  const double sig = total - tone;
  if (!(sig > 1e-14 * total)) throw Error(Errc::NoSignalPower, "no signal power besides the tone");
  if (tone <= 0.0) return -300.0;
  return std::max(-300.0, 10.0 * std::log10(tone / sig));
}

PdOutput photodiode(const Waveform& w, const PdSpec& pd) {
  pd.validate();
  PdOutput out;
  out.current.sample_rate_hz = w.sample_rate_hz;
  out.current.samples.resize(w.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.current.samples[i] = pd.responsivity * std::norm(w.samples[i]);
    sum += out.current.samples[i];
  }
  if (pd.ac_coupled && !w.empty()) {
    const double mean = sum / static_cast<double>(w.size());
    for (auto& v : out.current.samples) v -= mean;
    out.removed_mean = mean;
  }
  return out;
}

RealWaveform adc(const RealWaveform& x, double rate_hz, std::optional<int> bits) {
  if (!(rate_hz > 0.0)) throw Error(Errc::NonPositiveRate, "ADC rate must be > 0");
  RealWaveform out = resample(x, rate_hz);
  if (bits) {
    double peak = 0.0;
    for (double v : out.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) out.samples = quantize_uniform(out.samples, QuantizerSpec{*bits, peak});
  }
  return out;
}

}  // namespace kkdre
