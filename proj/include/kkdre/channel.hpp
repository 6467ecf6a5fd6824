#pragma once

#include <cstdint>
#include <optional>

#include "kkdre/signal.hpp"

namespace kkdre {

inline constexpr double kSpeedOfLight = 299792458.0;

struct FiberSpec {
  double length_km = 50.0;
  double dispersion_ps_nm_km = 17.0;
  double center_freq_thz = 193.4;

  void validate() const;
};

struct OsnrSpec {
  std::optional<double> target_db;  // nullopt = no noise loading
  double ref_bandwidth_hz = 12.5e9;

  void validate() const;
};

struct PdSpec {
  bool ac_coupled = true;
  double responsivity = 1.0;

  void validate() const;
};

// Ideal brick-wall band-pass of the given width centred at center_hz.
Waveform optical_bpf(const Waveform& w, double bandwidth_hz, double center_hz = 0.0);

// Centre of the smallest band holding both [-edge, edge] and the tone.
double bpf_center_for(double signal_edge_hz, double tone_offset_hz);

// All-pass chromatic dispersion, H(f) = exp(-j pi lambda^2 D L f^2 / c).
Waveform apply_cd(const Waveform& w, const FiberSpec& fiber);

// Adds circular white Gaussian noise so that total power over the noise power
// in ref_bandwidth equals the target. Noise power is referenced to power(w).
Waveform load_osnr(const Waveform& w, const OsnrSpec& osnr, std::uint64_t seed);

// Noise variance per complex sample that load_osnr would use.
double osnr_noise_variance(double signal_power, double sample_rate_hz, const OsnrSpec& osnr);

// OSNR from the spectrum: the noise floor is the mean bin power in
// [noise_lo, noise_hi] (a region without signal), the signal is total power
// minus the noise floor extended over the full band.
double measure_osnr(const Waveform& w, double noise_lo_hz, double noise_hi_hz, double ref_bandwidth_hz = 12.5e9);

// Tone power by projection onto exp(j 2 pi offset t) over an integer number of
// tone periods; signal power = total - tone.
double measure_cspr(const Waveform& w, double tone_offset_hz);

struct PdOutput {
  RealWaveform current;
  double removed_mean = 0.0;  // diagnostic only
};

PdOutput photodiode(const Waveform& w, const PdSpec& pd);

// Band-limit to the new Nyquist, resample, and optionally quantize uniformly
// over [-full_scale, full_scale] with full_scale = max |x|.
RealWaveform adc(const RealWaveform& x, double rate_hz = 80e9, std::optional<int> bits = std::nullopt);

}  // namespace kkdre
