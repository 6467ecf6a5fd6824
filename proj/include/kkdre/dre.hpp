#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kkdre/signal.hpp"

namespace kkdre {

// Mid-rise uniform quantizer over [-full_scale, +full_scale]:
// levels -fs + delta/2 + k*delta, k = 0 .. 2^bits - 1, delta = 2*fs / 2^bits.
struct QuantizerSpec {
  int bits_b = 6;
  double full_scale = 1.0;

  void validate() const;
  std::size_t level_count() const { return std::size_t{1} << bits_b; }
  double step() const;
  double level(std::size_t k) const;
  std::vector<double> levels() const;
  // Index of the nearest level to the clamped input.
  std::size_t nearest_index(double x) const;
};

// FIR that models the band the DRE protects. The quantization error is
// filtered by it and the filtered energy minimized.
struct ShapingFilter {
  std::vector<double> taps{1.0};
  double passband_edge_hz = 0.0;
};

struct DreConfig {
  int n_soft = 3;
  int beam_width = 16;
};

// Linear-phase least-squares lowpass (truncated ideal response), scaled so
// the peak magnitude response is 1.
ShapingFilter design_shaping_filter(double passband_edge_hz, double sample_rate_hz, int n_taps);

std::vector<double> quantize_uniform(std::span<const double> x, const QuantizerSpec& q);

// sum_n |(e * h)[n]|^2 over the full linear convolution, e = y - x.
double filtered_error_energy(std::span<const double> x, std::span<const double> y,
                             std::span<const double> taps);

struct DreResult {
  std::vector<double> output;
  double cost = 0.0;
  double plain_cost = 0.0;
  bool used_fallback = false;
};

// Digital resolution enhancer.
//
// M-algorithm over per-sample candidates (the n_soft levels nearest to
// x[n], ties toward the lower level). A path's state is its last
// len(taps) - 1 errors; its metric is the running filtered-error energy.
//
// Survivors are pruned in a nested ladder of widths W, W/2, W/4, ..., 1:
// the width-w survivor set is the width-w/2 set plus the best remaining
// extensions of width-w parents. A beam of 2k therefore always contains
// every survivor of a beam of k, so widening the beam never increases the
// final cost.
//
// The plain rounding sequence is scored as well and returned whenever it is
// not worse, so cost(result) <= cost(quantize_uniform(x)) unconditionally.
DreResult dre_quantize_detailed(std::span<const double> x, const QuantizerSpec& q,
                                const ShapingFilter& h, const DreConfig& cfg);

std::vector<double> dre_quantize(std::span<const double> x, const QuantizerSpec& q,
                                 const ShapingFilter& h, const DreConfig& cfg);

struct DreSettings {
  ShapingFilter filter;
  DreConfig config;
};

// Quantizes the I and Q rails independently, with the DRE when given.
Waveform quantize_waveform(const Waveform& w, const QuantizerSpec& q,
                           const std::optional<DreSettings>& dre = std::nullopt);

Spectrum quantization_noise_spectrum(const Waveform& original, const Waveform& quantized,
                                     std::size_t segment_len = 4096);

struct Band {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

inline constexpr double kNoiselessSnrDb = 300.0;

// In-band SNR of the quantized waveform against the original. The tone line
// (when given) is excluded from the signal power.
double tx_snr_inband(const Waveform& original, const Waveform& quantized, Band signal_band,
                     std::optional<double> tone_offset_hz = std::nullopt);

}  // namespace kkdre
