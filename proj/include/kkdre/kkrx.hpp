#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kkdre/signal.hpp"

namespace kkdre {

// Which side of the carrier the modulated band occupies. A tone added above
// the signal band leaves the signal in the lower sideband.
enum class Sideband { Upper, Lower };

struct KkConfig {
  int upsample_factor = 2;
  double clip_floor = 1e-6;           // relative to the mean photocurrent
  double max_clipped_fraction = 0.01;
  Sideband sideband = Sideband::Lower;

  void validate() const;
};

struct BiasSearch {
  std::vector<double> grid = default_grid();
  std::size_t metric_block_symbols = 4096;

  static std::vector<double> default_grid();  // 21 points, 0.5 .. 2.0
  void validate() const;
};

struct EqualizerConfig {
  int num_taps = 51;
  double step_mu = 1e-3;
  int samples_per_symbol = 2;
  int training_passes = 2;

  void validate() const;
};

// Candidate biases: grid * (-min(i_ac)), the smallest bias that keeps the
// photocurrent non-negative.
std::vector<double> estimate_bias_candidates(const RealWaveform& i_ac, const BiasSearch& search);

struct KkResult {
  Waveform field;  // at upsample_factor times the input rate
  double clipped_fraction = 0.0;
};

// amplitude sqrt(I), phase +/- hilbert(ln(I) / 2) on the upsampled, clamped
// photocurrent (sign from the sideband).
KkResult kk_reconstruct(const RealWaveform& i_biased, const KkConfig& kk);

// Multiply by exp(-j 2 pi offset t), then subtract the complex mean.
Waveform downconvert_and_strip_carrier(const Waveform& field, double tone_offset_hz);

// Unit-gain RRC filtering followed by resampling to two samples per symbol.
Waveform matched_filter_downsample(const Waveform& w, const RrcSpec& rrc, double baud_hz);

struct SyncResult {
  long delay = 0;      // samples, signed
  double phase = 0.0;  // radians
  std::vector<cplx> aligned;
};

// Circular cross-correlation of a 2-sps sequence against the symbol train
// (symbols on even samples). rx must hold exactly two samples per symbol.
SyncResult synchronize(std::span<const cplx> rx, std::span<const cplx> tx_symbols);

struct LmsResult {
  std::vector<cplx> symbols;
  std::vector<double> training_mse;  // one entry per training pass
  std::vector<cplx> taps;
};

// Fractionally spaced, data-aided LMS. Output symbol k uses the input window
// centred on sample 2k (circularly). n_symbols limits how many symbols are
// trained on and produced; all by default.
LmsResult lms_equalize(std::span<const cplx> rx, std::span<const cplx> tx_symbols, const EqualizerConfig& eq,
                       std::optional<std::size_t> n_symbols = std::nullopt);

struct RxContext {
  KkConfig kk;
  RrcSpec rrc;
  double baud_hz = 25e9;
  double downconvert_hz = 0.0;
  EqualizerConfig eq;
  std::vector<cplx> tx_symbols;
};

struct RxOutput {
  std::vector<cplx> equalized;
  double bias = 0.0;
  double clipped_fraction = 0.0;
  long delay = 0;
  double phase = 0.0;
  double snr_db = 0.0;
  std::vector<double> training_mse;
};

// KK -> downconvert -> matched filter -> power normalization -> sync -> LMS.
// Failures are raised as PipelineError naming the stage.
RxOutput receive(const RealWaveform& i_ac, double bias, const RxContext& ctx,
                 std::optional<std::size_t> n_symbols = std::nullopt);

struct BiasChoice {
  double bias = 0.0;
  std::size_t index = 0;
  std::vector<double> candidates;
  std::vector<double> metric_db;  // NaN for failed candidates
  std::vector<std::string> failures;
};

// Post-equalization SNR on the first metric_block_symbols symbols for every
// candidate; the best wins, ties to the lowest index.
BiasChoice optimize_dc_bias(const RealWaveform& i_ac, const RxContext& ctx, const BiasSearch& search);

}  // namespace kkdre
