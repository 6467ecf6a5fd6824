#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kkdre/signal.hpp"

namespace kkdre {

using Bits = std::vector<std::uint8_t>;

// Square QAM with quadrant-recursive Gray labels.
//
// A label is read MSB first from the bit stream. Bits at even positions
// (0, 2, 4, ...) select the in-phase amplitude, bits at odd positions the
// quadrature amplitude, so the first bit pair picks the quadrant, the next
// pair the sub-quadrant, and so on. Each axis uses the binary-reflected Gray
// code over amplitudes in descending order:
//
//   QPSK     0:+1    1:-1
//   16-QAM  00:+3   01:+1   11:-1   10:-3
//   64-QAM 000:+7  001:+5  011:+3  010:+1  110:-1  111:-3  101:-5  100:-7
//
// so QPSK bits "00" map to (+1+1j)/sqrt(2). Points are scaled to unit mean
// energy (1/sqrt(2), 1/sqrt(10), 1/sqrt(42)).
struct ConstellationMap {
  int order_m = 6;
  std::vector<cplx> points;  // indexed by label

  static ConstellationMap square_qam(int order_m);

  std::size_t size() const noexcept { return points.size(); }
  int bit(std::size_t label, int position) const noexcept {
    return static_cast<int>((label >> (order_m - 1 - position)) & 1u);
  }
  std::size_t nearest(cplx y) const noexcept;
};

struct ToneSpec {
  double offset_hz = 13.9e9;
  double cspr_db = 8.7;
};

struct TxFrame {
  Bits bits;
  std::vector<cplx> symbols;
  Waveform waveform;
  double scale_applied = 1.0;
};

Bits generate_bits(std::uint64_t seed, std::size_t n_bits);

std::vector<cplx> map_qam(std::span<const std::uint8_t> bits, const ConstellationMap& map);

std::vector<std::size_t> labels_from_bits(std::span<const std::uint8_t> bits, int order_m);

// Circular RRC shaping at rrc.samples_per_symbol; the output is scaled to unit
// mean power for unit-energy symbols, i.e. an isolated symbol produces
// sqrt(sps) * rrc_taps(rrc).
Waveform pulse_shape(std::span<const cplx> symbols, const RrcSpec& rrc, double baud_hz);

// Adds A*exp(+j 2 pi offset t) with A^2 = power(w) * 10^(cspr/10).
// signal_edge_hz is the one-sided occupied bandwidth of w; the tone must
// sit outside it.
Waveform add_cw_tone(const Waveform& w, const ToneSpec& tone, double signal_edge_hz);

struct NormalizedWaveform {
  Waveform waveform;
  double scale = 1.0;
};

// Scales both rails by one factor so that max(|Re|, |Im|) == 1.
NormalizedWaveform normalize_rails(const Waveform& w);

// Nearest frame-periodic frequency: an integer number of cycles over the
// frame duration, so circular processing sees a clean line.
double snap_to_frame_bin(double freq_hz, std::size_t n_samples, double sample_rate_hz);

struct TxSettings {
  int order_m = 6;
  std::size_t n_symbols = 81920;
  double baud_hz = 25e9;
  RrcSpec rrc{};
  ToneSpec tone{};
};

// bits -> symbols -> shaped waveform -> tone -> rail normalization.
TxFrame build_tx_frame(const TxSettings& settings, std::uint64_t bits_seed);

}  // namespace kkdre
