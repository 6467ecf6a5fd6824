#include "kkdre/txdsp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kkdre/error.hpp"
#include "kkdre/fft.hpp"

namespace kkdre {

namespace {

// Amplitude index (0 = most positive) of an axis Gray code.
unsigned gray_to_index(unsigned code) {
  unsigned i = code;
  for (unsigned shift = 1; shift < 32; shift <<= 1) i ^= i >> shift;
  return i;
}

}  // namespace

ConstellationMap ConstellationMap::square_qam(int order_m) {
  if (order_m != 2 && order_m != 4 && order_m != 6) {
    throw Error(Errc::InvalidArgument, "order_m must be 2, 4 or 6");
  }
  const int k = order_m / 2;
  const unsigned levels = 1u << k;
  const double norm = std::sqrt(2.0 * (static_cast<double>(levels * levels) - 1.0) / 3.0);

  ConstellationMap map;
  map.order_m = order_m;
  map.points.resize(std::size_t{1} << order_m);
  for (std::size_t label = 0; label < map.points.size(); ++label) {
    unsigned code_i = 0, code_q = 0;
    for (int pos = 0; pos < order_m; ++pos) {
      const unsigned b = static_cast<unsigned>(map.bit(label, pos));
      if (pos % 2 == 0) {
        code_i = (code_i << 1) | b;
      } else {
        code_q = (code_q << 1) | b;
      }
    }
    const double amp_i = static_cast<double>(levels - 1) - 2.0 * gray_to_index(code_i);
    const double amp_q = static_cast<double>(levels - 1) - 2.0 * gray_to_index(code_q);
    map.points[label] = cplx{amp_i, amp_q} / norm;
  }
  return map;
}

std::size_t ConstellationMap::nearest(cplx y) const noexcept {
  std::size_t best = 0;
  double best_d = std::norm(y - points[0]);
  for (std::size_t j = 1; j < points.size(); ++j) {
    const double d = std::norm(y - points[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

Bits generate_bits(std::uint64_t seed, std::size_t n_bits) {
  std::mt19937_64 rng(seed);
  Bits bits(n_bits);
  std::size_t i = 0;
  while (i < n_bits) {
    std::uint64_t word = rng();
    for (int b = 0; b < 64 && i < n_bits; ++b, ++i) {
      bits[i] = static_cast<std::uint8_t>(word & 1u);
      word >>= 1;
    }
  }
  return bits;
}

std::vector<std::size_t> labels_from_bits(std::span<const std::uint8_t> bits, int order_m) {
  if (order_m <= 0 || bits.size() % static_cast<std::size_t>(order_m) != 0) {
    throw Error(Errc::LengthNotDivisible, "bit count is not a multiple of the bits per symbol");
  }
  std::vector<std::size_t> labels(bits.size() / order_m);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    std::size_t label = 0;
    for (int b = 0; b < order_m; ++b) label = (label << 1) | (bits[s * order_m + b] & 1u);
    labels[s] = label;
  }
  return labels;
}

std::vector<cplx> map_qam(std::span<const std::uint8_t> bits, const ConstellationMap& map) {
  const auto labels = labels_from_bits(bits, map.order_m);
  std::vector<cplx> symbols(labels.size());
  for (std::size_t s = 0; s < labels.size(); ++s) symbols[s] = map.points[labels[s]];
  return symbols;
}

Waveform pulse_shape(std::span<const cplx> symbols, const RrcSpec& rrc, double baud_hz) {
  rrc.validate();
  if (symbols.empty()) throw Error(Errc::EmptySymbols, "no symbols to shape");
  if (!(baud_hz > 0.0)) throw Error(Errc::NonPositiveRate, "baud must be > 0");

  const std::size_t n = symbols.size();
  const std::size_t sps = static_cast<std::size_t>(rrc.samples_per_symbol);
  const std::size_t len = n * sps;
  const auto X = fft::forward(symbols);
  std::vector<cplx> Y(len);
  for (std::size_t j = 0; j < len; ++j) {
    const long f = fft::signed_bin(j, len);
    const double f_baud = static_cast<double>(f) / static_cast<double>(n);
    const double h = root_raised_cosine(f_baud, rrc.rolloff_beta);
    if (h == 0.0) continue;
    const long nn = static_cast<long>(n);
    const std::size_t src = static_cast<std::size_t>(((f % nn) + nn) % nn);
    Y[j] = X[src] * (h * static_cast<double>(sps));
  }
  return Waveform{fft::inverse(Y), baud_hz * static_cast<double>(sps)};
}

Waveform add_cw_tone(const Waveform& w, const ToneSpec& tone, double signal_edge_hz) {
  if (w.empty()) throw Error(Errc::EmptyWaveform, "cannot add a tone to an empty waveform");
  if (std::abs(tone.offset_hz) >= 0.5 * w.sample_rate_hz) {
    throw Error(Errc::ToneAboveNyquist, "tone offset exceeds Nyquist");
  }
  if (std::abs(tone.offset_hz) <= signal_edge_hz) {
    throw Error(Errc::ToneInsideSignalBand, "tone offset lies inside the signal band");
  }
  const double amp = std::sqrt(power(w) * std::pow(10.0, tone.cspr_db / 10.0));
  const double cycles_per_sample = tone.offset_hz / w.sample_rate_hz;
  Waveform out = w;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double cyc = static_cast<double>(i) * cycles_per_sample;
    cyc -= std::floor(cyc);
    out.samples[i] += std::polar(amp, 2.0 * kPi * cyc);
  }
  return out;
}

NormalizedWaveform normalize_rails(const Waveform& w) {
  if (w.empty()) throw Error(Errc::EmptyWaveform, "cannot normalize an empty waveform");
  double peak = 0.0;
  for (const auto& v : w.samples) peak = std::max({peak, std::abs(v.real()), std::abs(v.imag())});
  if (peak == 0.0) throw Error(Errc::AllZeroWaveform, "waveform is identically zero");
  const double scale = 1.0 / peak;
  NormalizedWaveform out{w, scale};
  // Divide rather than multiply so the peak rail lands on exactly 1.
  if (peak != 1.0) {
    for (auto& v : out.waveform.samples) v /= peak;
  }
  return out;
}

double snap_to_frame_bin(double freq_hz, std::size_t n_samples, double sample_rate_hz) {
  const double df = sample_rate_hz / static_cast<double>(n_samples);
  return std::round(freq_hz / df) * df;
}

TxFrame build_tx_frame(const TxSettings& s, std::uint64_t bits_seed) {
  const auto map = ConstellationMap::square_qam(s.order_m);
  TxFrame frame;
  frame.bits = generate_bits(bits_seed, s.n_symbols * static_cast<std::size_t>(s.order_m));
  frame.symbols = map_qam(frame.bits, map);
  const auto shaped = pulse_shape(frame.symbols, s.rrc, s.baud_hz);
  const double edge = 0.5 * s.baud_hz * (1.0 + s.rrc.rolloff_beta);
  auto normalized = normalize_rails(add_cw_tone(shaped, s.tone, edge));
  frame.waveform = std::move(normalized.waveform);
  frame.scale_applied = normalized.scale;
  return frame;
}

}  // namespace kkdre
