#include "kkdre/dre.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "kkdre/error.hpp"
#include "kkdre/fft.hpp"

namespace kkdre {

void QuantizerSpec::validate() const {
  if (bits_b < 1 || bits_b > 16) throw Error(Errc::ConfigInvariantViolated, "bits must lie in [1, 16]");
  if (!(full_scale > 0.0)) throw Error(Errc::ConfigInvariantViolated, "full scale must be > 0");
}

double QuantizerSpec::step() const { return 2.0 * full_scale / static_cast<double>(level_count()); }

double QuantizerSpec::level(std::size_t k) const {
  return -full_scale + (static_cast<double>(k) + 0.5) * step();
}

std::vector<double> QuantizerSpec::levels() const {
  std::vector<double> out(level_count());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = level(k);
  return out;
}

std::size_t QuantizerSpec::nearest_index(double x) const {
  const double clamped = std::clamp(x, -full_scale, full_scale);
  const double idx = std::floor((clamped + full_scale) / step());
  const double top = static_cast<double>(level_count() - 1);
  return static_cast<std::size_t>(std::clamp(idx, 0.0, top));
}

ShapingFilter design_shaping_filter(double passband_edge_hz, double sample_rate_hz, int n_taps) {
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::NonPositiveRate, "sample rate must be > 0");
  if (!(passband_edge_hz > 0.0 && passband_edge_hz < 0.5 * sample_rate_hz)) {
    throw Error(Errc::InvalidEdge, "passband edge must lie in (0, fs/2)");
  }
  if (n_taps < 1 || n_taps % 2 == 0) throw Error(Errc::EvenTaps, "tap count must be odd and positive");

  const double fc = passband_edge_hz / sample_rate_hz;
  const int mid = n_taps / 2;
  std::vector<double> taps(static_cast<std::size_t>(n_taps));
  for (int k = 0; k < n_taps; ++k) {
    const double t = 2.0 * fc * static_cast<double>(k - mid);
    taps[static_cast<std::size_t>(k)] = 2.0 * fc * (t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t));
  }
  for (int k = 0; k < mid; ++k) taps[static_cast<std::size_t>(n_taps - 1 - k)] = taps[static_cast<std::size_t>(k)];

  // Peak of |H| on a dense grid.
  double peak = 0.0;
  constexpr int kGrid = 4096;
  for (int g = 0; g <= kGrid; ++g) {
    const double w = kPi * g / kGrid;
    cplx acc{};
    for (int k = 0; k < n_taps; ++k) acc += taps[static_cast<std::size_t>(k)] * std::polar(1.0, -w * k);
    peak = std::max(peak, std::abs(acc));
  }
  for (auto& t : taps) t /= peak;
  return ShapingFilter{std::move(taps), passband_edge_hz};
}

std::vector<double> quantize_uniform(std::span<const double> x, const QuantizerSpec& q) {
  q.validate();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = q.level(q.nearest_index(x[i]));
  return y;
}

// The accumulation order here is mirrored exactly by the beam search, so a
// path's running metric and this function agree bit for bit.
double filtered_error_energy(std::span<const double> x, std::span<const double> y,
                             std::span<const double> taps) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "x and y differ in length");
  if (taps.empty()) throw Error(Errc::ConfigInvariantViolated, "empty filter");
  const std::size_t n = x.size();
  const std::size_t mem = taps.size() - 1;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = y[i] - x[i];
  double cost = 0.0;
  for (std::size_t i = 0; i < n + mem; ++i) {
    double pre = 0.0;
    for (std::size_t k = 1; k <= mem; ++k) pre += taps[k] * ((i >= k && i - k < n) ? e[i - k] : 0.0);
    const double cur = i < n ? e[i] : 0.0;
    const double out = taps[0] * cur + pre;
    cost += out * out;
  }
  return cost;
}

namespace {

void validate_dre(const QuantizerSpec& q, const ShapingFilter& h, const DreConfig& cfg) {
  q.validate();
  if (h.taps.empty()) throw Error(Errc::ConfigInvariantViolated, "shaping filter has no taps");
  if (cfg.n_soft < 1) throw Error(Errc::ConfigInvariantViolated, "n_soft must be >= 1");
  if (cfg.beam_width < 1) throw Error(Errc::ConfigInvariantViolated, "beam_width must be >= 1");
  if (static_cast<std::size_t>(cfg.n_soft) > q.level_count()) {
    throw Error(Errc::ConfigInvariantViolated, "n_soft exceeds the number of quantizer levels");
  }
}

// The n nearest levels form a contiguous window; grow it around the nearest
// level, preferring the lower side on equal distance.
std::pair<std::size_t, std::size_t> candidate_window(double x, const QuantizerSpec& q, std::size_t n) {
  const std::size_t count = q.level_count();
  const double fs = q.full_scale;
  const double u = (std::clamp(x, -fs, fs) + fs) / q.step() - 0.5;
  std::size_t lo = q.nearest_index(x);
  std::size_t hi = lo;
  while (hi - lo + 1 < n) {
    const bool left_ok = lo > 0;
    const bool right_ok = hi + 1 < count;
    if (left_ok && (!right_ok || (u - static_cast<double>(lo - 1)) <= (static_cast<double>(hi + 1) - u))) {
      --lo;
    } else {
      ++hi;
    }
  }
  return {lo, hi};
}

std::vector<int> width_ladder(int beam_width) {
  std::vector<int> widths;
  for (int w = beam_width; w >= 1; w /= 2) widths.push_back(w);
  std::reverse(widths.begin(), widths.end());
  return widths;
}

}  // namespace

DreResult dre_quantize_detailed(std::span<const double> x, const QuantizerSpec& q,
                                const ShapingFilter& h, const DreConfig& cfg) {
  validate_dre(q, h, cfg);
  DreResult result;
  const std::size_t n = x.size();
  const auto& taps = h.taps;
  result.output = quantize_uniform(x, q);
  result.plain_cost = filtered_error_energy(x, result.output, taps);
  result.cost = result.plain_cost;
  result.used_fallback = true;
  if (n == 0 || cfg.n_soft == 1) return result;

  const std::size_t mem = taps.size() - 1;
  const std::size_t n_soft = static_cast<std::size_t>(cfg.n_soft);
  const auto widths = width_ladder(cfg.beam_width);
  const std::size_t max_width = static_cast<std::size_t>(cfg.beam_width);

  // Current survivors.
  std::vector<double> cost{0.0};
  std::vector<double> hist(mem, 0.0);  // survivor-major, most recent error first
  std::vector<int> rank{0};

  std::vector<std::int32_t> trace_parent;
  std::vector<std::uint16_t> trace_level;
  std::vector<std::size_t> trace_offset(n + 1, 0);

  std::vector<double> ext_cost, ext_err, pre;
  std::vector<int> ext_rank;
  std::vector<std::uint32_t> order;
  std::vector<char> taken;
  std::vector<std::size_t> chosen;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t survivors = cost.size();
    const auto [lo, hi] = candidate_window(x[i], q, n_soft);
    const std::size_t cands = hi - lo + 1;

    pre.assign(survivors, 0.0);
    for (std::size_t s = 0; s < survivors; ++s) {
      double acc = 0.0;
      for (std::size_t k = 1; k <= mem; ++k) acc += taps[k] * hist[s * mem + (k - 1)];
      pre[s] = acc;
    }

    const std::size_t n_ext = survivors * cands;
    ext_cost.resize(n_ext);
    ext_err.resize(n_ext);
    ext_rank.resize(n_ext);
    for (std::size_t s = 0; s < survivors; ++s) {
      for (std::size_t c = 0; c < cands; ++c) {
        const double err = q.level(lo + c) - x[i];
        const double out = taps[0] * err + pre[s];
        const std::size_t e = s * cands + c;
        ext_cost[e] = cost[s] + out * out;
        ext_err[e] = err;
        ext_rank[e] = rank[s];
      }
    }

    order.resize(n_ext);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return ext_cost[a] < ext_cost[b] || (ext_cost[a] == ext_cost[b] && a < b);
    });

    // Nested selection: each ladder rung keeps the previous rung's survivors
    // and tops up from extensions of parents that belong to this rung.
    taken.assign(n_ext, 0);
    chosen.clear();
    std::vector<int> chosen_rank;
    for (std::size_t r = 0; r < widths.size(); ++r) {
      const std::size_t target = std::min(static_cast<std::size_t>(widths[r]), max_width);
      for (std::size_t idx = 0; idx < n_ext && chosen.size() < target; ++idx) {
        const std::uint32_t e = order[idx];
        if (taken[e] || ext_rank[e] > static_cast<int>(r)) continue;
        taken[e] = 1;
        chosen.push_back(e);
        chosen_rank.push_back(static_cast<int>(r));
      }
    }

    std::vector<double> next_cost(chosen.size());
    std::vector<double> next_hist(chosen.size() * mem);
    trace_offset[i] = trace_parent.size();
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      const std::size_t e = chosen[j];
      const std::size_t parent = e / cands;
      next_cost[j] = ext_cost[e];
      if (mem > 0) {
        next_hist[j * mem] = ext_err[e];
        for (std::size_t k = 1; k < mem; ++k) next_hist[j * mem + k] = hist[parent * mem + (k - 1)];
      }
      trace_parent.push_back(static_cast<std::int32_t>(parent));
      trace_level.push_back(static_cast<std::uint16_t>(lo + e % cands));
    }
    trace_offset[i + 1] = trace_parent.size();
    cost = std::move(next_cost);
    hist = std::move(next_hist);
    rank = std::move(chosen_rank);
  }

  // Flush the filter memory: the tail outputs after the last sample.
  std::size_t best = 0;
  double best_total = 0.0;
  std::vector<double> tail(mem);
  for (std::size_t s = 0; s < cost.size(); ++s) {
    std::copy(hist.begin() + static_cast<long>(s * mem), hist.begin() + static_cast<long>((s + 1) * mem), tail.begin());
    double total = cost[s];
    for (std::size_t t = 0; t < mem; ++t) {
      double acc = 0.0;
      for (std::size_t k = 1; k <= mem; ++k) acc += taps[k] * tail[k - 1];
      const double out = taps[0] * 0.0 + acc;
      total += out * out;
      for (std::size_t k = mem - 1; k > 0; --k) tail[k] = tail[k - 1];
      tail[0] = 0.0;
    }
    if (s == 0 || total < best_total) {
      best_total = total;
      best = s;
    }
  }

  std::vector<double> searched(n);
  std::size_t node = best;
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t at = trace_offset[i] + node;
    searched[i] = q.level(trace_level[at]);
    node = static_cast<std::size_t>(trace_parent[at]);
  }

  const double searched_cost = filtered_error_energy(x, searched, taps);
  if (searched_cost < result.plain_cost) {
    result.output = std::move(searched);
    result.cost = searched_cost;
    result.used_fallback = false;
  }
  return result;
}

std::vector<double> dre_quantize(std::span<const double> x, const QuantizerSpec& q,
                                 const ShapingFilter& h, const DreConfig& cfg) {
  return dre_quantize_detailed(x, q, h, cfg).output;
}

Waveform quantize_waveform(const Waveform& w, const QuantizerSpec& q, const std::optional<DreSettings>& dre) {
  const std::size_t n = w.size();
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = w.samples[i].real();
    im[i] = w.samples[i].imag();
  }
  std::vector<double> qre, qim;
  if (dre) {
    qre = dre_quantize(re, q, dre->filter, dre->config);
    qim = dre_quantize(im, q, dre->filter, dre->config);
  } else {
    qre = quantize_uniform(re, q);
    qim = quantize_uniform(im, q);
  }
  Waveform out{std::vector<cplx>(n), w.sample_rate_hz};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = cplx{qre[i], qim[i]};
  return out;
}

namespace {

void check_pair(const Waveform& a, const Waveform& b) {
  if (a.size() != b.size() || a.sample_rate_hz != b.sample_rate_hz) {
    throw Error(Errc::LengthMismatch, "waveforms differ in length or sample rate");
  }
  if (a.empty()) throw Error(Errc::EmptyWaveform, "empty waveform");
}

}  // namespace

Spectrum quantization_noise_spectrum(const Waveform& original, const Waveform& quantized, std::size_t segment_len) {
  check_pair(original, quantized);
  Waveform err{std::vector<cplx>(original.size()), original.sample_rate_hz};
  for (std::size_t i = 0; i < err.size(); ++i) err.samples[i] = quantized.samples[i] - original.samples[i];
  return psd(err, segment_len);
}

double tx_snr_inband(const Waveform& original, const Waveform& quantized, Band band,
                     std::optional<double> tone_offset_hz) {
  check_pair(original, quantized);
  const std::size_t n = original.size();
  if (band.lo_hz < -0.5 * original.sample_rate_hz || band.hi_hz > 0.5 * original.sample_rate_hz ||
      band.lo_hz >= band.hi_hz) {
    throw Error(Errc::InvalidArgument, "signal band must be a non-empty interval within Nyquist");
  }
  std::vector<cplx> err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = quantized.samples[i] - original.samples[i];
  const auto S = fft::forward(original.samples);
  const auto E = fft::forward(err);
  const double df = original.sample_rate_hz / static_cast<double>(n);
  long tone_bin = 0;
  bool has_tone = false;
  if (tone_offset_hz) {
    tone_bin = std::lround(*tone_offset_hz / df);
    has_tone = true;
  }
  double ps = 0.0, pe = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const long b = fft::signed_bin(k, n);
    const double f = static_cast<double>(b) * df;
    if (f < band.lo_hz || f > band.hi_hz) continue;
    pe += std::norm(E[k]);
    if (!(has_tone && b == tone_bin)) ps += std::norm(S[k]);
  }
  if (pe == 0.0) return kNoiselessSnrDb;
  return 10.0 * std::log10(ps / pe);
}

}  // namespace kkdre
