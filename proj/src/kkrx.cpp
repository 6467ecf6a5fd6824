#include "kkdre/kkrx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kkdre/error.hpp"
#include "kkdre/fft.hpp"
#include "kkdre/metrics.hpp"

namespace kkdre {

void KkConfig::validate() const {
  if (upsample_factor < 1) throw Error(Errc::ConfigInvariantViolated, "upsample_factor must be >= 1");
  if (!(clip_floor > 0.0)) throw Error(Errc::ConfigInvariantViolated, "clip_floor must be > 0");
  if (!(max_clipped_fraction >= 0.0 && max_clipped_fraction <= 1.0)) {
    throw Error(Errc::ConfigInvariantViolated, "max_clipped_fraction must lie in [0, 1]");
  }
}

std::vector<double> BiasSearch::default_grid() {
  std::vector<double> g(21);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.5 + 1.5 * static_cast<double>(i) / 20.0;
  return g;
}

void BiasSearch::validate() const {
  if (grid.empty()) throw Error(Errc::ConfigInvariantViolated, "bias grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw Error(Errc::ConfigInvariantViolated, "bias grid values must be > 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(Errc::ConfigInvariantViolated, "bias grid must increase");
  }
  if (metric_block_symbols < 1) throw Error(Errc::ConfigInvariantViolated, "metric block must be non-empty");
}

void EqualizerConfig::validate() const {
  if (num_taps < 1 || num_taps % 2 == 0) throw Error(Errc::ConfigInvariantViolated, "equalizer taps must be odd");
  if (!(step_mu >= 0.0)) throw Error(Errc::ConfigInvariantViolated, "step size must be >= 0");
  if (samples_per_symbol != 2) throw Error(Errc::ConfigInvariantViolated, "equalizer runs at 2 samples/symbol");
  if (training_passes < 1) throw Error(Errc::ConfigInvariantViolated, "training_passes must be >= 1");
}

std::vector<double> estimate_bias_candidates(const RealWaveform& i_ac, const BiasSearch& search) {
  search.validate();
  if (i_ac.empty()) throw Error(Errc::EmptyWaveform, "empty photocurrent");
  const auto [lo, hi] = std::minmax_element(i_ac.samples.begin(), i_ac.samples.end());
  if (*lo == *hi) throw Error(Errc::ConstantInput, "photocurrent is constant");
  const double base = -*lo;
  if (!(base > 0.0)) throw Error(Errc::ConstantInput, "photocurrent has no negative excursion");
  std::vector<double> out(search.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = search.grid[i] * base;
  return out;
}

KkResult kk_reconstruct(const RealWaveform& i_biased, const KkConfig& kk) {
  kk.validate();
  if (i_biased.empty()) throw Error(Errc::EmptyWaveform, "empty photocurrent");
  RealWaveform up = kk.upsample_factor == 1
                        ? i_biased
                        : resample(i_biased, i_biased.sample_rate_hz * kk.upsample_factor);
  const std::size_t n = up.size();
  double mean = 0.0;
  for (double v : up.samples) mean += v;
  mean /= static_cast<double>(n);
  if (!(mean > 0.0)) throw Error(Errc::NonPositiveMean, "biased photocurrent has non-positive mean");

  const double floor = kk.clip_floor * mean;
  std::size_t clipped = 0;
  std::vector<double> half_log(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (up.samples[i] < floor) {
      up.samples[i] = floor;
      ++clipped;
    }
    half_log[i] = 0.5 * std::log(up.samples[i]);
  }
  KkResult res;
  res.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  if (res.clipped_fraction > kk.max_clipped_fraction) {
    throw Error(Errc::ExcessiveClipping, "clipped fraction " + std::to_string(res.clipped_fraction));
  }
  const auto phase = hilbert(half_log);
  const double sign = kk.sideband == Sideband::Upper ? 1.0 : -1.0;
  res.field.sample_rate_hz = up.sample_rate_hz;
  res.field.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.field.samples[i] = std::polar(std::sqrt(up.samples[i]), sign * phase[i]);
  return res;
}

Waveform downconvert_and_strip_carrier(const Waveform& field, double tone_offset_hz) {
  if (field.empty()) throw Error(Errc::EmptyWaveform, "empty field");
  if (std::abs(tone_offset_hz) >= 0.5 * field.sample_rate_hz) {
    throw Error(Errc::ToneAboveNyquist, "tone offset exceeds Nyquist");
  }
  const double cycles_per_sample = tone_offset_hz / field.sample_rate_hz;
  Waveform out = field;
  cplx mean{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    double cyc = static_cast<double>(i) * cycles_per_sample;
    cyc -= std::floor(cyc);
    out.samples[i] *= std::polar(1.0, -2.0 * kPi * cyc);
    mean += out.samples[i];
  }
  mean /= static_cast<double>(out.size());
  for (auto& v : out.samples) v -= mean;
  return out;
}

Waveform matched_filter_downsample(const Waveform& w, const RrcSpec& rrc, double baud_hz) {
  rrc.validate();
  if (!(baud_hz > 0.0)) throw Error(Errc::NonPositiveRate, "baud must be > 0");
  if (w.sample_rate_hz < 2.0 * baud_hz) throw Error(Errc::RateTooLow, "sample rate below two samples per symbol");
  const double beta = rrc.rolloff_beta;
  auto filtered = filter_frequency_domain(w, [&](double f) { return root_raised_cosine(f / baud_hz, beta); });
  return resample(filtered, 2.0 * baud_hz);
}

SyncResult synchronize(std::span<const cplx> rx, std::span<const cplx> tx_symbols) {
  if (tx_symbols.size() < 1024) throw Error(Errc::TooShort, "synchronization needs at least 1024 symbols");
  if (rx.size() != 2 * tx_symbols.size()) throw Error(Errc::LengthMismatch, "rx must hold two samples per symbol");
  const std::size_t len = rx.size();
  std::vector<cplx> ref(len, cplx{});
  for (std::size_t k = 0; k < tx_symbols.size(); ++k) ref[2 * k] = tx_symbols[k];
  auto R = fft::forward(rx);
  const auto T = fft::forward(ref);
  for (std::size_t k = 0; k < len; ++k) R[k] *= std::conj(T[k]);
  const auto c = fft::inverse(R);

  std::size_t best = 0;
  double peak = -1.0, sum2 = 0.0;
  for (std::size_t d = 0; d < len; ++d) {
    const double a = std::abs(c[d]);
    sum2 += a * a;
    if (a > peak) {
      peak = a;
      best = d;
    }
  }
  const double rms = std::sqrt(sum2 / static_cast<double>(len));
  if (!(peak >= 3.0 * rms * std::sqrt(std::log(static_cast<double>(len))))) {
    throw Error(Errc::NoCorrelationPeak, "no correlation peak above the noise floor");
  }
  SyncResult out;
  out.delay = fft::signed_bin(best, len);
  out.phase = std::arg(c[best]);
  out.aligned.resize(len);
  const cplx derotate = std::polar(1.0, -out.phase);
  for (std::size_t n = 0; n < len; ++n) out.aligned[n] = rx[(n + best) % len] * derotate;
  return out;
}

LmsResult lms_equalize(std::span<const cplx> rx, std::span<const cplx> tx_symbols, const EqualizerConfig& eq,
                       std::optional<std::size_t> n_symbols) {
  eq.validate();
  if (tx_symbols.empty()) throw Error(Errc::EmptySymbols, "no reference symbols");
  if (rx.size() != 2 * tx_symbols.size()) throw Error(Errc::LengthMismatch, "rx must hold two samples per symbol");
  const std::size_t count = std::min(n_symbols.value_or(tx_symbols.size()), tx_symbols.size());
  const std::size_t taps_n = static_cast<std::size_t>(eq.num_taps);
  const std::size_t half = taps_n / 2;
  const std::size_t len = rx.size();

  double ref_power = 0.0;
  for (std::size_t k = 0; k < count; ++k) ref_power += std::norm(tx_symbols[k]);
  ref_power /= static_cast<double>(std::max<std::size_t>(count, 1));

  LmsResult res;
  res.taps.assign(taps_n, cplx{});
  res.taps[half] = 1.0;
  std::vector<cplx> window(taps_n);

  auto load = [&](std::size_t k) {
    const std::size_t start = (2 * k + len - half % len) % len;
    for (std::size_t i = 0; i < taps_n; ++i) window[i] = rx[(start + i) % len];
  };
  auto output = [&]() {
    cplx y{};
    for (std::size_t i = 0; i < taps_n; ++i) y += res.taps[i] * window[i];
    return y;
  };
  auto check = [&](double out_power) {
    if (!std::isfinite(out_power) || out_power > 100.0 * ref_power) {
      throw Error(Errc::Diverged, "equalizer output power exceeds 100x the reference");
    }
  };

  for (int pass = 0; pass < eq.training_passes; ++pass) {
    double err_acc = 0.0, out_acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      load(k);
      const cplx y = output();
      const cplx e = tx_symbols[k] - y;
      err_acc += std::norm(e);
      out_acc += std::norm(y);
      const cplx g = eq.step_mu * e;
      for (std::size_t i = 0; i < taps_n; ++i) res.taps[i] += g * std::conj(window[i]);
    }
    check(out_acc / static_cast<double>(count));
    res.training_mse.push_back(err_acc / static_cast<double>(count));
  }

  res.symbols.resize(count);
  double out_acc = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    load(k);
    res.symbols[k] = output();
    out_acc += std::norm(res.symbols[k]);
  }
  check(out_acc / static_cast<double>(count));
  return res;
}

namespace {

// Receiver chain on a photocurrent that has already been upsampled for KK.
RxOutput receive_prepared(const RealWaveform& i_up, double bias, const RxContext& ctx,
                          std::optional<std::size_t> n_symbols) {
  KkConfig kk = ctx.kk;
  kk.upsample_factor = 1;
  RealWaveform biased = i_up;
  for (auto& v : biased.samples) v += bias;

  RxOutput out;
  out.bias = bias;
  auto kk_res = with_stage("kk", [&] { return kk_reconstruct(biased, kk); });
  out.clipped_fraction = kk_res.clipped_fraction;
  auto base = with_stage("downconvert", [&] { return downconvert_and_strip_carrier(kk_res.field, ctx.downconvert_hz); });
  auto sps2 = with_stage("matched_filter", [&] { return matched_filter_downsample(base, ctx.rrc, ctx.baud_hz); });
  const double p = power(sps2);
  if (!(p > 0.0)) throw PipelineError("matched_filter", Error(Errc::NoSignalPower, "receiver output is zero"));
  const double g = 1.0 / std::sqrt(p);
  for (auto& v : sps2.samples) v *= g;

  auto sync = with_stage("sync", [&] { return synchronize(sps2.samples, ctx.tx_symbols); });
  out.delay = sync.delay;
  out.phase = sync.phase;
  auto lms = with_stage("lms", [&] { return lms_equalize(sync.aligned, ctx.tx_symbols, ctx.eq, n_symbols); });
  out.training_mse = std::move(lms.training_mse);
  out.equalized = std::move(lms.symbols);
  const std::span<const cplx> ref(ctx.tx_symbols.data(), out.equalized.size());
  out.snr_db = with_stage("metrics", [&] { return snr_evm(out.equalized, ref).snr_db; });
  return out;
}

RealWaveform upsample_for_kk(const RealWaveform& i_ac, const KkConfig& kk) {
  return with_stage("kk", [&] {
    kk.validate();
    return kk.upsample_factor == 1 ? i_ac : resample(i_ac, i_ac.sample_rate_hz * kk.upsample_factor);
  });
}

}  // namespace

RxOutput receive(const RealWaveform& i_ac, double bias, const RxContext& ctx, std::optional<std::size_t> n_symbols) {
  return receive_prepared(upsample_for_kk(i_ac, ctx.kk), bias, ctx, n_symbols);
}

BiasChoice optimize_dc_bias(const RealWaveform& i_ac, const RxContext& ctx, const BiasSearch& search) {
  BiasChoice choice;
  choice.candidates = with_stage("bias", [&] { return estimate_bias_candidates(i_ac, search); });
  const auto up = upsample_for_kk(i_ac, ctx.kk);
  const std::size_t block = std::min(search.metric_block_symbols, ctx.tx_symbols.size());
  choice.metric_db.assign(choice.candidates.size(), std::numeric_limits<double>::quiet_NaN());
  choice.failures.assign(choice.candidates.size(), "");
  bool any = false;
  for (std::size_t i = 0; i < choice.candidates.size(); ++i) {
    try {
      const auto rx = receive_prepared(up, choice.candidates[i], ctx, block);
      choice.metric_db[i] = rx.snr_db;
      if (!any || rx.snr_db > choice.metric_db[choice.index]) choice.index = i;
      any = true;
    } catch (const Error& e) {
      choice.failures[i] = e.what();
    }
  }
  if (!any) {
    throw PipelineError("bias", Error(Errc::AllCandidatesFailed, "every bias candidate failed"));
  }
  choice.bias = choice.candidates[choice.index];
  return choice;
}

}  // namespace kkdre
