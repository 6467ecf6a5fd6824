#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "kkdre/channel.hpp"
#include "kkdre/error.hpp"
#include "kkdre/fft.hpp"
#include "kkdre/kkrx.hpp"
#include "kkdre/metrics.hpp"
#include "kkdre/txdsp.hpp"
#include "oracles.hpp"

using namespace kkdre;
using namespace testutil;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

// Relative RMS error after removing the best global phase.
double error_up_to_phase(std::span<const cplx> got, std::span<const cplx> want) {
  cplx c{};
  for (std::size_t i = 0; i < got.size(); ++i) c += want[i] * std::conj(got[i]);
  const cplx rot = std::polar(1.0, std::arg(c));
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    err += std::norm(got[i] * rot - want[i]);
    ref += std::norm(want[i]);
  }
  return std::sqrt(err / ref);
}

// Two-tone field 1 + a exp(j 2 pi f t) at fs, with f = fs / 4.
struct TwoTone {
  RealWaveform intensity;
  std::vector<cplx> field_upsampled;
};

TwoTone two_tone(double a, double f_sign, int upsample, std::size_t n = 4096, double fs = 100e9) {
  const double f = f_sign * fs / 4.0;
  TwoTone t;
  t.intensity = RealWaveform{std::vector<double>(n), fs};
  for (std::size_t i = 0; i < n; ++i) t.intensity.samples[i] = std::norm(1.0 + a * std::polar(1.0, 2 * kPi * f * i / fs));
  const std::size_t m = n * static_cast<std::size_t>(upsample);
  t.field_upsampled.resize(m);
  for (std::size_t i = 0; i < m; ++i) t.field_upsampled[i] = 1.0 + a * std::polar(1.0, 2 * kPi * f * i / (fs * upsample));
  return t;
}

std::vector<cplx> qam_symbols(std::size_t n, std::uint64_t seed, int m = 6) {
  return map_qam(generate_bits(seed, n * static_cast<std::size_t>(m)), ConstellationMap::square_qam(m));
}

}  // namespace

TEST_CASE("bias candidates") {
  Waveform w{complex_noise(8192, 0.1, 3), 80e9};
  for (auto& v : w.samples) v += 1.0;
  const auto dc = photodiode(w, PdSpec{false, 1.0});
  const auto ac = photodiode(w, PdSpec{true, 1.0});
  const auto c = estimate_bias_candidates(ac.current, BiasSearch{});
  REQUIRE(c.size() == 21);
  bool near = false;
  for (double v : c) {
    CHECK(v > 0.0);
    near = near || std::abs(v - ac.removed_mean) < 0.1 * ac.removed_mean;
  }
  CHECK(near);
  double mean = 0.0;
  for (double v : dc.current.samples) mean += v;
  CHECK(ac.removed_mean == doctest::Approx(mean / 8192));

  BiasSearch single;
  single.grid = {1.0};
  const auto one = estimate_bias_candidates(ac.current, single);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == -*std::min_element(ac.current.samples.begin(), ac.current.samples.end()));

  RealWaveform flat{std::vector<double>(100, 0.0), 1e9};
  CHECK(code_of([&] { estimate_bias_candidates(flat, BiasSearch{}); }) == Errc::ConstantInput);
  BiasSearch bad;
  bad.grid = {1.0, 0.5};
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigInvariantViolated);
  bad.grid = {};
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigInvariantViolated);
  bad.grid = {-1.0};
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigInvariantViolated);
}

TEST_CASE("KK on a constant photocurrent") {
  RealWaveform i{std::vector<double>(256, 4.0), 80e9};
  const auto r = kk_reconstruct(i, KkConfig{});
  CHECK(r.field.size() == 512);
  CHECK(r.field.sample_rate_hz == 160e9);
  for (const auto& v : r.field.samples) {
    CHECK(v.real() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
  CHECK(r.clipped_fraction == 0.0);
}

TEST_CASE("KK reconstructs a minimum-phase field") {
  KkConfig kk;
  kk.sideband = Sideband::Upper;
  const auto up = two_tone(0.3, +1.0, 2);
  CHECK(error_up_to_phase(kk_reconstruct(up.intensity, kk).field.samples, up.field_upsampled) < 1e-3);

  kk.sideband = Sideband::Lower;
  const auto lo = two_tone(0.3, -1.0, 2);
  CHECK(error_up_to_phase(kk_reconstruct(lo.intensity, kk).field.samples, lo.field_upsampled) < 1e-3);

  kk.upsample_factor = 4;
  kk.sideband = Sideband::Upper;
  const auto up4 = two_tone(0.3, +1.0, 4);
  CHECK(error_up_to_phase(kk_reconstruct(up4.intensity, kk).field.samples, up4.field_upsampled) < 1e-5);
}

TEST_CASE("KK fails gracefully without the minimum-phase condition") {
  KkConfig kk;
  kk.sideband = Sideband::Upper;
  kk.max_clipped_fraction = 1.0;
  const auto good = two_tone(0.3, +1.0, 2);
  const auto bad = two_tone(1.5, +1.0, 2);
  const double e_good = error_up_to_phase(kk_reconstruct(good.intensity, kk).field.samples, good.field_upsampled);
  const double e_bad = error_up_to_phase(kk_reconstruct(bad.intensity, kk).field.samples, bad.field_upsampled);
  CHECK(20.0 * std::log10(e_bad / e_good) > 20.0);
}

TEST_CASE("KK errors") {
  RealWaveform neg{std::vector<double>(64, -1.0), 1e9};
  CHECK(code_of([&] { kk_reconstruct(neg, KkConfig{}); }) == Errc::NonPositiveMean);
  RealWaveform dips{std::vector<double>(1000, 1.0), 1e9};
  for (std::size_t i = 0; i < 50; ++i) dips.samples[i * 20] = -0.5;
  KkConfig kk;
  kk.upsample_factor = 1;
  CHECK(code_of([&] { kk_reconstruct(dips, kk); }) == Errc::ExcessiveClipping);
  kk.max_clipped_fraction = 0.1;
  CHECK(kk_reconstruct(dips, kk).clipped_fraction == doctest::Approx(0.05));
  CHECK(code_of([] { KkConfig{0, 1e-6}.validate(); }) == Errc::ConfigInvariantViolated);
  CHECK(code_of([] { KkConfig{2, 0.0}.validate(); }) == Errc::ConfigInvariantViolated);
}

TEST_CASE("downconversion and carrier removal") {
  const double fs = 160e9;
  const std::size_t n = 16000;
  const double f0 = 14e9;
  const auto carrier = tone(n, fs, f0, 3.0, 0.4);
  const auto out = downconvert_and_strip_carrier(carrier, f0);
  CHECK(rms(out.samples) < 1e-6 * rms(carrier.samples));

  Waveform mixed = carrier;
  const auto small = complex_noise(n, 0.01, 4);
  for (std::size_t i = 0; i < n; ++i) mixed.samples[i] += small[i];
  auto shifted = mixed;
  for (std::size_t i = 0; i < n; ++i) shifted.samples[i] *= std::polar(1.0, -2 * kPi * f0 * i / fs);
  const auto X0 = fft::forward(shifted.samples);
  const auto X1 = fft::forward(downconvert_and_strip_carrier(mixed, f0).samples);
  CHECK(db(std::norm(X0[0]) / std::max(std::norm(X1[0]), 1e-300)) >= 40.0);

  Waveform plain{complex_noise(100, 1.0, 5), 1e9};
  const auto z = downconvert_and_strip_carrier(plain, 0.0);
  cplx mean{};
  for (const auto& v : plain.samples) mean += v;
  mean /= 100.0;
  for (std::size_t i = 0; i < 100; ++i) CHECK(std::abs(z.samples[i] - (plain.samples[i] - mean)) < 1e-14);
}

TEST_CASE("matched filter recovers the symbols exactly") {
  const auto sym = qam_symbols(5120, 8);
  const RrcSpec rrc{0.01, 4, 64};
  const auto tx = pulse_shape(sym, rrc, 25e9);
  const auto rx = matched_filter_downsample(resample(tx, 80e9), rrc, 25e9);
  CHECK(rx.sample_rate_hz == 50e9);
  REQUIRE(rx.size() == 2 * sym.size());
  const auto s = synchronize(rx.samples, sym);
  CHECK(s.delay == 0);
  std::vector<cplx> at_symbols(sym.size());
  for (std::size_t k = 0; k < sym.size(); ++k) at_symbols[k] = s.aligned[2 * k];
  CHECK(rms_diff(at_symbols, sym) < 1e-6);
}

TEST_CASE("matched filter noise bandwidth") {
  Waveform noise{complex_noise(1 << 17, 1.0, 6), 100e9};
  const auto out = matched_filter_downsample(noise, RrcSpec{}, 25e9);
  // unit-variance noise over 100 GHz; the filter passes baud * (1 + beta) worth, integral of RC = baud
  const double ratio = power(out) / power(noise);
  CHECK(ratio == doctest::Approx(25e9 * 1.01 / 100e9).epsilon(0.03));
  CHECK(code_of([&] { matched_filter_downsample(Waveform{noise.samples, 40e9}, RrcSpec{}, 25e9); }) == Errc::RateTooLow);
}

TEST_CASE("synchronization") {
  const auto sym = qam_symbols(4096, 9);
  std::vector<cplx> ref(2 * sym.size(), cplx{});
  for (std::size_t k = 0; k < sym.size(); ++k) ref[2 * k] = sym[k];

  std::vector<cplx> rx(ref.size());
  for (std::size_t i = 0; i < rx.size(); ++i) rx[(i + 37) % rx.size()] = ref[i] * std::polar(1.0, 0.7);
  auto s = synchronize(rx, sym);
  CHECK(s.delay == 37);
  CHECK(s.phase == doctest::Approx(0.7).epsilon(0.01 / 0.7));
  CHECK(rms_diff(s.aligned, ref) < 1e-12);

  s = synchronize(ref, sym);
  CHECK(s.delay == 0);
  CHECK(std::abs(s.phase) < 0.01);

  for (std::size_t i = 0; i < rx.size(); ++i) rx[(i + rx.size() - 5) % rx.size()] = ref[i];
  CHECK(synchronize(rx, sym).delay == -5);

  const auto noise = complex_noise(ref.size(), 1.0, 10);
  CHECK(code_of([&] { synchronize(noise, sym); }) == Errc::NoCorrelationPeak);
  CHECK(code_of([&] { synchronize(std::span(noise).first(100), std::span(sym).first(50)); }) == Errc::TooShort);
  CHECK(code_of([&] { synchronize(std::span(noise).first(100), sym); }) == Errc::LengthMismatch);
}

TEST_CASE("LMS on an ideal channel") {
  const auto sym = qam_symbols(16384, 11);
  std::vector<cplx> rx(2 * sym.size(), cplx{});
  for (std::size_t k = 0; k < sym.size(); ++k) rx[2 * k] = sym[k];
  const auto r = lms_equalize(rx, sym, EqualizerConfig{});
  CHECK(snr_evm(r.symbols, sym).snr_db > 40.0);

  EqualizerConfig frozen;
  frozen.step_mu = 0.0;
  const auto z = lms_equalize(rx, sym, frozen);
  CHECK(z.symbols == sym);
  CHECK(z.taps[25] == cplx{1.0, 0.0});

  const auto limited = lms_equalize(rx, sym, EqualizerConfig{}, 2000);
  CHECK(limited.symbols.size() == 2000);
}

TEST_CASE("LMS approaches the Wiener solution on an ISI channel") {
  const std::size_t n = 32768;
  const auto sym = qam_symbols(n, 12, 4);
  const RrcSpec rrc{0.1, 2, 64};
  const auto shaped = pulse_shape(sym, rrc, 25e9);
  const std::size_t len = shaped.size();
  Waveform chan{std::vector<cplx>(len), shaped.sample_rate_hz};
  const auto noise = complex_noise(len, 0.01, 13);
  for (std::size_t i = 0; i < len; ++i) {
    chan.samples[i] = 0.2 * shaped.samples[(i + 2) % len] + shaped.samples[i] - 0.1 * shaped.samples[(i + len - 2) % len] + noise[i];
  }
  const auto rx = matched_filter_downsample(chan, rrc, 25e9);
  const EqualizerConfig eq;
  const auto r = lms_equalize(rx.samples, sym, eq);
  const double snr_lms = snr_evm(r.symbols, sym).snr_db;

  // Wiener filter over the same 51-sample windows
  const std::size_t t = 51, half = 25;
  std::vector<cplx> R(t * t, cplx{}), p(t, cplx{});
  auto window = [&](std::size_t k, std::size_t i) { return rx.samples[(2 * k + i + len - half) % len]; };
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < t; ++i) {
      const cplx xi = window(k, i);
      p[i] += std::conj(xi) * sym[k];
      for (std::size_t j = 0; j < t; ++j) R[i * t + j] += std::conj(xi) * window(k, j);
    }
  }
  const auto w = oracle::solve(R, p);
  std::vector<cplx> wiener(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx y{};
    for (std::size_t i = 0; i < t; ++i) y += w[i] * window(k, i);
    wiener[k] = y;
  }
  const double snr_mmse = snr_evm(wiener, sym).snr_db;
  CHECK(snr_lms > snr_mmse - 3.0);
  CHECK(snr_lms <= snr_mmse + 0.1);
  for (std::size_t i = 1; i < r.training_mse.size(); ++i) CHECK(r.training_mse[i] <= r.training_mse[i - 1]);
}

TEST_CASE("LMS divergence and configuration") {
  const auto sym = qam_symbols(4096, 14);
  std::vector<cplx> rx(2 * sym.size(), cplx{});
  for (std::size_t k = 0; k < sym.size(); ++k) rx[2 * k] = 3.0 * sym[k];
  EqualizerConfig wild;
  wild.step_mu = 5.0;
  CHECK(code_of([&] { lms_equalize(rx, sym, wild); }) == Errc::Diverged);
  EqualizerConfig even;
  even.num_taps = 50;
  CHECK(code_of([&] { lms_equalize(rx, sym, even); }) == Errc::ConfigInvariantViolated);
  CHECK(code_of([&] { lms_equalize(std::span(rx).first(10), sym, EqualizerConfig{}); }) == Errc::LengthMismatch);
}
