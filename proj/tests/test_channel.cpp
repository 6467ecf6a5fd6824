#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "kkdre/channel.hpp"
#include "kkdre/dre.hpp"
#include "kkdre/error.hpp"
#include "kkdre/fft.hpp"
#include "kkdre/txdsp.hpp"

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

Waveform signal_with_tone(double cspr_db, std::size_t n_symbols = 16384) {
  TxSettings s;
  s.n_symbols = n_symbols;
  s.tone = ToneSpec{snap_to_frame_bin(13.9e9, n_symbols * 4, 100e9), cspr_db};
  return build_tx_frame(s, 2).waveform;
}

// Lag maximizing |sum y[n + d] conj(x[n])|, signed.
long xcorr_peak(const Waveform& y, const Waveform& x) {
  auto Y = fft::forward(y.samples);
  const auto X = fft::forward(x.samples);
  for (std::size_t k = 0; k < Y.size(); ++k) Y[k] *= std::conj(X[k]);
  const auto c = fft::inverse(Y);
  std::size_t best = 0;
  for (std::size_t d = 1; d < c.size(); ++d) {
    if (std::abs(c[d]) > std::abs(c[best])) best = d;
  }
  return fft::signed_bin(best, c.size());
}

}  // namespace

TEST_CASE("optical band-pass") {
  const auto w = signal_with_tone(8.7);
  const double edge = 0.5 * 25e9 * 1.01;
  const double f0 = snap_to_frame_bin(13.9e9, w.size(), 100e9);
  const double centre = bpf_center_for(edge, f0);
  CHECK(centre == doctest::Approx(0.5 * (f0 - edge)));
  const auto out = optical_bpf(w, 40e9, centre);
  CHECK(rms_diff(out.samples, w.samples) < 1e-12);

  // a 20 GHz filter centred at 0 drops the tone
  const auto cut = optical_bpf(w, 20e9, 0.0);
  CHECK(measure_cspr(cut, f0) < -40.0);

  Waveform noise{complex_noise(1 << 16, 1.0, 3), 100e9};
  CHECK(power(optical_bpf(noise, 40e9)) / power(noise) == doctest::Approx(0.4).epsilon(0.02));

  CHECK(code_of([&] { optical_bpf(w, 120e9); }) == Errc::BandExceedsNyquist);
  CHECK(code_of([&] { optical_bpf(w, 0.0); }) == Errc::BandExceedsNyquist);
}

TEST_CASE("chromatic dispersion: identity, inverse, energy") {
  Waveform w{complex_noise(1 << 14, 1.0, 5), 100e9};
  FiberSpec none{0.0, 17.0, 193.4};
  CHECK(apply_cd(w, none).samples == w.samples);

  FiberSpec fwd{50.0, 17.0, 193.4};
  FiberSpec inv{50.0, -17.0, 193.4};
  const auto there = apply_cd(w, fwd);
  CHECK(std::abs(power(there) - power(w)) / power(w) < 1e-9);
  CHECK(rms_diff(apply_cd(there, inv).samples, w.samples) / rms(w.samples) < 1e-9);
  CHECK(rms_diff(there.samples, w.samples) > 0.1);

  CHECK(code_of([] { FiberSpec{-1.0, 17.0, 193.4}.validate(); }) == Errc::ConfigInvariantViolated);
  CHECK(code_of([] { FiberSpec{1.0, 17.0, 0.0}.validate(); }) == Errc::ConfigInvariantViolated);
}

TEST_CASE("chromatic dispersion group delay between tones 10 GHz apart") {
  const double fs = 100e9;
  const std::size_t n = 8192;
  auto pulse_at = [&](double f) {
    Waveform w{std::vector<cplx>(n), fs};
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (static_cast<double>(i) - n / 2.0) / fs;
      w.samples[i] = std::exp(-0.5 * t * t / (300e-12 * 300e-12)) * std::polar(1.0, 2 * kPi * f * t);
    }
    return w;
  };
  const FiberSpec fiber{50.0, 17.0, 193.4};
  const auto lo = pulse_at(-5e9), hi = pulse_at(5e9);
  const long d_lo = xcorr_peak(apply_cd(lo, fiber), lo);
  const long d_hi = xcorr_peak(apply_cd(hi, fiber), hi);
  const double lambda = kSpeedOfLight / 193.4e12;
  const double expect = 17e-6 * 50e3 * lambda * lambda * 10e9 / kSpeedOfLight;
  CHECK(expect == doctest::Approx(68e-12).epsilon(0.01));
  CHECK(std::abs(std::abs(static_cast<double>(d_hi - d_lo)) / fs - expect) <= 1.0 / fs);
}

TEST_CASE("OSNR loading") {
  const auto w = signal_with_tone(8.7);
  CHECK(load_osnr(w, OsnrSpec{}, 1).samples == w.samples);

  const auto loaded = load_osnr(w, OsnrSpec{30.0, 12.5e9}, 7);
  CHECK(std::abs(measure_osnr(loaded, 20e9, 45e9) - 30.0) < 0.2);
  CHECK(load_osnr(w, OsnrSpec{30.0, 12.5e9}, 7).samples == loaded.samples);

  for (double target : {15.0, 25.0, 35.0}) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      CHECK(std::abs(measure_osnr(load_osnr(w, OsnrSpec{target, 12.5e9}, seed), 20e9, 45e9) - target) < 0.2);
    }
  }

  auto noise_power = [&](double target) {
    const auto out = load_osnr(w, OsnrSpec{target, 12.5e9}, 99);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += std::norm(out.samples[i] - w.samples[i]);
    return acc;
  };
  CHECK(noise_power(20.0) / noise_power(26.0) == doctest::Approx(std::pow(10.0, 0.6)).epsilon(0.01));
  CHECK(osnr_noise_variance(1.0, 100e9, OsnrSpec{20.0, 12.5e9}) == doctest::Approx(8.0 / 100.0));
  CHECK(code_of([] { OsnrSpec{20.0, 0.0}.validate(); }) == Errc::ConfigInvariantViolated);
}

TEST_CASE("CSPR measurement") {
  Waveform sig{complex_noise(1 << 15, 1.0, 8), 100e9};
  const double scale = 1.0 / rms(sig.samples);
  for (auto& v : sig.samples) v *= scale;
  const double f0 = snap_to_frame_bin(13.9e9, sig.size(), 100e9);
  const auto t = tone(sig.size(), 100e9, f0, 2.0);
  Waveform sum = sig;
  for (std::size_t i = 0; i < sum.size(); ++i) sum.samples[i] += t.samples[i];
  CHECK(measure_cspr(sum, f0) == doctest::Approx(10 * std::log10(4.0)).epsilon(0.05 / 6.02));

  CHECK(measure_cspr(sig, f0) < -40.0);
  CHECK(code_of([&] { measure_cspr(t, f0); }) == Errc::NoSignalPower);
  CHECK(code_of([&] { measure_cspr(t, 60e9); }) == Errc::ToneAboveNyquist);

}

TEST_CASE("CSPR round trip with and without quantization") {
  const QuantizerSpec q{6, 1.0};
  const DreSettings dre{design_shaping_filter(15.9e9, 100e9, 5), DreConfig{}};
  for (double cspr = 0.0; cspr <= 20.0; cspr += 4.0) {
    CAPTURE(cspr);
    const auto w = signal_with_tone(cspr);
    const double f0 = snap_to_frame_bin(13.9e9, w.size(), 100e9);
    CHECK(std::abs(measure_cspr(w, f0) - cspr) < 0.05);
    CHECK(std::abs(measure_cspr(quantize_waveform(w, q), f0) - cspr) < 0.3);
    const auto shaped = quantize_waveform(w, q, dre);
    if (cspr <= 16.0) CHECK(std::abs(measure_cspr(shaped, f0) - cspr) < 0.3);

    // The shift is the quantization noise counted as signal power.
    const double tone_power = power(w) * std::pow(10.0, cspr / 10.0) / (1.0 + std::pow(10.0, cspr / 10.0));
    std::vector<cplx> err(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) err[i] = shaped.samples[i] - w.samples[i];
    const double predicted = cspr - db(1.0 + power(std::span<const cplx>(err)) / (power(w) - tone_power));
    CHECK(std::abs(measure_cspr(shaped, f0) - predicted) < 0.05);
  }
}

TEST_CASE("photodiode") {
  Waveform flat{std::vector<cplx>(64, cplx{1.5, 0.0}), 1e9};
  const auto dc = photodiode(flat, PdSpec{false, 1.0});
  for (double v : dc.current.samples) CHECK(v == 2.25);
  const auto ac = photodiode(flat, PdSpec{true, 1.0});
  for (double v : ac.current.samples) CHECK(v == 0.0);
  CHECK(ac.removed_mean == 2.25);

  const std::size_t n = 1000;
  Waveform two = tone(n, 100e9, 10e9);
  const auto other = tone(n, 100e9, 3e9);
  for (std::size_t i = 0; i < n; ++i) two.samples[i] += other.samples[i];
  const auto beat = photodiode(two, PdSpec{true, 1.0});
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(beat.current.samples[i] - 2.0 * std::cos(2 * kPi * 7e9 * i / 100e9)));
  }
  CHECK(worst < 1e-12);

  const auto w = signal_with_tone(8.7);
  const auto i_dc = photodiode(w, PdSpec{false, 1.0});
  double mean = 0.0;
  for (double v : i_dc.current.samples) {
    CHECK(v >= 0.0);
    mean += v;
  }
  CHECK(mean / w.size() == doctest::Approx(power(w)).epsilon(1e-12));

  // rotations by multiples of pi/2 are exact, so the photocurrent is bit-identical
  for (cplx rot : {cplx{0, 1}, cplx{-1, 0}, cplx{0, -1}}) {
    Waveform r = w;
    for (auto& v : r.samples) v *= rot;
    CHECK(photodiode(r, PdSpec{}).current.samples == photodiode(w, PdSpec{}).current.samples);
  }
  Waveform r = w;
  for (auto& v : r.samples) v *= std::polar(1.0, 0.37);
  CHECK(rms_diff(photodiode(r, PdSpec{}).current.samples, photodiode(w, PdSpec{}).current.samples) < 1e-14);

  CHECK(code_of([&] { photodiode(w, PdSpec{true, 0.0}); }) == Errc::ConfigInvariantViolated);
}

TEST_CASE("ADC") {
  RealWaveform x{real_uniform(1000, -1, 1, 4), 80e9};
  CHECK(adc(x, 80e9).samples == x.samples);

  RealWaveform c{std::vector<double>(10000), 100e9};
  for (std::size_t i = 0; i < c.size(); ++i) c.samples[i] = std::cos(2 * kPi * 10e9 * i / 100e9);
  const auto d = adc(c, 80e9);
  REQUIRE(d.size() == 8000);
  const auto X = fft::forward_real(d.samples);
  std::size_t best = 0;
  for (std::size_t k = 0; k < X.size() / 2; ++k) {
    if (std::abs(X[k]) > std::abs(X[best])) best = k;
  }
  CHECK(best * 80e9 / 8000 == doctest::Approx(10e9));

  const auto q = adc(c, 80e9, 8);
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    err += (q.samples[i] - d.samples[i]) * (q.samples[i] - d.samples[i]);
    peak = std::max(peak, std::abs(d.samples[i]));
  }
  err /= static_cast<double>(d.size());
  const double step = 2.0 * peak / 256.0;
  CHECK(std::abs(db(err / (step * step / 12.0))) < 3.0);

  CHECK(code_of([&] { adc(c, 0.0); }) == Errc::NonPositiveRate);
}
