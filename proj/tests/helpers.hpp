#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "kkdre/signal.hpp"

namespace testutil {

using kkdre::cplx;

inline std::vector<cplx> complex_noise(std::size_t n, double variance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * variance));
  std::vector<cplx> out(n);
  for (auto& v : out) {
    const double re = g(rng);
    v = cplx{re, g(rng)};
  }
  return out;
}

inline std::vector<double> real_uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = u(rng);
  return out;
}

inline double rms_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rms_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rms(std::span<const cplx> a) { return std::sqrt(kkdre::power(a)); }
inline double rms(std::span<const double> a) { return std::sqrt(kkdre::power(a)); }

inline kkdre::Waveform tone(std::size_t n, double fs, double f, double amp = 1.0, double phase = 0.0) {
  kkdre::Waveform w{std::vector<cplx>(n), fs};
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = std::polar(amp, 2.0 * kkdre::kPi * f * i / fs + phase);
  return w;
}

inline double db(double x) { return 10.0 * std::log10(x); }

}  // namespace testutil
