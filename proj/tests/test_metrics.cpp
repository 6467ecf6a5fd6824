#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "kkdre/error.hpp"
#include "kkdre/metrics.hpp"
#include "kkdre/txdsp.hpp"
#include "oracles.hpp"

using namespace kkdre;
using namespace testutil;

namespace {

struct Frame {
  Bits bits;
  std::vector<cplx> symbols;
  ConstellationMap map;
};

Frame frame(int m, std::size_t n, std::uint64_t seed) {
  Frame f;
  f.map = ConstellationMap::square_qam(m);
  f.bits = generate_bits(seed, n * static_cast<std::size_t>(m));
  f.symbols = map_qam(f.bits, f.map);
  return f;
}

std::vector<cplx> awgn(std::span<const cplx> x, double variance, std::uint64_t seed) {
  auto out = complex_noise(x.size(), variance, seed);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += x[i];
  return out;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("SNR and EVM") {
  const auto f = frame(6, 100000, 1);
  auto r = snr_evm(f.symbols, f.symbols);
  CHECK(r.snr_db == kSnrSentinelDb);
  CHECK(r.evm_pct == 0.0);

  std::vector<cplx> scaled(f.symbols);
  for (auto& v : scaled) v *= cplx{0.5, 0.5};
  CHECK(snr_evm(scaled, f.symbols).snr_db > 250.0);

  const auto noisy = awgn(f.symbols, 0.1, 2);
  r = snr_evm(noisy, f.symbols);
  CHECK(r.snr_db == doctest::Approx(10.0).epsilon(0.02));
  CHECK(r.evm_pct == doctest::Approx(100.0 * std::sqrt(0.1)).epsilon(0.02));

  std::vector<cplx> noisy_scaled(noisy);
  for (auto& v : noisy_scaled) v *= 3.0;
  CHECK(snr_evm(noisy_scaled, f.symbols).snr_db == doctest::Approx(r.snr_db).epsilon(1e-9));

  CHECK(code_of([&] { snr_evm(std::span(noisy).first(999), std::span(f.symbols).first(999)); }) == Errc::TooShort);
  CHECK(code_of([&] { snr_evm(std::span(noisy).first(2000), std::span(f.symbols).first(2001)); }) == Errc::LengthMismatch);
}

TEST_CASE("GMI of a noiseless constellation") {
  for (int m : {2, 4, 6}) {
    const auto f = frame(m, 8192, 3);
    const auto g = gmi_ngmi(f.symbols, f.bits, f.map);
    CHECK(g.ngmi >= 0.999);
    CHECK(g.ngmi <= 1.0);
    CHECK(g.gmi_bits == doctest::Approx(g.ngmi * m));
  }
}

TEST_CASE("QPSK GMI matches the BPSK capacity integral") {
  const auto f = frame(2, 200000, 4);
  for (double es_n0_db : {0.0, 4.0, 8.0}) {
    const double n0 = std::pow(10.0, -es_n0_db / 10.0);
    const auto rx = awgn(f.symbols, n0, 5);
    const auto g = gmi_ngmi(rx, f.bits, f.map);
    CHECK(g.gmi_bits == doctest::Approx(oracle::qpsk_gmi(es_n0_db)).epsilon(0.01 / 2));
    CHECK(g.sigma2 == doctest::Approx(n0).epsilon(0.02));
  }
}

TEST_CASE("GMI bounds and order independence") {
  const auto f = frame(6, 20000, 6);
  double prev = -1.0;
  for (double var : {1.0, 0.3, 0.1, 0.03, 0.01}) {
    const auto g = gmi_ngmi(awgn(f.symbols, var, 7), f.bits, f.map);
    CHECK(g.ngmi >= 0.0);
    CHECK(g.ngmi <= 1.0);
    CHECK(g.ngmi > prev);
    prev = g.ngmi;
  }

  const auto rx = awgn(f.symbols, 0.05, 8);
  std::vector<cplx> rx_rev(rx.rbegin(), rx.rend());
  std::vector<cplx> sym_rev(f.symbols.rbegin(), f.symbols.rend());
  Bits bits_rev;
  for (std::size_t s = f.symbols.size(); s-- > 0;) {
    bits_rev.insert(bits_rev.end(), f.bits.begin() + static_cast<long>(s * 6), f.bits.begin() + static_cast<long>(s * 6 + 6));
  }
  const double a = gmi_ngmi(rx, f.bits, f.map).ngmi;
  const double b = gmi_ngmi(rx_rev, bits_rev, f.map).ngmi;
  CHECK(std::abs(a - b) < 1e-12);

  CHECK(code_of([&] { gmi_ngmi(rx, std::span(f.bits).first(60), f.map); }) == Errc::LengthMismatch);
}

TEST_CASE("BER") {
  const auto f = frame(2, 5000000, 9);
  CHECK(ber(f.symbols, f.bits, f.map) == 0.0);

  // QPSK: BER = Q(sqrt(Es/N0)), here ~1e-5
  const double es_n0_db = 12.6;
  const double n0 = std::pow(10.0, -es_n0_db / 10.0);
  const double measured = ber(awgn(f.symbols, n0, 10), f.bits, f.map);
  const double expected = oracle::q_function(std::sqrt(1.0 / n0));
  CHECK(measured > expected / 3.0);
  CHECK(measured < expected * 3.0);

  const auto g = frame(4, 100000, 11);
  const auto noise = complex_noise(g.symbols.size(), 1.0, 12);
  CHECK(ber(noise, g.bits, g.map) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(code_of([&] { ber(noise, std::span(g.bits).first(8), g.map); }) == Errc::LengthMismatch);
}

TEST_CASE("BER and NGMI rank links consistently") {
  const auto f = frame(6, 50000, 13);
  const auto better = evaluate(awgn(f.symbols, 0.01, 14), f.symbols, f.bits, f.map);
  const auto worse = evaluate(awgn(f.symbols, 0.03, 15), f.symbols, f.bits, f.map);
  REQUIRE(better.ngmi - worse.ngmi > 0.01);
  CHECK(better.ber < worse.ber);
  CHECK(better.snr_db > worse.snr_db);
  CHECK(better.n_symbols == 50000);
}
