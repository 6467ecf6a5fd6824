#pragma once

#include <cstdint>
#include <span>

#include "kkdre/signal.hpp"
#include "kkdre/txdsp.hpp"

namespace kkdre {

inline constexpr double kFecNgmiThreshold = 0.92;
inline constexpr double kSnrSentinelDb = 300.0;

struct SnrEvm {
  double snr_db = 0.0;
  double evm_pct = 0.0;
};

// Error after a least-squares complex gain fit of ref onto eq.
SnrEvm snr_evm(std::span<const cplx> eq, std::span<const cplx> ref);

struct GmiResult {
  double gmi_bits = 0.0;
  double ngmi = 0.0;
  double sigma2 = 0.0;
};

// Bitwise GMI with exact (log-sum-exp) LLRs under a circular Gaussian
// channel. sigma^2 is the mean squared distance to the transmitted points.
GmiResult gmi_ngmi(std::span<const cplx> eq, std::span<const std::uint8_t> tx_bits, const ConstellationMap& map);

// Hard-decision bit error ratio.
double ber(std::span<const cplx> eq, std::span<const std::uint8_t> tx_bits, const ConstellationMap& map);

struct MetricReport {
  double snr_db = 0.0;
  double evm_pct = 0.0;
  double ber = 0.0;
  double gmi_bits = 0.0;
  double ngmi = 0.0;
  std::size_t n_symbols = 0;
};

MetricReport evaluate(std::span<const cplx> eq, std::span<const cplx> tx_symbols,
                      std::span<const std::uint8_t> tx_bits, const ConstellationMap& map);

}  // namespace kkdre
