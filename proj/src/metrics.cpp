#include "kkdre/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kkdre/error.hpp"

namespace kkdre {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_bits(std::span<const cplx> eq, std::span<const std::uint8_t> bits, const ConstellationMap& map) {
  if (eq.empty()) throw Error(Errc::EmptyInput, "no symbols");
  if (bits.size() != eq.size() * static_cast<std::size_t>(map.order_m)) {
    throw Error(Errc::LengthMismatch, "bit count does not match m * symbol count");
  }
}

}  // namespace

SnrEvm snr_evm(std::span<const cplx> eq, std::span<const cplx> ref) {
  if (eq.size() != ref.size()) throw Error(Errc::LengthMismatch, "eq and ref differ in length");
  if (eq.size() < 1000) throw Error(Errc::TooShort, "SNR needs at least 1000 symbols");
  CompensatedSum cr, ci, pr;
  for (std::size_t k = 0; k < eq.size(); ++k) {
    const cplx c = eq[k] * std::conj(ref[k]);
    cr.add(c.real());
    ci.add(c.imag());
    pr.add(std::norm(ref[k]));
  }
  if (!(pr.value() > 0.0)) throw Error(Errc::NoSignalPower, "reference has zero power");
  const cplx g = cplx{cr.value(), ci.value()} / pr.value();
  CompensatedSum pe;
  for (std::size_t k = 0; k < eq.size(); ++k) pe.add(std::norm(eq[k] - g * ref[k]));
  const double p_sig = std::norm(g) * pr.value();
  const double p_err = pe.value();
  if (p_err == 0.0) return {kSnrSentinelDb, 0.0};
  if (p_sig == 0.0) return {-kSnrSentinelDb, std::numeric_limits<double>::infinity()};
  return {10.0 * std::log10(p_sig / p_err), 100.0 * std::sqrt(p_err / p_sig)};
}

GmiResult gmi_ngmi(std::span<const cplx> eq, std::span<const std::uint8_t> tx_bits, const ConstellationMap& map) {
  check_bits(eq, tx_bits, map);
  const int m = map.order_m;
  const auto labels = labels_from_bits(tx_bits, m);
  const std::size_t pts = map.size();

  double es = 0.0;
  for (const auto& p : map.points) es += std::norm(p);
  es /= static_cast<double>(pts);

  CompensatedSum dist;
  for (std::size_t k = 0; k < eq.size(); ++k) dist.add(std::norm(eq[k] - map.points[labels[k]]));
  double sigma2 = dist.value() / static_cast<double>(eq.size());
  if (!std::isfinite(sigma2)) throw Error(Errc::DegenerateVariance, "noise variance is not finite");
  sigma2 = std::max(sigma2, 1e-12 * es);

  std::vector<double> metric(pts);
  CompensatedSum penalty;
  for (std::size_t k = 0; k < eq.size(); ++k) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts; ++j) {
      metric[j] = -std::norm(eq[k] - map.points[j]) / sigma2;
      mx = std::max(mx, metric[j]);
    }
    double all = 0.0;
    for (std::size_t j = 0; j < pts; ++j) all += std::exp(metric[j] - mx);
    const double lse_all = mx + std::log(all);
    for (int b = 0; b < m; ++b) {
      const int truth = map.bit(labels[k], b);
      double smx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < pts; ++j) {
        if (map.bit(j, b) == truth) smx = std::max(smx, metric[j]);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < pts; ++j) {
        if (map.bit(j, b) == truth) s += std::exp(metric[j] - smx);
      }
      const double lse_true = smx + std::log(s);
      penalty.add(std::max(0.0, lse_all - lse_true) / std::log(2.0));
    }
  }
  GmiResult r;
  r.sigma2 = sigma2;
  r.gmi_bits = std::max(0.0, static_cast<double>(m) - penalty.value() / static_cast<double>(eq.size()));
  r.ngmi = r.gmi_bits / static_cast<double>(m);
  return r;
}

double ber(std::span<const cplx> eq, std::span<const std::uint8_t> tx_bits, const ConstellationMap& map) {
  check_bits(eq, tx_bits, map);
  const int m = map.order_m;
  std::size_t errors = 0;
  for (std::size_t k = 0; k < eq.size(); ++k) {
    const std::size_t label = map.nearest(eq[k]);
    for (int b = 0; b < m; ++b) {
      if (map.bit(label, b) != (tx_bits[k * m + b] & 1)) ++errors;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

MetricReport evaluate(std::span<const cplx> eq, std::span<const cplx> tx_symbols,
                      std::span<const std::uint8_t> tx_bits, const ConstellationMap& map) {
  MetricReport r;
  const auto se = snr_evm(eq, tx_symbols);
  r.snr_db = se.snr_db;
  r.evm_pct = se.evm_pct;
  r.ber = ber(eq, tx_bits, map);
  const auto g = gmi_ngmi(eq, tx_bits, map);
  r.gmi_bits = g.gmi_bits;
  r.ngmi = g.ngmi;
  r.n_symbols = eq.size();
  return r;
}

}  // namespace kkdre
