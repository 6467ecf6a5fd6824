#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kkdre/channel.hpp"
#include "kkdre/config.hpp"
#include "kkdre/kkrx.hpp"
#include "kkdre/metrics.hpp"
#include "kkdre/txdsp.hpp"

namespace kkdre {

struct ResultRow {
  std::string run_id;
  std::optional<int> dac_bits;
  bool dre_enabled = false;
  double cspr_target_db = 0.0;
  double cspr_measured_db = 0.0;
  std::optional<double> osnr_db;
  double fiber_km = 0.0;
  double snr_db = 0.0;
  double gmi_bits = 0.0;
  double ngmi = 0.0;
  double ber = 0.0;
  double clipped_fraction = 0.0;
  double chosen_bias = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success; metric fields are NaN otherwise

  bool ok() const { return error.empty(); }
};

// Signals up to the ADC output, for callers that drive the receiver directly.
struct LinkSignals {
  TxFrame tx;
  Waveform dac_out;
  double tone_offset_hz = 0.0;  // snapped to the frame grid
  double cspr_measured_db = 0.0;
  PdOutput pd;
  RealWaveform adc_out;
  RxContext rx;
};

// Transmitter, DAC and channel. Seeds: bits = cfg.seed, noise = cfg.seed + 1.
LinkSignals build_link(const LinkConfig& cfg);

struct RunDetail {
  ResultRow row;
  BiasChoice bias;
  RxOutput rx;
  MetricReport metrics;
  double removed_mean = 0.0;
};

// Full chain. Errors are raised as PipelineError naming the stage.
RunDetail run_detailed(const LinkConfig& cfg, const std::string& run_id = "run");
ResultRow run_single(const LinkConfig& cfg, const std::string& run_id = "run");

enum class SweepVariable { CsprDb, OsnrDb };

struct SweepSpec {
  SweepVariable variable = SweepVariable::CsprDb;
  std::vector<double> values;
  LinkConfig base;
  int repeats_per_point = 1;

  void validate() const;
};

// Point i (value-major, repeat-minor) uses seed base.seed + 1000 * i.
// Failed points are recorded in the row; the sweep continues.
std::vector<ResultRow> sweep(const SweepSpec& spec, int workers = 1);

// Mean NGMI per value over repeats (NaN-free points only) and its argmax,
// ties toward the lower value.
struct SweepSummary {
  std::vector<double> values;
  std::vector<double> mean_ngmi;
  std::size_t best_index = 0;
  bool any_ok = false;
};
SweepSummary summarize(const std::vector<ResultRow>& rows, const SweepSpec& spec);

struct GridCell {
  std::optional<int> bits;
  bool dre = false;
  double best_ngmi = 0.0;
  double optimal_cspr_db = 0.0;
  std::vector<double> mean_ngmi;  // per CSPR value
};

struct GridResult {
  std::vector<ResultRow> rows;  // all runs, cell-major
  std::vector<GridCell> cells;
};

// CSPR sweep for every (bits, dre) pair. All runs share one worker pool.
GridResult grid_bits_dre(const LinkConfig& base, const std::vector<std::optional<int>>& bits_list,
                         const std::vector<bool>& dre_modes, const std::vector<double>& cspr_values,
                         int repeats_per_point = 1, int workers = 1);

struct QuantPoint {
  double cspr_db = 0.0;
  double tx_snr_plain_db = 0.0;
  double tx_snr_dre_db = 0.0;
  Spectrum noise_plain;
  Spectrum noise_dre;
};

// Quantization noise spectra and in-band transmitter SNR with and without the
// DRE, one point per CSPR value.
std::vector<QuantPoint> analyze_quantization(const LinkConfig& base, const std::vector<double>& cspr_values,
                                             int workers = 1, std::size_t psd_segment = 4096);

// Run fn(i) for i in [0, n) on up to `workers` threads.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn);

}  // namespace kkdre

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace kkdre {

template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kkdre
