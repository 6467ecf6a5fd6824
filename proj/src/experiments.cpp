#include "kkdre/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "kkdre/dre.hpp"
#include "kkdre/error.hpp"

namespace kkdre {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

ResultRow row_identity(const LinkConfig& cfg, const std::string& run_id) {
  ResultRow r;
  r.run_id = run_id;
  r.dac_bits = cfg.dac_bits;
  r.dre_enabled = cfg.dre_enabled;
  r.cspr_target_db = cfg.tone.cspr_db;
  r.osnr_db = cfg.osnr.target_db;
  r.fiber_km = cfg.fiber.length_km;
  r.seed = cfg.seed;
  return r;
}

ResultRow failed_row(const LinkConfig& cfg, const std::string& run_id, const std::string& error) {
  ResultRow r = row_identity(cfg, run_id);
  r.cspr_measured_db = r.snr_db = r.gmi_bits = r.ngmi = r.ber = r.clipped_fraction = r.chosen_bias = kNaN;
  r.error = error.empty() ? "unknown error" : error;
  return r;
}

ResultRow guarded_run(const LinkConfig& cfg, const std::string& run_id) {
  try {
    return run_single(cfg, run_id);
  } catch (const std::exception& e) {
    return failed_row(cfg, run_id, e.what());
  }
}

double tone_for(const LinkConfig& cfg) {
  return snap_to_frame_bin(cfg.tone.offset_hz, cfg.n_symbols * static_cast<std::size_t>(cfg.sps_dac),
                           cfg.dac_rate_hz());
}

Waveform quantize_dac(const Waveform& w, const LinkConfig& cfg, bool dre) {
  const QuantizerSpec q{*cfg.dac_bits, 1.0};
  std::optional<DreSettings> settings;
  if (dre) {
    settings = DreSettings{design_shaping_filter(cfg.shaping_edge_hz(), cfg.dac_rate_hz(), cfg.shaping.n_taps),
                           cfg.dre};
  }
  return quantize_waveform(w, q, settings);
}

}  // namespace

LinkSignals build_link(const LinkConfig& cfg) {
  with_stage("config", [&] { cfg.validate(); });
  LinkSignals s;
  s.tone_offset_hz = tone_for(cfg);

  TxSettings tx{cfg.modulation_m, cfg.n_symbols, cfg.baud_hz, cfg.rrc(), ToneSpec{s.tone_offset_hz, cfg.tone.cspr_db}};
  s.tx = with_stage("tx", [&] { return build_tx_frame(tx, cfg.seed); });
  s.dac_out = with_stage("dac", [&] {
    return cfg.dac_bits ? quantize_dac(s.tx.waveform, cfg, cfg.dre_enabled) : s.tx.waveform;
  });
  s.cspr_measured_db = with_stage("cspr", [&] { return measure_cspr(s.dac_out, s.tone_offset_hz); });

  s.adc_out = with_stage("channel", [&] {
    const double center = bpf_center_for(cfg.signal_edge_hz(), s.tone_offset_hz);
    auto optical = optical_bpf(s.dac_out, cfg.obpf_bandwidth_hz, center);
    optical = load_osnr(optical, cfg.osnr, cfg.seed + 1);
    optical = optical_bpf(optical, cfg.obpf_bandwidth_hz, center);
    optical = apply_cd(optical, cfg.fiber);
    s.pd = photodiode(optical, cfg.pd);
    return adc(s.pd.current, cfg.adc_rate_hz, cfg.adc_bits);
  });

  s.rx.kk = cfg.kk;
  s.rx.kk.sideband = s.tone_offset_hz > 0.0 ? Sideband::Lower : Sideband::Upper;
  s.rx.rrc = cfg.rrc();
  s.rx.baud_hz = cfg.baud_hz;
  s.rx.downconvert_hz = -s.tone_offset_hz;
  s.rx.eq = cfg.eq;
  s.rx.tx_symbols = s.tx.symbols;
  return s;
}

RunDetail run_detailed(const LinkConfig& cfg, const std::string& run_id) {
  const auto link = build_link(cfg);
  RunDetail d;
  d.removed_mean = link.pd.removed_mean;
  d.bias = optimize_dc_bias(link.adc_out, link.rx, cfg.bias);
  d.rx = receive(link.adc_out, d.bias.bias, link.rx);
  d.metrics = with_stage("metrics", [&] {
    return evaluate(d.rx.equalized, link.tx.symbols, link.tx.bits, ConstellationMap::square_qam(cfg.modulation_m));
  });
  ResultRow& r = d.row;
  r = row_identity(cfg, run_id);
  r.cspr_measured_db = link.cspr_measured_db;
  r.snr_db = d.metrics.snr_db;
  r.gmi_bits = d.metrics.gmi_bits;
  r.ngmi = d.metrics.ngmi;
  r.ber = d.metrics.ber;
  r.clipped_fraction = d.rx.clipped_fraction;
  r.chosen_bias = d.bias.bias;
  return d;
}

ResultRow run_single(const LinkConfig& cfg, const std::string& run_id) { return run_detailed(cfg, run_id).row; }

void SweepSpec::validate() const {
  if (values.empty()) throw Error(Errc::InvalidConfig, "sweep values are empty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw Error(Errc::InvalidConfig, "sweep values must be strictly increasing");
  }
  if (repeats_per_point < 1) throw Error(Errc::InvalidConfig, "repeats_per_point must be >= 1");
  base.validate();
}

namespace {

LinkConfig point_config(const LinkConfig& base, SweepVariable var, double value, std::size_t index) {
  LinkConfig cfg = base;
  if (var == SweepVariable::CsprDb) {
    cfg.tone.cspr_db = value;
  } else {
    cfg.osnr.target_db = value;
  }
  cfg.seed = base.seed + 1000 * static_cast<std::uint64_t>(index);
  return cfg;
}

std::string point_id(SweepVariable var, double value, int repeat) {
  return std::string(var == SweepVariable::CsprDb ? "cspr_db=" : "osnr_db=") + format_g(value) + "/r" +
         std::to_string(repeat);
}

}  // namespace

std::vector<ResultRow> sweep(const SweepSpec& spec, int workers) {
  spec.validate();
  const std::size_t reps = static_cast<std::size_t>(spec.repeats_per_point);
  const std::size_t n = spec.values.size() * reps;
  std::vector<ResultRow> rows(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const double v = spec.values[i / reps];
    rows[i] = guarded_run(point_config(spec.base, spec.variable, v, i), point_id(spec.variable, v, static_cast<int>(i % reps)));
  });
  return rows;
}

SweepSummary summarize(const std::vector<ResultRow>& rows, const SweepSpec& spec) {
  const std::size_t reps = static_cast<std::size_t>(spec.repeats_per_point);
  if (rows.size() != spec.values.size() * reps) throw Error(Errc::LengthMismatch, "row count does not match sweep");
  SweepSummary s;
  s.values = spec.values;
  s.mean_ngmi.assign(spec.values.size(), kNaN);
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    double acc = 0.0;
    std::size_t ok = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& row = rows[v * reps + r];
      if (row.ok() && std::isfinite(row.ngmi)) {
        acc += row.ngmi;
        ++ok;
      }
    }
    if (ok == 0) continue;
    s.mean_ngmi[v] = acc / static_cast<double>(ok);
    if (!s.any_ok || s.mean_ngmi[v] > s.mean_ngmi[s.best_index]) s.best_index = v;
    s.any_ok = true;
  }
  return s;
}

GridResult grid_bits_dre(const LinkConfig& base, const std::vector<std::optional<int>>& bits_list,
                         const std::vector<bool>& dre_modes, const std::vector<double>& cspr_values,
                         int repeats_per_point, int workers) {
  if (bits_list.empty() || dre_modes.empty()) throw Error(Errc::InvalidConfig, "grid lists must be non-empty");
  std::vector<SweepSpec> specs;
  GridResult out;
  for (const auto& bits : bits_list) {
    for (bool dre : dre_modes) {
      SweepSpec spec{SweepVariable::CsprDb, cspr_values, base, repeats_per_point};
      spec.base.dac_bits = bits;
      spec.base.dre_enabled = dre;
      spec.validate();
      specs.push_back(std::move(spec));
      out.cells.push_back(GridCell{bits, dre, kNaN, kNaN, {}});
    }
  }
  const std::size_t reps = static_cast<std::size_t>(repeats_per_point);
  const std::size_t per_cell = cspr_values.size() * reps;
  out.rows.resize(specs.size() * per_cell);
  parallel_for(out.rows.size(), workers, [&](std::size_t flat) {
    const auto& spec = specs[flat / per_cell];
    const std::size_t i = flat % per_cell;
    const double v = spec.values[i / reps];
    std::string id = std::string("bits=") + (spec.base.dac_bits ? std::to_string(*spec.base.dac_bits) : "off") +
                     "/dre=" + (spec.base.dre_enabled ? "on" : "off") + "/" +
                     point_id(SweepVariable::CsprDb, v, static_cast<int>(i % reps));
    out.rows[flat] = guarded_run(point_config(spec.base, SweepVariable::CsprDb, v, i), id);
  });
  for (std::size_t c = 0; c < specs.size(); ++c) {
    std::vector<ResultRow> part(out.rows.begin() + static_cast<long>(c * per_cell),
                                out.rows.begin() + static_cast<long>((c + 1) * per_cell));
    const auto s = summarize(part, specs[c]);
    out.cells[c].mean_ngmi = s.mean_ngmi;
    if (s.any_ok) {
      out.cells[c].best_ngmi = s.mean_ngmi[s.best_index];
      out.cells[c].optimal_cspr_db = s.values[s.best_index];
    }
  }
  return out;
}

std::vector<QuantPoint> analyze_quantization(const LinkConfig& base, const std::vector<double>& cspr_values,
                                             int workers, std::size_t psd_segment) {
  with_stage("config", [&] {
    base.validate();
    if (!base.dac_bits) throw Error(Errc::InvalidConfig, "quantization analysis needs finite dac_bits");
    if (cspr_values.empty()) throw Error(Errc::InvalidConfig, "no CSPR values");
  });
  std::vector<QuantPoint> points(cspr_values.size());
  const double edge = base.signal_edge_hz();
  parallel_for(points.size(), workers, [&](std::size_t i) {
    LinkConfig cfg = base;
    cfg.tone.cspr_db = cspr_values[i];
    const double tone = tone_for(cfg);
    TxSettings tx{cfg.modulation_m, cfg.n_symbols, cfg.baud_hz, cfg.rrc(), ToneSpec{tone, cfg.tone.cspr_db}};
    const auto frame = with_stage("tx", [&] { return build_tx_frame(tx, cfg.seed); });
    const auto plain = with_stage("dac", [&] { return quantize_dac(frame.waveform, cfg, false); });
    const auto shaped = with_stage("dac", [&] { return quantize_dac(frame.waveform, cfg, true); });
    QuantPoint& p = points[i];
    p.cspr_db = cspr_values[i];
    p.tx_snr_plain_db = tx_snr_inband(frame.waveform, plain, Band{-edge, edge}, tone);
    p.tx_snr_dre_db = tx_snr_inband(frame.waveform, shaped, Band{-edge, edge}, tone);
    p.noise_plain = quantization_noise_spectrum(frame.waveform, plain, psd_segment);
    p.noise_dre = quantization_noise_spectrum(frame.waveform, shaped, psd_segment);
  });
  return points;
}

}  // namespace kkdre
