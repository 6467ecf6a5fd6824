// Command-line front end: single runs, CSPR/OSNR sweeps, the bits x DRE grid
// and the transmitter quantization-noise analysis.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kkdre/config.hpp"
#include "kkdre/error.hpp"
#include "kkdre/experiments.hpp"
#include "kkdre/report.hpp"

namespace {

using namespace kkdre;

constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

struct Globals {
  std::string config_path;
  std::string out_path;
  std::string svg_dir;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

LinkConfig load(const Globals& g) {
  LinkConfig cfg = g.config_path.empty() ? LinkConfig{} : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::vector<double> range(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw Error(Errc::InvalidConfig, "range needs step > 0 and to >= from");
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::round((from + step * static_cast<double>(i)) * 1e9) / 1e9;
  return v;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, "bad list value '" + item + "'");
    }
  }
  if (out.empty()) throw Error(Errc::InvalidConfig, "empty list");
  return out;
}

void write_rows(const Globals& g, const std::vector<ResultRow>& rows) {
  if (g.out_path.empty()) {
    std::cout << to_csv(rows);
  } else {
    emit_csv(rows, g.out_path);
  }
}

// Failed sweep points are reported but do not stop the sweep.
int report_failures(const std::vector<ResultRow>& rows) {
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++failed;
      std::cerr << "point " << r.run_id << " failed: " << r.error << '\n';
    }
  }
  return (!rows.empty() && failed == rows.size()) ? kExitPipeline : 0;
}

void maybe_svg(const Globals& g, const std::string& name, const Plot& plot) {
  if (g.svg_dir.empty()) return;
  std::filesystem::create_directories(g.svg_dir);
  emit_svg(plot, (std::filesystem::path(g.svg_dir) / name).string());
}

Series ngmi_series(const std::string& name, const std::vector<ResultRow>& rows, const SweepSpec& spec) {
  const auto s = summarize(rows, spec);
  return Series{name, s.values, s.mean_ngmi};
}

std::optional<int> parse_bits(const std::string& s) {
  if (s == "off") return std::nullopt;
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    throw Error(Errc::InvalidConfig, "bad bits value '" + s + "'");
  }
}

std::vector<bool> parse_dre(const std::string& s) {
  if (s == "both") return {false, true};
  if (s == "on") return {true};
  if (s == "off") return {false};
  throw Error(Errc::InvalidConfig, "--dre must be on, off or both");
}

std::string bits_label(const std::optional<int>& b) { return b ? std::to_string(*b) + "-bit" : "unquantized"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kramers-Kronig link simulator with DAC resolution enhancement"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Base seed (overrides the config)");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--svg", g.svg_dir, "Directory for SVG figures");

  auto add_common = [&](CLI::App* sub) {
    // global flags may also follow the subcommand
    sub->fallthrough();
    sub->add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", g.out_path, "Output CSV (stdout when omitted)");
  };

  auto* run = app.add_subcommand("run", "Single end-to-end run");
  add_common(run);

  double from = 4.0, to = 14.0, step = 1.0;
  int repeats = 1;
  auto* sweep_cspr = app.add_subcommand("sweep-cspr", "NGMI versus CSPR");
  add_common(sweep_cspr);
  sweep_cspr->add_option("--from", from, "First CSPR [dB]");
  sweep_cspr->add_option("--to", to, "Last CSPR [dB]");
  sweep_cspr->add_option("--step", step, "CSPR step [dB]");
  sweep_cspr->add_option("--repeats", repeats, "Repeats per point")->check(CLI::PositiveNumber);

  std::string osnr_values = "15,17,19,21,23,25,27,29,31,33,35";
  std::optional<double> fixed_cspr;
  double fixed_cspr_value = 0.0;
  auto* sweep_osnr = app.add_subcommand("sweep-osnr", "NGMI versus OSNR at the optimal CSPR");
  add_common(sweep_osnr);
  sweep_osnr->add_option("--values", osnr_values, "Comma-separated OSNR values [dB]");
  auto* cspr_opt = sweep_osnr->add_option("--cspr", fixed_cspr_value, "Use this CSPR instead of searching for the optimum");
  sweep_osnr->add_option("--cspr-from", from, "CSPR search start [dB]");
  sweep_osnr->add_option("--cspr-to", to, "CSPR search end [dB]");
  sweep_osnr->add_option("--cspr-step", step, "CSPR search step [dB]");
  sweep_osnr->add_option("--repeats", repeats, "Repeats per point")->check(CLI::PositiveNumber);

  std::string bits_arg = "4,5,6", dre_arg = "both";
  auto* grid = app.add_subcommand("grid", "Best NGMI and optimal CSPR per (bits, DRE)");
  add_common(grid);
  grid->add_option("--bits", bits_arg, "Comma-separated DAC resolutions ('off' allowed)");
  grid->add_option("--dre", dre_arg, "on, off or both");
  grid->add_option("--from", from, "First CSPR [dB]");
  grid->add_option("--to", to, "Last CSPR [dB]");
  grid->add_option("--step", step, "CSPR step [dB]");
  grid->add_option("--repeats", repeats, "Repeats per point")->check(CLI::PositiveNumber);

  std::string spectra_path;
  double q_from = 0.0, q_to = 14.0, q_step = 2.0;
  auto* analyze = app.add_subcommand("analyze-quantnoise", "Quantization noise spectra and transmitter SNR vs CSPR");
  add_common(analyze);
  analyze->add_option("--from", q_from, "First CSPR [dB]");
  analyze->add_option("--to", q_to, "Last CSPR [dB]");
  analyze->add_option("--step", q_step, "CSPR step [dB]");
  analyze->add_option("--spectra", spectra_path, "CSV of the noise spectra");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (seed_opt->count()) g.seed = seed_value;
  if (cspr_opt->count()) fixed_cspr = fixed_cspr_value;

  try {
    const LinkConfig cfg = load(g);

    if (run->parsed()) {
      const auto row = run_single(cfg);
      write_rows(g, {row});
      return 0;
    }

    if (sweep_cspr->parsed()) {
      SweepSpec spec{SweepVariable::CsprDb, range(from, to, step), cfg, repeats};
      const auto rows = sweep(spec, g.workers);
      write_rows(g, rows);
      maybe_svg(g, "ngmi_vs_cspr.svg",
                Plot{"NGMI vs CSPR", "CSPR [dB]", "NGMI", {ngmi_series(bits_label(cfg.dac_bits), rows, spec)}, true});
      return report_failures(rows);
    }

    if (sweep_osnr->parsed()) {
      LinkConfig base = cfg;
      if (fixed_cspr) {
        base.tone.cspr_db = *fixed_cspr;
      } else {
        SweepSpec search{SweepVariable::CsprDb, range(from, to, step), cfg, repeats};
        const auto s = summarize(sweep(search, g.workers), search);
        if (!s.any_ok) throw PipelineError("cspr_search", Error(Errc::AllCandidatesFailed, "every CSPR point failed"));
        base.tone.cspr_db = s.values[s.best_index];
        std::cerr << "optimal CSPR " << base.tone.cspr_db << " dB\n";
      }
      SweepSpec spec{SweepVariable::OsnrDb, parse_list(osnr_values), base, repeats};
      const auto rows = sweep(spec, g.workers);
      write_rows(g, rows);
      maybe_svg(g, "ngmi_vs_osnr.svg",
                Plot{"NGMI vs OSNR", "OSNR [dB]", "NGMI", {ngmi_series(bits_label(cfg.dac_bits), rows, spec)}, true});
      return report_failures(rows);
    }

    if (grid->parsed()) {
      std::vector<std::optional<int>> bits;
      std::stringstream ss(bits_arg);
      std::string item;
      while (std::getline(ss, item, ',')) bits.push_back(parse_bits(item));
      const auto cspr = range(from, to, step);
      const auto res = grid_bits_dre(cfg, bits, parse_dre(dre_arg), cspr, repeats, g.workers);
      write_rows(g, res.rows);
      std::ostream& table = g.out_path.empty() ? std::cerr : std::cout;
      table << "bits,dre,best_ngmi,optimal_cspr_db\n";
      Plot plot{"NGMI vs CSPR", "CSPR [dB]", "NGMI", {}, true};
      for (const auto& c : res.cells) {
        char line[128];
        std::snprintf(line, sizeof line, "%s,%s,%.4f,%.2f\n", c.bits ? std::to_string(*c.bits).c_str() : "off",
                      c.dre ? "on" : "off", c.best_ngmi, c.optimal_cspr_db);
        table << line;
        plot.series.push_back(Series{bits_label(c.bits) + (c.dre ? " DRE" : ""), cspr, c.mean_ngmi});
      }
      maybe_svg(g, "grid_ngmi_vs_cspr.svg", plot);
      return report_failures(res.rows);
    }

    if (analyze->parsed()) {
      const auto points = analyze_quantization(cfg, range(q_from, q_to, q_step), g.workers);
      std::ostringstream os;
      os << "cspr_db,tx_snr_plain_db,tx_snr_dre_db\n";
      Series plain{"no DRE", {}, {}}, dre{"DRE", {}, {}};
      for (const auto& p : points) {
        char line[128];
        std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g\n", p.cspr_db, p.tx_snr_plain_db, p.tx_snr_dre_db);
        os << line;
        plain.x.push_back(p.cspr_db);
        plain.y.push_back(p.tx_snr_plain_db);
        dre.x.push_back(p.cspr_db);
        dre.y.push_back(p.tx_snr_dre_db);
      }
      if (g.out_path.empty()) {
        std::cout << os.str();
      } else {
        std::ofstream out(g.out_path);
        if (!(out << os.str())) throw Error(Errc::IoFailure, "cannot write '" + g.out_path + "'");
      }
      if (!spectra_path.empty()) {
        std::ofstream out(spectra_path);
        out << "cspr_db,freq_hz,plain_db_hz,dre_db_hz\n";
        for (const auto& p : points) {
          for (std::size_t k = 0; k < p.noise_plain.freq_hz.size(); ++k) {
            char line[160];
            std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g,%.12g\n", p.cspr_db, p.noise_plain.freq_hz[k],
                          p.noise_plain.psd_db_hz[k], p.noise_dre.psd_db_hz[k]);
            out << line;
          }
        }
        if (!out) throw Error(Errc::IoFailure, "cannot write '" + spectra_path + "'");
      }
      maybe_svg(g, "tx_snr_vs_cspr.svg", Plot{"Transmitter SNR vs CSPR", "CSPR [dB]", "In-band SNR [dB]", {plain, dre}, false});
      if (!points.empty()) {
        const auto& p = points.front();
        auto ghz = p.noise_plain.freq_hz;
        for (auto& f : ghz) f *= 1e-9;
        maybe_svg(g, "quant_noise_spectrum.svg",
                  Plot{"Quantization noise PSD", "Frequency [GHz]", "PSD [dB/Hz]",
                       {Series{"no DRE", ghz, p.noise_plain.psd_db_hz}, Series{"DRE", ghz, p.noise_dre.psd_db_hz}}, false});
      }
      return 0;
    }
  } catch (const PipelineError& e) {
    std::cerr << "pipeline error in stage '" << e.stage() << "': " << e.what() << '\n';
    return kExitPipeline;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == Errc::InvalidConfig ? kExitConfig : kExitPipeline;
  }
  return 0;
}
