#include "kkdre/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "kkdre/error.hpp"

namespace kkdre {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

template <typename F>
void wrap(const char* field, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    invalid(std::string(field) + ": " + e.what());
  }
}

bool is_integer_multiple(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) < 1e-6;
}

}  // namespace

void LinkConfig::validate() const {
  if (modulation_m != 2 && modulation_m != 4 && modulation_m != 6) invalid("modulation_m must be 2, 4 or 6");
  if (!(baud_hz > 0.0)) invalid("baud_hz must be > 0");
  wrap("rrc", [&] { rrc().validate(); });
  wrap("fiber", [&] { fiber.validate(); });
  wrap("osnr", [&] { osnr.validate(); });
  wrap("pd", [&] { pd.validate(); });
  wrap("kk", [&] { kk.validate(); });
  wrap("bias", [&] { bias.validate(); });
  wrap("eq", [&] { eq.validate(); });
  if (dac_bits) wrap("dac_bits", [&] { QuantizerSpec{*dac_bits, 1.0}.validate(); });
  if (adc_bits) wrap("adc_bits", [&] { QuantizerSpec{*adc_bits, 1.0}.validate(); });
  if (dre.n_soft < 1 || dre.beam_width < 1) invalid("dre: n_soft and beam_width must be >= 1");
  if (dac_bits && static_cast<std::size_t>(dre.n_soft) > (std::size_t{1} << *dac_bits)) {
    invalid("dre: n_soft exceeds the number of DAC levels");
  }
  if (shaping.n_taps < 1 || shaping.n_taps % 2 == 0) invalid("shaping.n_taps must be odd and positive");
  const double fs = dac_rate_hz();
  if (!(shaping_edge_hz() > 0.0 && shaping_edge_hz() < 0.5 * fs)) invalid("shaping passband edge must lie in (0, fs/2)");
  if (!(std::abs(tone.offset_hz) < 0.5 * fs)) invalid("tone.offset_hz exceeds the DAC Nyquist frequency");
  if (!(std::abs(tone.offset_hz) > signal_edge_hz())) invalid("tone.offset_hz lies inside the signal band");
  if (!std::isfinite(tone.cspr_db)) invalid("tone.cspr_db must be finite");
  if (!(obpf_bandwidth_hz > 0.0 && obpf_bandwidth_hz <= fs)) invalid("obpf_bandwidth_hz must lie in (0, DAC rate]");
  if (!(adc_rate_hz >= 2.0 * baud_hz)) invalid("adc_rate_hz must be at least twice the baud rate");
  if (n_symbols < (std::size_t{1} << 14)) invalid("n_symbols must be >= 16384");
  if (!is_integer_multiple(static_cast<double>(n_symbols) * adc_rate_hz, baud_hz)) {
    invalid("n_symbols * adc_rate_hz / baud_hz must be an integer");
  }
}

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) invalid(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) invalid("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
void get(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid("bad value for '" + where + key + "'");
  }
}

bool is_off(const json& v) { return v.is_null() || (v.is_string() && v.get<std::string>() == "off"); }

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (is_off(v)) {
    out.reset();
    return;
  }
  try {
    out = v.get<T>();
  } catch (const json::exception&) {
    invalid("bad value for '" + where + key + "'");
  }
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json("off");
}

}  // namespace

LinkConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  LinkConfig c;
  check_keys(j, "", {"modulation_m", "baud_hz", "sps_dac", "rolloff_beta", "rrc_span_symbols", "tone", "dac_bits",
                     "dre_enabled", "dre", "shaping", "obpf_bandwidth_hz", "fiber", "osnr", "pd", "adc_rate_hz",
                     "adc_bits", "kk", "bias", "eq", "n_symbols", "seed"});
  get(j, "modulation_m", c.modulation_m, "");
  get(j, "baud_hz", c.baud_hz, "");
  get(j, "sps_dac", c.sps_dac, "");
  get(j, "rolloff_beta", c.rolloff_beta, "");
  get(j, "rrc_span_symbols", c.rrc_span_symbols, "");
  get_optional(j, "dac_bits", c.dac_bits, "");
  get(j, "dre_enabled", c.dre_enabled, "");
  get(j, "obpf_bandwidth_hz", c.obpf_bandwidth_hz, "");
  get(j, "adc_rate_hz", c.adc_rate_hz, "");
  get_optional(j, "adc_bits", c.adc_bits, "");
  get(j, "n_symbols", c.n_symbols, "");
  get(j, "seed", c.seed, "");

  if (j.contains("tone")) {
    const auto& t = j["tone"];
    check_keys(t, "tone", {"offset_hz", "cspr_db"});
    get(t, "offset_hz", c.tone.offset_hz, "tone.");
    get(t, "cspr_db", c.tone.cspr_db, "tone.");
  }
  if (j.contains("dre")) {
    const auto& d = j["dre"];
    check_keys(d, "dre", {"n_soft", "beam_width"});
    get(d, "n_soft", c.dre.n_soft, "dre.");
    get(d, "beam_width", c.dre.beam_width, "dre.");
  }
  if (j.contains("shaping")) {
    const auto& s = j["shaping"];
    check_keys(s, "shaping", {"n_taps", "passband_edge_hz"});
    get(s, "n_taps", c.shaping.n_taps, "shaping.");
    if (s.contains("passband_edge_hz") && s["passband_edge_hz"].is_null()) {
      c.shaping.passband_edge_hz.reset();
    } else {
      get_optional(s, "passband_edge_hz", c.shaping.passband_edge_hz, "shaping.");
    }
  }
  if (j.contains("fiber")) {
    const auto& f = j["fiber"];
    check_keys(f, "fiber", {"length_km", "dispersion_ps_nm_km", "center_freq_thz"});
    get(f, "length_km", c.fiber.length_km, "fiber.");
    get(f, "dispersion_ps_nm_km", c.fiber.dispersion_ps_nm_km, "fiber.");
    get(f, "center_freq_thz", c.fiber.center_freq_thz, "fiber.");
  }
  if (j.contains("osnr")) {
    const auto& o = j["osnr"];
    check_keys(o, "osnr", {"target_db", "ref_bandwidth_hz"});
    get_optional(o, "target_db", c.osnr.target_db, "osnr.");
    get(o, "ref_bandwidth_hz", c.osnr.ref_bandwidth_hz, "osnr.");
  }
  if (j.contains("pd")) {
    const auto& p = j["pd"];
    check_keys(p, "pd", {"ac_coupled", "responsivity"});
    get(p, "ac_coupled", c.pd.ac_coupled, "pd.");
    get(p, "responsivity", c.pd.responsivity, "pd.");
  }
  if (j.contains("kk")) {
    const auto& k = j["kk"];
    check_keys(k, "kk", {"upsample_factor", "clip_floor", "max_clipped_fraction"});
    get(k, "upsample_factor", c.kk.upsample_factor, "kk.");
    get(k, "clip_floor", c.kk.clip_floor, "kk.");
    get(k, "max_clipped_fraction", c.kk.max_clipped_fraction, "kk.");
  }
  if (j.contains("bias")) {
    const auto& b = j["bias"];
    check_keys(b, "bias", {"grid", "metric_block_symbols"});
    get(b, "grid", c.bias.grid, "bias.");
    get(b, "metric_block_symbols", c.bias.metric_block_symbols, "bias.");
  }
  if (j.contains("eq")) {
    const auto& e = j["eq"];
    check_keys(e, "eq", {"num_taps", "step_mu", "samples_per_symbol", "training_passes"});
    get(e, "num_taps", c.eq.num_taps, "eq.");
    get(e, "step_mu", c.eq.step_mu, "eq.");
    get(e, "samples_per_symbol", c.eq.samples_per_symbol, "eq.");
    get(e, "training_passes", c.eq.training_passes, "eq.");
  }
  c.validate();
  return c;
}

LinkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const LinkConfig& c) {
  json j;
  j["modulation_m"] = c.modulation_m;
  j["baud_hz"] = c.baud_hz;
  j["sps_dac"] = c.sps_dac;
  j["rolloff_beta"] = c.rolloff_beta;
  j["rrc_span_symbols"] = c.rrc_span_symbols;
  j["tone"] = {{"offset_hz", c.tone.offset_hz}, {"cspr_db", c.tone.cspr_db}};
  j["dac_bits"] = optional_json(c.dac_bits);
  j["dre_enabled"] = c.dre_enabled;
  j["dre"] = {{"n_soft", c.dre.n_soft}, {"beam_width", c.dre.beam_width}};
  j["shaping"] = {{"n_taps", c.shaping.n_taps}, {"passband_edge_hz", optional_json(c.shaping.passband_edge_hz)}};
  j["obpf_bandwidth_hz"] = c.obpf_bandwidth_hz;
  j["fiber"] = {{"length_km", c.fiber.length_km},
                {"dispersion_ps_nm_km", c.fiber.dispersion_ps_nm_km},
                {"center_freq_thz", c.fiber.center_freq_thz}};
  j["osnr"] = {{"target_db", optional_json(c.osnr.target_db)}, {"ref_bandwidth_hz", c.osnr.ref_bandwidth_hz}};
  j["pd"] = {{"ac_coupled", c.pd.ac_coupled}, {"responsivity", c.pd.responsivity}};
  j["adc_rate_hz"] = c.adc_rate_hz;
  j["adc_bits"] = optional_json(c.adc_bits);
  j["kk"] = {{"upsample_factor", c.kk.upsample_factor},
             {"clip_floor", c.kk.clip_floor},
             {"max_clipped_fraction", c.kk.max_clipped_fraction}};
  j["bias"] = {{"grid", c.bias.grid}, {"metric_block_symbols", c.bias.metric_block_symbols}};
  j["eq"] = {{"num_taps", c.eq.num_taps},
             {"step_mu", c.eq.step_mu},
             {"samples_per_symbol", c.eq.samples_per_symbol},
             {"training_passes", c.eq.training_passes}};
  j["n_symbols"] = c.n_symbols;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

}  // namespace kkdre
