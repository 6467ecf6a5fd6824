#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kkdre/channel.hpp"
#include "kkdre/dre.hpp"
#include "kkdre/kkrx.hpp"
#include "kkdre/txdsp.hpp"

namespace kkdre {

struct ShapingParams {
  int n_taps = 5;
  std::optional<double> passband_edge_hz;  // default: tone offset + 2 GHz
};

// Whole-link configuration. Defaults describe the reference setup; every
// field can be overridden from a JSON document with the same field names.
struct LinkConfig {
  int modulation_m = 6;
  double baud_hz = 25e9;
  int sps_dac = 4;
  double rolloff_beta = 0.01;
  int rrc_span_symbols = 64;
  ToneSpec tone{};
  std::optional<int> dac_bits = 6;
  bool dre_enabled = true;
  DreConfig dre{};
  ShapingParams shaping{};
  double obpf_bandwidth_hz = 40e9;
  FiberSpec fiber{};
  OsnrSpec osnr{};
  PdSpec pd{};
  double adc_rate_hz = 80e9;
  std::optional<int> adc_bits;
  KkConfig kk{};
  BiasSearch bias{};
  EqualizerConfig eq{};
  std::size_t n_symbols = 81920;
  std::uint64_t seed = 1;

  double dac_rate_hz() const { return baud_hz * sps_dac; }
  RrcSpec rrc() const { return RrcSpec{rolloff_beta, sps_dac, rrc_span_symbols}; }
  double signal_edge_hz() const { return 0.5 * baud_hz * (1.0 + rolloff_beta); }
  double shaping_edge_hz() const { return shaping.passband_edge_hz.value_or(tone.offset_hz + 2e9); }

  // Throws Error(InvalidConfig) naming the offending field.
  void validate() const;
};

// Unknown keys are rejected. OFF-able fields accept null or "off".
LinkConfig parse_config(const std::string& json_text);
LinkConfig load_config(const std::string& path);
std::string config_to_json(const LinkConfig& cfg);

}  // namespace kkdre
