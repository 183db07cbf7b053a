#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "otalink/campaign.hpp"

namespace otalink::campaign {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(Errc::config, path.empty() ? msg : path + ": " + msg);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

/// Rejects keys outside `allowed` so typos never pass silently.
void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(join(path, key), "unknown key");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& key, const std::string& path, T& out) {
  const auto child = node[key];
  if (!child) return;
  try {
    out = child.as<T>();
  } catch (const YAML::Exception&) {
    fail(join(path, key), "invalid value '" + YAML::Dump(child) + "'");
  }
}

template <typename Enum>
void read_enum(const YAML::Node& node, const std::string& key, const std::string& path,
               const std::vector<std::pair<std::string, Enum>>& names, Enum& out) {
  std::string text;
  if (!node[key]) return;
  read(node, key, path, text);
  for (const auto& [name, value] : names)
    if (name == text) {
      out = value;
      return;
    }
  std::string choices;
  for (const auto& [name, value] : names) choices += (choices.empty() ? "" : ", ") + name;
  fail(join(path, key), "'" + text + "' is not one of {" + choices + "}");
}

cdouble read_complex(const YAML::Node& node, const std::string& path) {
  // Either a real scalar or a [re, im] pair.
  try {
    if (node.IsScalar()) return {node.as<double>(), 0.0};
    if (node.IsSequence() && node.size() == 2) return {node[0].as<double>(), node[1].as<double>()};
  } catch (const YAML::Exception&) {
  }
  fail(path, "expected a number or [re, im]");
}

void read_ofdm(const YAML::Node& node, const std::string& path, waveform::OfdmParams& p) {
  check_keys(node, path,
             {"preset", "fft_size", "cp_len", "active_subcarriers", "symbols_per_subframe", "pilot_spacing",
              "pss_symbol_index", "pss_root", "sample_rate"});
  if (node["preset"]) {
    std::string preset;
    read(node, "preset", path, preset);
    if (preset == "lte20")
      p = waveform::OfdmParams::lte20();
    else if (preset == "default")
      p = waveform::OfdmParams{};
    else
      fail(join(path, "preset"), "'" + preset + "' is not one of {default, lte20}");
  }
  read(node, "fft_size", path, p.fft_size);
  read(node, "cp_len", path, p.cp_len);
  read(node, "active_subcarriers", path, p.active_subcarriers);
  read(node, "symbols_per_subframe", path, p.symbols_per_subframe);
  read(node, "pilot_spacing", path, p.pilot_spacing);
  read(node, "pss_symbol_index", path, p.pss_symbol_index);
  read(node, "pss_root", path, p.pss_root);
  read(node, "sample_rate", path, p.sample_rate);
}

waveform::ConstellationOrder read_order(const YAML::Node& node, const std::string& path) {
  int m = 0;
  try {
    m = node.as<int>();
  } catch (const YAML::Exception&) {
    fail(path, "expected a modulation order");
  }
  try {
    return waveform::order_from_int(m);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

void read_sweep(const YAML::Node& node, SweepConfig& cfg) {
  const std::string path = "sweep";
  check_keys(node, path,
             {"variable", "start", "stop", "step", "repeats", "modulation_orders", "interferer_policy",
              "n_interferers", "estimation_mode", "master_seed", "threads"});
  read_enum<SweepVariable>(node, "variable", path,
                           {{"signal_power_dbm", SweepVariable::signal_power_dbm},
                            {"target_sinr_db", SweepVariable::target_sinr_db}},
                           cfg.sweep_variable);
  read(node, "start", path, cfg.start);
  read(node, "stop", path, cfg.stop);
  read(node, "step", path, cfg.step);
  read(node, "repeats", path, cfg.repeats);
  if (const auto orders = node["modulation_orders"]) {
    if (!orders.IsSequence()) fail("sweep.modulation_orders", "expected a list");
    cfg.modulation_orders.clear();
    for (std::size_t i = 0; i < orders.size(); ++i)
      cfg.modulation_orders.push_back(
          read_order(orders[i], "sweep.modulation_orders[" + std::to_string(i) + "]"));
  }
  read_enum<InterfererPolicy>(node, "interferer_policy", path,
                              {{"constant_total", InterfererPolicy::constant_total},
                               {"constant_per_source", InterfererPolicy::constant_per_source}},
                              cfg.interferer_policy);
  read(node, "n_interferers", path, cfg.n_interferers);
  read_enum<stbc::EstimationMode>(node, "estimation_mode", path,
                                  {{"known_h", stbc::EstimationMode::known_h},
                                   {"realtime_estimate", stbc::EstimationMode::realtime_estimate}},
                                  cfg.estimation_mode);
  read(node, "master_seed", path, cfg.master_seed);
  read(node, "threads", path, cfg.threads);
}

void read_link(const YAML::Node& node, SweepConfig& cfg) {
  const std::string path = "link";
  check_keys(node, path,
             {"subframes", "n_pilot_pairs", "ofdm", "channel", "precoder", "signal_power_dbm", "noise_power_dbm",
              "reference_impedance_ohm", "evm_reference"});
  read(node, "subframes", path, cfg.subframes);
  read(node, "n_pilot_pairs", path, cfg.n_pilot_pairs);
  if (node["ofdm"]) read_ofdm(node["ofdm"], "link.ofdm", cfg.ofdm);
  if (const auto ch = node["channel"]) {
    check_keys(ch, "link.channel", {"kind", "h", "seed"});
    read_enum<ChannelSettings::Kind>(ch, "kind", "link.channel",
                                     {{"fixed", ChannelSettings::Kind::fixed},
                                      {"rayleigh", ChannelSettings::Kind::rayleigh}},
                                     cfg.channel.kind);
    if (const auto h = ch["h"]) {
      if (!h.IsSequence() || h.size() != 2) fail("link.channel.h", "expected [h11, h12]");
      for (int i = 0; i < 2; ++i)
        cfg.channel.h(0, i) = read_complex(h[i], "link.channel.h[" + std::to_string(i) + "]");
    }
    read(ch, "seed", "link.channel", cfg.channel.seed);
  }
  if (const auto w = node["precoder"]) {
    if (!w.IsSequence() || w.size() != 2) fail("link.precoder", "expected two weights");
    for (int i = 0; i < 2; ++i) cfg.precoder[i] = read_complex(w[i], "link.precoder[" + std::to_string(i) + "]");
  }
  read(node, "signal_power_dbm", path, cfg.signal_power_dbm);
  read(node, "noise_power_dbm", path, cfg.noise_power_dbm);
  read(node, "reference_impedance_ohm", path, cfg.reference_impedance_ohm);
  read_enum<metrics::RefMagnitude>(node, "evm_reference", path,
                                   {{"peak", metrics::RefMagnitude::peak}, {"rms", metrics::RefMagnitude::rms}},
                                   cfg.evm_reference);
}

void read_interference(const YAML::Node& node, SweepConfig& cfg) {
  const std::string path = "interference";
  auto& s = cfg.interference;
  check_keys(node, path, {"kind", "power_dbm", "band", "ofdm", "ofdm_order"});
  read_enum<InterfererKind>(node, "kind", path,
                            {{"none", InterfererKind::none}, {"gwn", InterfererKind::gwn}, {"ofdm", InterfererKind::ofdm}},
                            s.kind);
  read(node, "power_dbm", path, s.power_dbm);
  if (const auto b = node["band"]) {
    if (!b.IsSequence() || b.size() != 2) fail("interference.band", "expected [lo, hi]");
    try {
      s.band = Band{b[0].as<double>(), b[1].as<double>()};
    } catch (const YAML::Exception&) {
      fail("interference.band", "expected two numbers");
    }
  }
  if (node["ofdm"]) read_ofdm(node["ofdm"], "interference.ofdm", s.ofdm);
  if (node["ofdm_order"]) s.ofdm_order = read_order(node["ofdm_order"], "interference.ofdm_order");
}

void read_uncertainty(const YAML::Node& node, SweepConfig& cfg) {
  const std::string path = "uncertainty";
  check_keys(node, path,
             {"u_fre_resp", "u_input_att", "u_abs", "u_rbw", "u_input_mixer", "combination"});
  read(node, "u_fre_resp", path, cfg.instrument.u_fre_resp);
  read(node, "u_input_att", path, cfg.instrument.u_input_att);
  read(node, "u_abs", path, cfg.instrument.u_abs);
  read(node, "u_rbw", path, cfg.instrument.u_rbw);
  read(node, "u_input_mixer", path, cfg.instrument.u_input_mixer);
  read_enum<uncertainty::Combination>(
      node, "combination", path,
      {{"linear_sum", uncertainty::Combination::linear_sum}, {"rss", uncertainty::Combination::rss}},
      cfg.combination);
  try {
    cfg.instrument.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::config, std::string("malformed config: ") + e.what());
  }
  SweepConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  check_keys(root, "", {"sweep", "link", "interference", "uncertainty"});
  if (root["sweep"]) read_sweep(root["sweep"], cfg);
  if (root["link"]) read_link(root["link"], cfg);
  if (root["interference"]) read_interference(root["interference"], cfg);
  if (root["uncertainty"]) read_uncertainty(root["uncertainty"], cfg);
  cfg.validate();
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_config(buf.str());
}

}  // namespace otalink::campaign
