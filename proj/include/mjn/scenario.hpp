#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mjn/channel.hpp"
#include "mjn/errors.hpp"
#include "mjn/modem.hpp"
#include "mjn/noise_physics.hpp"
#include "mjn/receiver_model.hpp"
#include "mjn/text.hpp"

// Scenario files: flat `key = value` lines, `#` starts a comment. Every key
// is optional; unknown or repeated keys are rejected. See README.md for the
// full key list.
namespace mjn {

enum class FeedthroughVariant { open_open, fifty_fifty, open_fifty };

inline FeedthroughVariant parse_feedthrough_variant(std::string_view s) {
  if (s == "open_open") return FeedthroughVariant::open_open;
  if (s == "fifty_fifty") return FeedthroughVariant::fifty_fifty;
  if (s == "open_fifty") return FeedthroughVariant::open_fifty;
  throw ConfigError("unknown feedthrough variant '" + std::string(s) + "'");
}

inline std::string to_string(FeedthroughVariant v) {
  switch (v) {
    case FeedthroughVariant::open_open: return "open_open";
    case FeedthroughVariant::fifty_fifty: return "fifty_fifty";
    case FeedthroughVariant::open_fifty: return "open_fifty";
  }
  return "?";
}

enum class SweepAxis { distance, rate };

inline SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "distance") return SweepAxis::distance;
  if (s == "rate") return SweepAxis::rate;
  throw ConfigError("unknown sweep axis '" + std::string(s) + "'");
}

inline std::string to_string(SweepAxis a) { return a == SweepAxis::distance ? "distance" : "rate"; }

struct LinkAnchor {
  double rate_bps = 26.0;
  double distance_m = 1.5;
  double ber = 0.01;
};

struct Scenario {
  std::string name = "default";
  std::uint64_t seed = 1;
  std::size_t trials = 100;  // packets per experiment or sweep point
  std::string outputs = "results";

  std::map<std::string, LoadProfile> loads;  // custom loads; presets resolve by name
  ReceiverChain chain;
  ModemConfig modem;

  // Which loads the transmitter switches between.
  std::string on_load = "matched_296";
  std::string off_load = "matched_77";
  bool use_measured_variance = true;  // measured_msv when known, else predicted

  FeedthroughVariant feedthrough_variant = FeedthroughVariant::open_fifty;
  std::string feedthrough_open = "open_296";
  std::string feedthrough_matched = "matched_296";
  bool tempmod_swap = false;

  std::vector<std::string> calibration_loads = {"matched_296", "matched_273", "matched_77"};
  std::vector<std::string> calibration_probes = {"open_296", "short_296", "lna_input"};
  std::size_t calibration_samples = 6'000'000;
  bool calibration_noiseless = false;

  std::vector<std::string> histogram_loads = {"matched_296", "matched_77", "lna_input",
                                              "short_296", "open_296"};
  std::size_t histogram_samples = 1'000'000;
  std::size_t histogram_bins = 100;

  std::optional<LinkBudget> link;
  std::optional<double> link_constant;  // transmit-side contrast, SDR units^2
  std::optional<LinkAnchor> anchor;

  SweepAxis sweep_axis = SweepAxis::distance;
  std::vector<double> sweep_distances_m = {1.8, 2.4, 3.0, 3.7, 4.3, 4.9, 5.5, 6.1, 6.7, 7.3};
  std::vector<double> sweep_rates_bps = {5.0, 10.0, 20.0};
  std::size_t sweep_cycles_per_bit = 5;
  double sweep_max_ber = 0.01;

  /// A preset or a scenario-defined load.
  LoadProfile resolve_load(const std::string& load_name) const {
    if (auto it = loads.find(load_name); it != loads.end()) return it->second;
    if (auto preset = load_preset(load_name)) return *preset;
    throw ConfigError("unknown load '" + load_name + "'");
  }

  /// SDR variance a load produces on this scenario's receiver.
  double load_variance(const std::string& load_name) const {
    const LoadProfile load = resolve_load(load_name);
    if (use_measured_variance && load.measured_msv) return *load.measured_msv;
    return predicted_variance(load, chain);
  }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    try {
      chain.validate();
      modem.validate();
      for (const auto& [n, l] : loads) l.validate();
      if (link) link->validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    for (const auto* list : {&calibration_loads, &calibration_probes, &histogram_loads}) {
      for (const auto& n : *list) resolve_load(n);
    }
    for (const auto& n : {on_load, off_load, feedthrough_open, feedthrough_matched}) resolve_load(n);
    if (histogram_bins < 1) throw ConfigError("histogram.bins must be >= 1");
    if (sweep_cycles_per_bit < 1) throw ConfigError("sweep.cycles_per_bit must be >= 1");
  }
};

namespace detail {

inline std::vector<std::string> parse_name_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto f : text::split(v, ',')) {
    const auto t = text::trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline std::vector<double> parse_number_list(std::string_view v, const std::string& key) {
  std::vector<double> out;
  for (const auto& f : parse_name_list(v)) out.push_back(text::parse_double(f, key));
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("cannot parse boolean " + key + " from '" + std::string(v) + "'");
}

inline ThresholdPolicy parse_threshold(std::string_view v) {
  if (v == "preamble_midpoint") return ThresholdPolicy::preamble_midpoint();
  if (v.starts_with("fixed:")) {
    return ThresholdPolicy::fixed(text::parse_double(v.substr(6), "modem.threshold"));
  }
  throw ConfigError("modem.threshold must be preamble_midpoint or fixed:<value>");
}

inline void apply_load_key(Scenario& sc, std::string_view key, std::string_view value) {
  // load.<name>.<field>
  const auto rest = key.substr(5);
  const auto dot = rest.rfind('.');
  if (dot == std::string_view::npos || dot == 0) throw ConfigError("malformed load key '" + std::string(key) + "'");
  const std::string name(rest.substr(0, dot));
  const auto field = rest.substr(dot + 1);
  auto [it, inserted] = sc.loads.try_emplace(name);
  LoadProfile& load = it->second;
  if (inserted) {
    load = LoadProfile{};
    load.name = name;
  }
  const std::string k(key);
  if (field == "preset") {
    auto preset = load_preset(value);
    if (!preset) throw ConfigError("unknown load preset '" + std::string(value) + "'");
    preset->name = name;
    load = *preset;
  } else if (field == "r_ohm") {
    load.impedance_re = text::parse_double(value, k);
  } else if (field == "x_ohm") {
    load.impedance_im = text::parse_double(value, k);
  } else if (field == "temp_k") {
    load.physical_temp = text::parse_double(value, k);
  } else if (field == "msv") {
    load.measured_msv = text::parse_double(value, k);
  } else {
    throw ConfigError("unknown load field '" + k + "'");
  }
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in, Scenario sc = {}) {
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(text::strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("scenario line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(text::trim(body.substr(0, eq)));
    const auto value = text::trim(body.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("scenario key '" + key + "' repeated on line " + std::to_string(line_no));
    }
    auto num = [&] { return text::parse_double(value, key); };
    auto uint = [&] { return text::parse_uint(value, key); };
    auto ensure_link = [&]() -> LinkBudget& {
      if (!sc.link) sc.link = LinkBudget{};
      return *sc.link;
    };
    auto ensure_anchor = [&]() -> LinkAnchor& {
      if (!sc.anchor) sc.anchor = LinkAnchor{};
      return *sc.anchor;
    };

    if (key == "name") sc.name = std::string(value);
    else if (key == "seed") sc.seed = uint();
    else if (key == "trials") sc.trials = uint();
    else if (key == "out") sc.outputs = std::string(value);
    else if (key == "chain.gain_rx") sc.chain.gain_rx = num();
    else if (key == "chain.offset") sc.chain.offset = num();
    else if (key == "chain.bandwidth_hz") sc.chain.bandwidth_hz = num();
    else if (key == "chain.shunt_r") sc.chain.shunt_r = num();
    else if (key == "chain.lna_noise_temp") sc.chain.lna_noise_temp = num();
    else if (key == "modem.subcarrier_hz") sc.modem.subcarrier_hz = num();
    else if (key == "modem.sample_rate_hz") sc.modem.sample_rate_hz = num();
    else if (key == "modem.cycles_per_bit") sc.modem.cycles_per_bit = uint();
    else if (key == "modem.threshold") sc.modem.threshold = detail::parse_threshold(value);
    else if (key == "modem.preamble") sc.modem.preamble = bits_from_string(value);
    else if (key == "modem.payload_bits") sc.modem.payload_bits = uint();
    else if (key == "modem.power") {
      if (value == "real") sc.modem.power = PowerMode::real_squared;
      else if (value == "magnitude") sc.modem.power = PowerMode::magnitude_squared;
      else throw ConfigError("modem.power must be real or magnitude");
    }
    else if (key == "modem.correlation_floor") sc.modem.correlation_floor = num();
    else if (key == "loads.on") sc.on_load = std::string(value);
    else if (key == "loads.off") sc.off_load = std::string(value);
    else if (key == "loads.variance") {
      if (value == "measured") sc.use_measured_variance = true;
      else if (value == "predicted") sc.use_measured_variance = false;
      else throw ConfigError("loads.variance must be measured or predicted");
    }
    else if (key.starts_with("load.")) detail::apply_load_key(sc, key, value);
    else if (key == "feedthrough.variant") sc.feedthrough_variant = parse_feedthrough_variant(value);
    else if (key == "feedthrough.open") sc.feedthrough_open = std::string(value);
    else if (key == "feedthrough.matched") sc.feedthrough_matched = std::string(value);
    else if (key == "tempmod.swap") sc.tempmod_swap = detail::parse_bool(value, key);
    else if (key == "calibration.loads") sc.calibration_loads = detail::parse_name_list(value);
    else if (key == "calibration.probes") sc.calibration_probes = detail::parse_name_list(value);
    else if (key == "calibration.samples") sc.calibration_samples = uint();
    else if (key == "calibration.noiseless") sc.calibration_noiseless = detail::parse_bool(value, key);
    else if (key == "histogram.loads") sc.histogram_loads = detail::parse_name_list(value);
    else if (key == "histogram.samples") sc.histogram_samples = uint();
    else if (key == "histogram.bins") sc.histogram_bins = uint();
    else if (key == "link.distance_m") ensure_link().distance_m = num();
    else if (key == "link.tx_gain_dbi") ensure_link().tx_gain_dbi = num();
    else if (key == "link.rx_gain_dbi") ensure_link().rx_gain_dbi = num();
    else if (key == "link.frequency_hz") ensure_link().frequency_hz = num();
    else if (key == "link.constant") { ensure_link(); sc.link_constant = num(); }
    else if (key == "link.anchor_rate_bps") { ensure_link(); ensure_anchor().rate_bps = num(); }
    else if (key == "link.anchor_distance_m") { ensure_link(); ensure_anchor().distance_m = num(); }
    else if (key == "link.anchor_ber") { ensure_link(); ensure_anchor().ber = num(); }
    else if (key == "sweep.axis") sc.sweep_axis = parse_sweep_axis(value);
    else if (key == "sweep.distances_m") sc.sweep_distances_m = detail::parse_number_list(value, key);
    else if (key == "sweep.rates_bps") sc.sweep_rates_bps = detail::parse_number_list(value, key);
    else if (key == "sweep.cycles_per_bit") sc.sweep_cycles_per_bit = uint();
    else if (key == "sweep.max_ber") sc.sweep_max_ber = num();
    else throw ConfigError("unknown scenario key '" + key + "' on line " + std::to_string(line_no));
  }
  sc.validate();
  return sc;
}

inline Scenario parse_scenario(std::string_view text_body) {
  std::istringstream in{std::string(text_body)};
  return parse_scenario(in);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  return parse_scenario(in);
}

}  // namespace mjn

namespace mjn {

/// Built-in scenario for a CLI subcommand when no --scenario file is given.
/// The files under scenarios/ spell out the same settings.
inline Scenario default_scenario(std::string_view experiment) {
  Scenario sc;
  sc.name = std::string(experiment);
  if (experiment == "feedthrough") {
    sc.on_load = "matched_296";
    sc.off_load = "open_296";
    sc.trials = 385;  // 5005 payload bits
  } else if (experiment == "tempmod") {
    sc.trials = 100;
  } else if (experiment == "sweep") {
    sc.off_load = "open_296";
    sc.trials = 600;
    sc.link = LinkBudget{};
    sc.anchor = LinkAnchor{};
  }
  sc.validate();
  return sc;
}

}  // namespace mjn
