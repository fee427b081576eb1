#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mjn/ber_oracle.hpp"
#include "mjn/calibration.hpp"
#include "mjn/channel.hpp"
#include "mjn/errors.hpp"
#include "mjn/modem.hpp"
#include "mjn/random.hpp"
#include "mjn/receiver_model.hpp"
#include "mjn/scenario.hpp"
#include "mjn/stats.hpp"
#include "mjn/text.hpp"

// Experiment runners. Each run is a pure function of its Scenario; the
// write_* helpers turn results into CSV/JSON files under the output directory.
// Monte-Carlo trial i always draws from substream_seed(seed, i), so results do
// not depend on the order trials are evaluated in.
namespace mjn {

inline constexpr std::string_view kCiMethod = "wilson-score-95";

// ---------------------------------------------------------------------------
// Packet-level Monte Carlo

struct PacketRunStats {
  std::uint64_t bits = 0;    // payload bits scored
  std::uint64_t errors = 0;  // payload bit errors at the true alignment
  std::size_t packets = 0;
  std::size_t decoded = 0;   // packets found by detect_packet with an intact payload
  std::vector<double> zero_intensities;
  std::vector<double> one_intensities;

  // First packet, for inspection.
  std::vector<double> trace_intensities;
  Bits trace_sent;
  Bits trace_decided;
  double trace_threshold = 0.0;

  double ber() const { return bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0; }
};

/// Transmits `packets` random packets, each preceded by 0-3 idle bits and
/// followed by two. Bit errors are scored on the payload at the true
/// alignment with the configured threshold policy; packet decoding separately
/// runs preamble detection and deframing.
inline PacketRunStats simulate_packets(const ModemConfig& cfg, double sigma_on, double sigma_off,
                                       std::size_t packets, std::uint64_t seed,
                                       bool keep_intensities = true) {
  cfg.validate();
  PacketRunStats r;
  const std::size_t plen = cfg.packet_bits();
  const std::size_t pre = cfg.preamble.size();
  for (std::size_t p = 0; p < packets; ++p) {
    const std::uint64_t pseed = substream_seed(seed, p);
    GaussianSource src(pseed);
    Bits payload(cfg.payload_bits);
    for (auto& b : payload) b = static_cast<std::uint8_t>(src.bits() & 1U);
    const std::size_t lead = static_cast<std::size_t>(src.bits() % 4U);
    Bits tx(lead, 0);
    const Bits packet = frame(payload, cfg);
    tx.insert(tx.end(), packet.begin(), packet.end());
    tx.insert(tx.end(), 2, 0);

    const auto stream = render_waveform(modulate(tx, cfg), sigma_on, sigma_off,
                                        substream_seed(pseed, 1),
                                        cfg.power == PowerMode::magnitude_squared);
    const auto intensities = bit_intensities(stream, cfg, 0);
    const std::span<const double> rx = std::span(intensities).subspan(lead, plen);
    const double threshold = cfg.threshold.kind == ThresholdPolicy::Kind::fixed
                                 ? cfg.threshold.value
                                 : preamble_midpoint(rx, cfg.preamble);
    const Bits decided = decide(rx, threshold);
    for (std::size_t i = pre; i < plen; ++i) {
      ++r.bits;
      if (decided[i] != packet[i]) ++r.errors;
    }
    if (keep_intensities) {
      for (std::size_t i = 0; i < plen; ++i) {
        (packet[i] ? r.one_intensities : r.zero_intensities).push_back(rx[i]);
      }
    }
    if (p == 0) {
      r.trace_intensities.assign(rx.begin(), rx.end());
      r.trace_sent = packet;
      r.trace_decided = decided;
      r.trace_threshold = threshold;
    }
    try {
      const auto align = detect_packet(intensities, cfg);
      const auto found = decide(std::span(intensities).subspan(align.offset, plen), align.threshold);
      if (deframe(found, cfg) == payload) ++r.decoded;
    } catch (const NoPacketError&) {
    }
    ++r.packets;
  }
  return r;
}

struct BitRunStats {
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double ber() const { return bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0; }
};

/// Unframed random bits through modulate/render/demodulate with a fixed
/// threshold, in blocks of `block` bits.
inline BitRunStats simulate_bits(const ModemConfig& cfg, double sigma_on, double sigma_off,
                                 std::uint64_t n_bits, double threshold, std::uint64_t seed,
                                 std::size_t block = 64) {
  BitRunStats r;
  for (std::uint64_t b = 0; r.bits < n_bits; ++b) {
    const std::uint64_t bseed = substream_seed(seed, b);
    GaussianSource src(bseed);
    Bits tx(static_cast<std::size_t>(std::min<std::uint64_t>(block, n_bits - r.bits)));
    for (auto& bit : tx) bit = static_cast<std::uint8_t>(src.bits() & 1U);
    const auto stream = render_waveform(modulate(tx, cfg), sigma_on, sigma_off,
                                        substream_seed(bseed, 1));
    const auto decided = decide(bit_intensities(stream, cfg, 0), threshold);
    for (std::size_t i = 0; i < tx.size(); ++i) {
      ++r.bits;
      if (decided[i] != tx[i]) ++r.errors;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Feedthrough and temperature modulation

struct LinkRunResult {
  std::string label;
  double sigma_on = 0.0;
  double sigma_off = 0.0;
  PacketRunStats stats;
  stats::KsResult ks;
  stats::Interval ber_ci;

  bool separated() const { return ks.p_value <= 0.01; }
};

inline LinkRunResult run_link(std::string label, const Scenario& sc, double sigma_on,
                              double sigma_off) {
  LinkRunResult r;
  r.label = std::move(label);
  r.sigma_on = sigma_on;
  r.sigma_off = sigma_off;
  r.stats = simulate_packets(sc.modem, sigma_on, sigma_off, sc.trials, sc.seed);
  r.ks = stats::ks_two_sample(r.stats.zero_intensities, r.stats.one_intensities);
  r.ber_ci = stats::wilson_interval(r.stats.errors, r.stats.bits);
  return r;
}

/// Switch between two open loads, two matched loads, or open and matched.
/// Only the last can carry data.
inline LinkRunResult run_feedthrough(FeedthroughVariant variant, const Scenario& sc) {
  const double open = sc.load_variance(sc.feedthrough_open);
  const double matched = sc.load_variance(sc.feedthrough_matched);
  switch (variant) {
    case FeedthroughVariant::open_open:
      return run_link("feedthrough_open_open", sc, open, open);
    case FeedthroughVariant::fifty_fifty:
      return run_link("feedthrough_fifty_fifty", sc, matched, matched);
    case FeedthroughVariant::open_fifty:
      break;
  }
  return run_link("feedthrough_open_fifty", sc, matched, open);
}

/// Two matched loads at different physical temperatures. With swap set the
/// cold load is connected during the ON half-cycles instead.
inline LinkRunResult run_temperature_modulation(const Scenario& sc) {
  for (const auto& name : {sc.on_load, sc.off_load}) {
    const auto load = sc.resolve_load(name);
    if (std::abs(load.impedance_re - sc.chain.shunt_r) > 1e-9 * sc.chain.shunt_r) {
      throw ConfigError("temperature modulation needs matched loads; '" + name + "' is " +
                        text::fmt(load.impedance_re) + " ohm");
    }
  }
  double on = sc.load_variance(sc.on_load);
  double off = sc.load_variance(sc.off_load);
  if (sc.tempmod_swap) std::swap(on, off);
  return run_link(sc.tempmod_swap ? "tempmod_swapped" : "tempmod", sc, on, off);
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationRow {
  std::string load;
  double physical_temp = 0.0;
  bool known_temperature = false;  // used for the fit
  double predicted_msv = 0.0;      // from impedance, temperature and the chain
  std::optional<double> reference_msv;  // measured reference value, if known
  double synthesized_msv = 0.0;    // mean square of the synthesized stream
  double extracted_temp = 0.0;     // inverted through the fitted line
};

struct CalibrationResult {
  LinearFit fit;
  FitUncertainty uncertainty;
  double gain_rx = 0.0;  // from the warmest calibration load
  std::vector<CalibrationRow> rows;
  std::string note;
};

inline constexpr std::string_view kNoiseTempNote =
    "the 46 K / 40 K reference noise temperatures for the open and short terminations carry "
    "ambiguous labels; inverting the calibration line on the reference variances gives "
    "open ~39 K and short ~44.7 K, which is what extracted_temp_k reports";

/// Synthesizes `calibration_samples` samples per load, fits the known-
/// temperature loads and extracts noise temperatures for every load. Known
/// loads use the predicted variance; probe loads use their reference variance
/// when one exists.
inline CalibrationResult run_calibration(const Scenario& sc) {
  if (sc.calibration_loads.size() < 2) {
    throw DegenerateFitError("calibration needs at least two known-temperature loads");
  }
  CalibrationResult r;
  std::vector<CalibrationPoint> points;
  std::vector<double> temps;
  std::vector<double> point_vars;
  std::uint64_t stream_index = 0;
  const auto n = static_cast<double>(sc.calibration_samples);

  auto observe = [&](double sigma_sq) {
    const std::uint64_t s = substream_seed(sc.seed, stream_index++);
    if (sc.calibration_noiseless) return sigma_sq;
    return mean_square(synthesize(sigma_sq, sc.calibration_samples, s));
  };

  for (const auto& name : sc.calibration_loads) {
    const auto load = sc.resolve_load(name);
    CalibrationRow row;
    row.load = name;
    row.physical_temp = load.physical_temp;
    row.known_temperature = true;
    row.predicted_msv = predicted_variance(load, sc.chain);
    row.reference_msv = load.measured_msv;
    row.synthesized_msv = observe(row.predicted_msv);
    points.push_back({load.physical_temp, row.synthesized_msv});
    temps.push_back(load.physical_temp);
    point_vars.push_back(sc.calibration_noiseless
                             ? 0.0
                             : mean_square_estimator_variance(row.predicted_msv, n));
    r.rows.push_back(row);
  }
  r.fit = fit_line(points);
  r.uncertainty = fit_uncertainty(temps, point_vars);

  for (const auto& name : sc.calibration_probes) {
    const auto load = sc.resolve_load(name);
    CalibrationRow row;
    row.load = name;
    row.physical_temp = load.physical_temp;
    row.predicted_msv = predicted_variance(load, sc.chain);
    row.reference_msv = load.measured_msv;
    row.synthesized_msv = observe(load.measured_msv.value_or(row.predicted_msv));
    r.rows.push_back(row);
  }
  for (auto& row : r.rows) row.extracted_temp = extract_noise_temp(row.synthesized_msv, r.fit);

  const auto warmest = std::max_element(r.rows.begin(), r.rows.begin() + static_cast<std::ptrdiff_t>(sc.calibration_loads.size()),
                                        [](const auto& a, const auto& b) { return a.physical_temp < b.physical_temp; });
  const auto wload = sc.resolve_load(warmest->load);
  r.gain_rx = receiver_gain(warmest->synthesized_msv, r.fit.intercept,
                            observed_msv(wload, sc.chain.bandwidth_hz, sc.chain.shunt_r));
  r.note = kNoiseTempNote;
  return r;
}

// ---------------------------------------------------------------------------
// Histogram with the theoretical Gaussian overlay

struct HistogramRow {
  double center = 0.0;
  std::uint64_t count = 0;
  double empirical_density = 0.0;
  double theory_density = 0.0;
};

struct HistogramTable {
  double sigma_sq = 0.0;
  std::size_t samples = 0;
  std::vector<HistogramRow> rows;
  stats::ChiSquareResult gof;
};

/// Bins `xs` over [-5 sigma, 5 sigma] and tests it against the zero-mean
/// Gaussian density of variance sigma_sq. Expected cell counts integrate the
/// density over each bin; samples beyond the range form two tail cells.
inline HistogramTable emit_histogram(std::span<const double> xs, std::size_t bins, double sigma_sq) {
  detail::require(!xs.empty(), "histogram of an empty sample");
  detail::require(sigma_sq > 0.0, "histogram overlay needs sigma_sq > 0");
  const double sd = std::sqrt(sigma_sq);
  const auto h = stats::make_histogram(xs, bins, -5.0 * sd, 5.0 * sd);
  HistogramTable t;
  t.sigma_sq = sigma_sq;
  t.samples = xs.size();
  const double n = static_cast<double>(xs.size());
  std::vector<double> observed{static_cast<double>(h.below)};
  std::vector<double> expected{n * stats::q_function(5.0)};
  for (std::size_t b = 0; b < h.bins(); ++b) {
    HistogramRow row;
    row.center = h.center(b);
    row.count = h.counts[b];
    row.empirical_density = static_cast<double>(row.count) / (n * h.width());
    row.theory_density = gaussian_pdf(row.center, sigma_sq);
    t.rows.push_back(row);
    observed.push_back(static_cast<double>(row.count));
    expected.push_back(n * stats::simpson([&](double x) { return gaussian_pdf(x, sigma_sq); },
                                          h.edge(b), h.edge(b + 1), 16));
  }
  observed.push_back(static_cast<double>(h.above));
  expected.push_back(n * stats::q_function(5.0));
  t.gof = stats::chi_square_gof(observed, expected);
  return t;
}

struct HistogramRun {
  std::string load;
  HistogramTable table;
};

inline std::vector<HistogramRun> run_histograms(const Scenario& sc) {
  std::vector<HistogramRun> out;
  for (std::size_t i = 0; i < sc.histogram_loads.size(); ++i) {
    const auto& name = sc.histogram_loads[i];
    const double sigma_sq = predicted_variance(sc.resolve_load(name), sc.chain);
    const auto stream = synthesize(sigma_sq, sc.histogram_samples, substream_seed(sc.seed, i));
    out.push_back({name, emit_histogram(stream.real, sc.histogram_bins, sigma_sq)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// BER sweeps over distance or data rate

struct SweepPoint {
  double rate_bps = 0.0;
  double distance_m = 0.0;
  double sigma_on = 0.0;
  double sigma_off = 0.0;
  double samples_per_bit = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double ber = 0.0;
  stats::Interval ci;
  std::size_t packets = 0;
  std::size_t decoded = 0;
  double oracle_ber = 0.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::distance;
  double tx_contrast = 0.0;
  std::vector<SweepPoint> points;
  std::map<double, double> throughput_bps;  // distance -> max rate with BER <= max_ber
};

inline ModemConfig modem_for_rate(const Scenario& sc, double rate_bps) {
  ModemConfig cfg = sc.modem;
  cfg.cycles_per_bit = sc.sweep_cycles_per_bit;
  cfg.subcarrier_hz = rate_bps * static_cast<double>(cfg.cycles_per_bit);
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ConfigError("sweep rate " + text::fmt(rate_bps) + " bps: " + e.what());
  }
  return cfg;
}

/// Transmit contrast that puts the oracle BER at the anchor exactly on the
/// anchor's target.
inline double solve_anchor_contrast(const Scenario& sc, const LinkAnchor& anchor, double sigma_off) {
  LinkBudget link = sc.link.value_or(LinkBudget{});
  link.distance_m = anchor.distance_m;
  const double pf = path_factor(link);
  const double spb = modem_for_rate(sc, anchor.rate_bps).samples_per_bit();
  detail::require(anchor.ber > 0.0 && anchor.ber < 0.5, "anchor BER must be in (0, 0.5)");
  auto ber_at = [&](double k) {
    return oracle::ber_at_midpoint(oracle::intensity_moments(spb, sigma_off + k * pf, sigma_off));
  };
  double lo = 1e-12;
  double hi = 1e12;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (ber_at(mid) > anchor.ber ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

/// The OFF load sets the receiver floor; the ON state adds the transmit
/// contrast scaled by the free-space path factor at each distance.
inline SweepResult run_ber_sweep(SweepAxis axis, const Scenario& sc) {
  if (!sc.link) throw ConfigError("sweep needs a link (link.* keys)");
  if (!sc.link_constant && !sc.anchor) {
    throw ConfigError("unanchored link: set link.constant or link.anchor_* keys");
  }
  const double sigma_off = sc.load_variance(sc.off_load);
  SweepResult r;
  r.axis = axis;
  r.tx_contrast = sc.link_constant ? *sc.link_constant
                                   : solve_anchor_contrast(sc, *sc.anchor, sigma_off);

  auto run_point = [&](std::size_t rate_index, double rate, double distance) {
    const ModemConfig cfg = modem_for_rate(sc, rate);
    LinkBudget link = *sc.link;
    link.distance_m = distance;
    SweepPoint pt;
    pt.rate_bps = rate;
    pt.distance_m = distance;
    pt.sigma_off = sigma_off;
    pt.sigma_on = sigma_off + received_contrast(r.tx_contrast, link);
    pt.samples_per_bit = cfg.samples_per_bit();
    // Same packet seeds at every distance for a given rate (common random numbers).
    const auto s = simulate_packets(cfg, pt.sigma_on, pt.sigma_off, sc.trials,
                                    substream_seed(sc.seed, rate_index), false);
    pt.bits = s.bits;
    pt.errors = s.errors;
    pt.ber = s.ber();
    pt.ci = stats::wilson_interval(s.errors, s.bits);
    pt.packets = s.packets;
    pt.decoded = s.decoded;
    pt.oracle_ber = oracle::ber_at_midpoint(
        oracle::intensity_moments(pt.samples_per_bit, pt.sigma_on, pt.sigma_off));
    return pt;
  };

  if (axis == SweepAxis::distance) {
    for (std::size_t ri = 0; ri < sc.sweep_rates_bps.size(); ++ri) {
      for (double d : sc.sweep_distances_m) r.points.push_back(run_point(ri, sc.sweep_rates_bps[ri], d));
    }
  } else {
    for (double d : sc.sweep_distances_m) {
      for (std::size_t ri = 0; ri < sc.sweep_rates_bps.size(); ++ri) {
        r.points.push_back(run_point(ri, sc.sweep_rates_bps[ri], d));
      }
    }
  }
  for (const auto& pt : r.points) {
    auto& best = r.throughput_bps[pt.distance_m];
    if (pt.ber <= sc.sweep_max_ber) best = std::max(best, pt.rate_bps);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Result files

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << body;
  if (!f) throw IoError("write failed for " + path.string());
}

inline nlohmann::json run_header(const Scenario& sc, std::string_view experiment) {
  return {{"experiment", experiment},
          {"scenario", sc.name},
          {"seed", sc.seed},
          {"trials", sc.trials},
          {"rng", kRngAlgorithm}};
}

inline nlohmann::json to_json(const stats::Interval& ci) {
  return {{"lower", ci.lower}, {"upper", ci.upper}, {"method", kCiMethod}};
}

}  // namespace detail

/// Soft intensities and decisions as `bit_index,intensity,decision`.
inline std::string intensities_csv(std::span<const double> intensities, std::span<const std::uint8_t> decisions) {
  std::string out = "bit_index,intensity,decision\n";
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    out += std::to_string(i) + "," + text::fmt(intensities[i]) + "," +
           std::to_string(i < decisions.size() ? decisions[i] : 0) + "\n";
  }
  return out;
}

inline std::vector<std::filesystem::path> write_link_run(const LinkRunResult& r, const Scenario& sc,
                                                         const std::filesystem::path& dir) {
  const auto& s = r.stats;
  nlohmann::json j = detail::run_header(sc, r.label);
  j["sigma_on"] = r.sigma_on;
  j["sigma_off"] = r.sigma_off;
  j["data_rate_bps"] = sc.modem.data_rate_bps();
  j["subcarrier_hz"] = sc.modem.subcarrier_hz;
  j["samples_per_bit"] = sc.modem.samples_per_bit();
  j["bits"] = s.bits;
  j["bit_errors"] = s.errors;
  j["ber"] = s.ber();
  j["ber_ci"] = detail::to_json(r.ber_ci);
  j["packets"] = s.packets;
  j["packets_decoded"] = s.decoded;
  j["ks_statistic"] = r.ks.statistic;
  j["ks_p_value"] = r.ks.p_value;
  j["separated"] = r.separated();
  j["first_packet"] = {{"sent", bits_to_string(s.trace_sent)},
                       {"decided", bits_to_string(s.trace_decided)},
                       {"threshold", s.trace_threshold}};

  std::vector<double> all(s.zero_intensities);
  all.insert(all.end(), s.one_intensities.begin(), s.one_intensities.end());
  const double lo = *std::min_element(all.begin(), all.end());
  double hi = *std::max_element(all.begin(), all.end());
  if (!(hi > lo)) hi = lo + 1.0;
  hi = std::nextafter(hi, INFINITY);
  constexpr std::size_t kBins = 40;
  const auto h0 = stats::make_histogram(s.zero_intensities, kBins, lo, hi);
  const auto h1 = stats::make_histogram(s.one_intensities, kBins, lo, hi);
  std::string hist = "bin_center,count_0,count_1\n";
  for (std::size_t b = 0; b < kBins; ++b) {
    hist += text::fmt(h0.center(b)) + "," + std::to_string(h0.counts[b]) + "," +
            std::to_string(h1.counts[b]) + "\n";
  }

  const std::vector<std::filesystem::path> files = {dir / (r.label + ".json"),
                                                    dir / (r.label + "_hist.csv"),
                                                    dir / (r.label + "_bits.csv")};
  detail::write_file(files[0], j.dump(2) + "\n");
  detail::write_file(files[1], hist);
  detail::write_file(files[2], intensities_csv(s.trace_intensities, s.trace_decided));
  return files;
}

inline std::vector<std::filesystem::path> write_calibration(const CalibrationResult& r, const Scenario& sc,
                                                            const std::filesystem::path& dir) {
  nlohmann::json j = detail::run_header(sc, "calibration");
  j["samples_per_load"] = sc.calibration_noiseless ? 0 : sc.calibration_samples;
  j["fit"] = to_json(r.fit);
  j["fit"]["slope_sd"] = r.uncertainty.slope_sd;
  j["fit"]["intercept_sd"] = r.uncertainty.intercept_sd;
  j["gain_rx"] = r.gain_rx;
  j["note"] = r.note;
  std::string csv =
      "load,physical_temp_k,known,predicted_msv,reference_msv,synthesized_msv,extracted_temp_k\n";
  for (const auto& row : r.rows) {
    nlohmann::json jr = {{"load", row.load},
                         {"physical_temp_k", row.physical_temp},
                         {"known_temperature", row.known_temperature},
                         {"predicted_msv", row.predicted_msv},
                         {"synthesized_msv", row.synthesized_msv},
                         {"extracted_temp_k", row.extracted_temp}};
    if (row.reference_msv) jr["reference_msv"] = *row.reference_msv;
    // The 273 K reference value sits on the calibration line rather than being measured.
    if (row.load == "matched_273") jr["reference_is_derived"] = true;
    j["loads"].push_back(jr);
    csv += row.load + "," + text::fmt(row.physical_temp) + "," + (row.known_temperature ? "1" : "0") +
           "," + text::fmt(row.predicted_msv) + "," +
           (row.reference_msv ? text::fmt(*row.reference_msv) : std::string()) + "," +
           text::fmt(row.synthesized_msv) + "," + text::fmt(row.extracted_temp) + "\n";
  }
  const std::vector<std::filesystem::path> files = {dir / "calibration.json", dir / "calibration_table.csv"};
  detail::write_file(files[0], j.dump(2) + "\n");
  detail::write_file(files[1], csv);
  return files;
}

inline std::string histogram_csv(const HistogramTable& t) {
  std::string csv = "bin_center,count,empirical_density,theory_density,sigma_sq\n";
  for (const auto& row : t.rows) {
    csv += text::fmt(row.center) + "," + std::to_string(row.count) + "," +
           text::fmt(row.empirical_density) + "," + text::fmt(row.theory_density) + "," +
           text::fmt(t.sigma_sq) + "\n";
  }
  return csv;
}

inline std::vector<std::filesystem::path> write_histograms(const std::vector<HistogramRun>& runs,
                                                           const Scenario& sc,
                                                           const std::filesystem::path& dir) {
  nlohmann::json j = detail::run_header(sc, "histogram");
  std::vector<std::filesystem::path> files;
  for (const auto& run : runs) {
    const auto path = dir / ("histogram_" + run.load + ".csv");
    detail::write_file(path, histogram_csv(run.table));
    files.push_back(path);
    j["loads"].push_back({{"load", run.load},
                          {"sigma_sq", run.table.sigma_sq},
                          {"samples", run.table.samples},
                          {"chi_square", run.table.gof.statistic},
                          {"dof", run.table.gof.dof},
                          {"p_value", run.table.gof.p_value},
                          {"passes_at_0.01", run.table.gof.p_value > 0.01}});
  }
  files.push_back(dir / "histogram.json");
  detail::write_file(files.back(), j.dump(2) + "\n");
  return files;
}

inline std::vector<std::filesystem::path> write_sweep(const SweepResult& r, const Scenario& sc,
                                                      const std::filesystem::path& dir) {
  const std::string stem = "sweep_" + to_string(r.axis);
  nlohmann::json j = detail::run_header(sc, stem);
  j["tx_contrast"] = r.tx_contrast;
  j["ci_method"] = kCiMethod;
  j["max_ber"] = sc.sweep_max_ber;
  std::string csv =
      "rate_bps,distance_m,samples_per_bit,sigma_on,sigma_off,bits,errors,ber,ci_lower,ci_upper,"
      "packets,decoded,oracle_ber\n";
  for (const auto& p : r.points) {
    csv += text::fmt(p.rate_bps) + "," + text::fmt(p.distance_m) + "," + text::fmt(p.samples_per_bit) +
           "," + text::fmt(p.sigma_on) + "," + text::fmt(p.sigma_off) + "," + std::to_string(p.bits) +
           "," + std::to_string(p.errors) + "," + text::fmt(p.ber) + "," + text::fmt(p.ci.lower) + "," +
           text::fmt(p.ci.upper) + "," + std::to_string(p.packets) + "," + std::to_string(p.decoded) +
           "," + text::fmt(p.oracle_ber) + "\n";
  }
  for (const auto& [d, rate] : r.throughput_bps) {
    j["throughput"].push_back({{"distance_m", d}, {"max_rate_bps", rate}});
  }
  const std::vector<std::filesystem::path> files = {dir / (stem + ".json"), dir / (stem + ".csv")};
  detail::write_file(files[0], j.dump(2) + "\n");
  detail::write_file(files[1], csv);
  return files;
}

}  // namespace mjn
