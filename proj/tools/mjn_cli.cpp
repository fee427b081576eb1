// Command-line front end for the modulated Johnson noise simulator.
//
//   mjn <subcommand> [--scenario FILE] [--seed N] [--out DIR] [--trials N] ...
//
// Exit codes: 0 success, 2 configuration, 3 parse, 4 domain, 5 no packet,
// 6 I/O.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mjn/mjn.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
};

mjn::Scenario load(const GlobalOptions& g, std::string_view experiment) {
  mjn::Scenario sc = g.scenario.empty() ? mjn::default_scenario(experiment)
                                        : mjn::load_scenario(g.scenario);
  if (g.seed) sc.seed = *g.seed;
  if (g.trials) sc.trials = *g.trials;
  if (!g.out.empty()) sc.outputs = g.out;
  sc.validate();
  return sc;
}

void print_files(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << "  wrote " << f.string() << "\n";
}

void report_link(const mjn::LinkRunResult& r) {
  const auto& s = r.stats;
  std::cout << r.label << ": sigma_on=" << mjn::text::fmt(r.sigma_on)
            << " sigma_off=" << mjn::text::fmt(r.sigma_off) << " bits=" << s.bits
            << " errors=" << s.errors << " ber=" << mjn::text::fmt(s.ber()) << " ["
            << mjn::text::fmt(r.ber_ci.lower) << ", " << mjn::text::fmt(r.ber_ci.upper) << "]"
            << " packets=" << s.decoded << "/" << s.packets
            << " ks_p=" << mjn::text::fmt(r.ks.p_value)
            << (r.separated() ? " (0/1 separable)" : " (0/1 indistinguishable)") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modulated Johnson noise communication simulator"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--scenario", g.scenario, "Scenario file (key = value)");
  app.add_option("--seed", g.seed, "Override the scenario seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--trials", g.trials, "Override the number of packets per run/point");
  app.fallthrough();

  auto* feedthrough = app.add_subcommand("feedthrough", "Feedthrough control experiments");
  std::string variant;
  feedthrough->add_option("--variant", variant, "open_open | fifty_fifty | open_fifty | all");

  auto* tempmod = app.add_subcommand("tempmod", "Hot/cold matched-load modulation");
  bool swap = false;
  tempmod->add_flag("--swap", swap, "Connect the cold load in the ON state");

  auto* calibrate = app.add_subcommand("calibrate", "Noise-temperature calibration");
  std::string points_csv;
  bool noiseless = false;
  std::optional<std::size_t> cal_samples;
  calibrate->add_option("--points", points_csv, "Fit a temp_k,msv_sdr CSV instead of simulating");
  calibrate->add_flag("--noiseless", noiseless, "Use the forward model without sampling noise");
  calibrate->add_option("--samples", cal_samples, "Samples per load");

  auto* histogram = app.add_subcommand("histogram", "Sample histograms with Gaussian overlay");
  std::optional<std::size_t> bins;
  std::optional<std::size_t> hist_samples;
  std::vector<std::string> hist_loads;
  histogram->add_option("--bins", bins, "Number of bins");
  histogram->add_option("--samples", hist_samples, "Samples per load");
  histogram->add_option("--load", hist_loads, "Load name (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "BER sweep over distance or data rate");
  std::string axis;
  sweep->add_option("--axis", axis, "distance | rate");

  auto* demod = app.add_subcommand("demod-iq", "Demodulate a recorded IQ capture");
  std::string input;
  std::string sidecar;
  std::string format;
  std::optional<double> rate;
  std::optional<double> scale;
  std::size_t sync = 0;
  std::optional<std::size_t> hampel_k;
  bool detect = false;
  demod->add_option("--input", input, "IQ file")->required();
  demod->add_option("--header", sidecar, "Sidecar JSON header");
  demod->add_option("--format", format, "cf32_interleaved | i16_interleaved | csv");
  demod->add_option("--rate", rate, "Sample rate, Hz");
  demod->add_option("--scale", scale, "SDR units per stored unit");
  demod->add_option("--sync", sync, "Sample offset of the first bit");
  demod->add_option("--hampel", hampel_k, "Apply a Hampel filter with this k before demodulation");
  demod->add_flag("--detect", detect, "Locate the packet by preamble correlation");

  auto* render = app.add_subcommand("render-iq", "Render one packet to a cf32 capture");
  std::string output;
  std::string payload_bits;
  std::size_t lead_bits = 2;
  render->add_option("--output", output, "cf32 output file (a .json sidecar is written next to it)")->required();
  render->add_option("--payload", payload_bits, "Payload bits, e.g. 1011001110001");
  render->add_option("--lead", lead_bits, "Idle 0-bits before the packet");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mjn::exit_code(mjn::ErrorCategory::config);
  }

  try {
    if (feedthrough->parsed()) {
      const auto sc = load(g, "feedthrough");
      std::vector<mjn::FeedthroughVariant> variants;
      if (variant == "all") {
        variants = {mjn::FeedthroughVariant::open_open, mjn::FeedthroughVariant::fifty_fifty,
                    mjn::FeedthroughVariant::open_fifty};
      } else {
        variants = {variant.empty() ? sc.feedthrough_variant : mjn::parse_feedthrough_variant(variant)};
      }
      for (auto v : variants) {
        const auto r = mjn::run_feedthrough(v, sc);
        report_link(r);
        print_files(mjn::write_link_run(r, sc, sc.outputs));
      }
    } else if (tempmod->parsed()) {
      auto sc = load(g, "tempmod");
      sc.tempmod_swap = sc.tempmod_swap || swap;
      const auto r = mjn::run_temperature_modulation(sc);
      report_link(r);
      print_files(mjn::write_link_run(r, sc, sc.outputs));
    } else if (calibrate->parsed()) {
      auto sc = load(g, "calibrate");
      if (!points_csv.empty()) {
        std::ifstream in(points_csv);
        if (!in) throw mjn::IoError("cannot open " + points_csv);
        const auto points = mjn::read_calibration_csv(in);
        const auto fit = mjn::fit_line(points);
        const auto json = mjn::to_json(fit).dump(2);
        std::cout << json << "\n";
        const fs::path path = fs::path(sc.outputs) / "calibration_fit.json";
        mjn::detail::write_file(path, json + "\n");
        print_files({path});
      } else {
        sc.calibration_noiseless = sc.calibration_noiseless || noiseless;
        if (cal_samples) sc.calibration_samples = *cal_samples;
        const auto r = mjn::run_calibration(sc);
        std::cout << "fit: slope=" << mjn::text::fmt(r.fit.slope) << " (sd "
                  << mjn::text::fmt(r.uncertainty.slope_sd) << ") intercept="
                  << mjn::text::fmt(r.fit.intercept) << " (sd "
                  << mjn::text::fmt(r.uncertainty.intercept_sd) << ") gain_rx="
                  << mjn::text::fmt(r.gain_rx) << "\n";
        for (const auto& row : r.rows) {
          std::cout << "  " << row.load << ": msv=" << mjn::text::fmt(row.synthesized_msv)
                    << " T_N=" << mjn::text::fmt(row.extracted_temp) << " K\n";
        }
        std::cout << "note: " << r.note << "\n";
        print_files(mjn::write_calibration(r, sc, sc.outputs));
      }
    } else if (histogram->parsed()) {
      auto sc = load(g, "histogram");
      if (bins) sc.histogram_bins = *bins;
      if (hist_samples) sc.histogram_samples = *hist_samples;
      if (!hist_loads.empty()) sc.histogram_loads = hist_loads;
      sc.validate();
      const auto runs = mjn::run_histograms(sc);
      for (const auto& run : runs) {
        std::cout << run.load << ": sigma_sq=" << mjn::text::fmt(run.table.sigma_sq)
                  << " chi2=" << mjn::text::fmt(run.table.gof.statistic) << " dof=" << run.table.gof.dof
                  << " p=" << mjn::text::fmt(run.table.gof.p_value) << "\n";
      }
      print_files(mjn::write_histograms(runs, sc, sc.outputs));
    } else if (sweep->parsed()) {
      const auto sc = load(g, "sweep");
      const auto r = mjn::run_ber_sweep(axis.empty() ? sc.sweep_axis : mjn::parse_sweep_axis(axis), sc);
      std::cout << "tx_contrast=" << mjn::text::fmt(r.tx_contrast) << "\n";
      for (const auto& p : r.points) {
        std::cout << "  rate=" << mjn::text::fmt(p.rate_bps) << "bps d=" << mjn::text::fmt(p.distance_m)
                  << "m ber=" << mjn::text::fmt(p.ber) << " [" << mjn::text::fmt(p.ci.lower) << ", "
                  << mjn::text::fmt(p.ci.upper) << "] oracle=" << mjn::text::fmt(p.oracle_ber) << "\n";
      }
      for (const auto& [d, best] : r.throughput_bps) {
        std::cout << "  throughput at " << mjn::text::fmt(d) << " m: " << mjn::text::fmt(best) << " bps\n";
      }
      print_files(mjn::write_sweep(r, sc, sc.outputs));
    } else if (demod->parsed()) {
      const auto sc = load(g, "demod-iq");
      mjn::IqFileHeader header;
      if (!sidecar.empty()) {
        header = mjn::read_iq_sidecar(sidecar);
      } else {
        if (format.empty() || !rate) throw mjn::ConfigError("demod-iq needs --header or --format and --rate");
        header.format = mjn::parse_iq_format(format);
        header.sample_rate_hz = *rate;
      }
      if (!format.empty()) header.format = mjn::parse_iq_format(format);
      if (rate) header.sample_rate_hz = *rate;
      if (scale) header.scale = *scale;
      auto stream = mjn::read_iq(input, header);
      if (hampel_k) {
        stream.real = mjn::hampel_filter(stream.real, *hampel_k);
        if (stream.is_complex()) stream.imag = mjn::hampel_filter(stream.imag, *hampel_k);
      }
      mjn::ModemConfig cfg = sc.modem;
      cfg.sample_rate_hz = header.sample_rate_hz;
      try {
        cfg.validate();
      } catch (const mjn::DomainError& e) {
        throw mjn::ConfigError(e.what());
      }
      std::vector<double> intensities;
      mjn::Bits decisions;
      if (detect) {
        intensities = mjn::bit_intensities(stream, cfg, sync);
        const auto align = mjn::detect_packet(intensities, cfg);
        decisions = mjn::decide(intensities, align.threshold);
        const auto packet = std::span<const std::uint8_t>(decisions).subspan(align.offset, cfg.packet_bits());
        std::cout << "packet at bit " << align.offset << " correlation=" << mjn::text::fmt(align.correlation)
                  << " threshold=" << mjn::text::fmt(align.threshold) << "\n"
                  << "  bits=" << mjn::bits_to_string(packet) << " hex=" << mjn::bits_to_hex(packet) << "\n";
        const auto payload = mjn::deframe(packet, cfg);
        std::cout << "  payload=" << mjn::bits_to_string(payload) << " hex=" << mjn::bits_to_hex(payload) << "\n";
      } else {
        const auto r = mjn::demodulate(stream, cfg, sync);
        intensities = r.soft_intensities;
        decisions = r.decided_bits;
        std::cout << "threshold=" << mjn::text::fmt(r.threshold_used) << " bits=" << mjn::bits_to_string(decisions)
                  << " hex=" << mjn::bits_to_hex(decisions) << "\n";
      }
      const fs::path path = fs::path(sc.outputs) / "demod.csv";
      mjn::detail::write_file(path, mjn::intensities_csv(intensities, decisions));
      print_files({path});
    } else if (render->parsed()) {
      const auto sc = load(g, "render-iq");
      mjn::Bits payload;
      if (payload_bits.empty()) {
        mjn::GaussianSource src(mjn::substream_seed(sc.seed, 0));
        payload.resize(sc.modem.payload_bits);
        for (auto& b : payload) b = static_cast<std::uint8_t>(src.bits() & 1U);
      } else {
        payload = mjn::bits_from_string(payload_bits);
      }
      mjn::Bits tx(lead_bits, 0);
      const auto packet = mjn::frame(payload, sc.modem);
      tx.insert(tx.end(), packet.begin(), packet.end());
      tx.insert(tx.end(), 2, 0);
      const auto stream = mjn::render_waveform(mjn::modulate(tx, sc.modem), sc.load_variance(sc.on_load),
                                               sc.load_variance(sc.off_load), sc.seed, true);
      mjn::IqFileHeader header;
      header.sample_rate_hz = sc.modem.sample_rate_hz;
      mjn::write_iq(output, stream, header);
      fs::path side = fs::path(output);
      side += ".json";
      mjn::detail::write_file(side, mjn::to_json(header).dump(2) + "\n");
      std::cout << "payload=" << mjn::bits_to_string(payload) << " hex=" << mjn::bits_to_hex(payload)
                << " samples=" << stream.size() << "\n";
      print_files({output, side});
    }
  } catch (const mjn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mjn::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
