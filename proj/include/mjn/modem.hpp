#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mjn/errors.hpp"
#include "mjn/random.hpp"
#include "mjn/receiver_model.hpp"

// On-off keying on a square-wave subcarrier, and its radiometric receiver.
//
// A 0-bit holds the OFF load for the whole bit; a 1-bit connects the ON load
// during the positive half-cycles of the subcarrier and the OFF load during
// the negative ones. The receiver squares each sample (noise carries no
// coherent amplitude, only power), multiplies by the same +/-1 subcarrier and
// integrates over the bit. A 1-bit therefore integrates to about
// N * (sigma_on - sigma_off) / 2 and a 0-bit to about zero.
namespace mjn {

using Bits = std::vector<std::uint8_t>;

/// Barker-7, +++--+-.
inline const Bits& barker7() {
  static const Bits code = {1, 1, 1, 0, 0, 1, 0};
  return code;
}

enum class PowerMode {
  real_squared,       // re^2
  magnitude_squared,  // re^2 + im^2, needs complex samples
};

struct ThresholdPolicy {
  enum class Kind { fixed, preamble_midpoint };
  Kind kind = Kind::preamble_midpoint;
  double value = 0.0;

  static ThresholdPolicy fixed(double v) { return {Kind::fixed, v}; }
  static ThresholdPolicy preamble_midpoint() { return {Kind::preamble_midpoint, 0.0}; }
};

struct ModemConfig {
  double subcarrier_hz = 100.0;
  double sample_rate_hz = 20000.0;
  std::size_t cycles_per_bit = 20;
  ThresholdPolicy threshold = ThresholdPolicy::preamble_midpoint();
  Bits preamble = barker7();
  std::size_t payload_bits = 13;
  PowerMode power = PowerMode::real_squared;
  double correlation_floor = 0.6;

  double data_rate_bps() const { return subcarrier_hz / static_cast<double>(cycles_per_bit); }
  double samples_per_bit() const { return sample_rate_hz / data_rate_bps(); }
  std::size_t packet_bits() const { return preamble.size() + payload_bits; }

  void validate() const {
    detail::require(subcarrier_hz > 0.0, "subcarrier frequency must be > 0");
    detail::require(sample_rate_hz >= 20.0 * subcarrier_hz,
                    "sample rate must be at least 20x the subcarrier frequency");
    detail::require(cycles_per_bit >= 1, "cycles_per_bit must be >= 1");
    detail::require(!preamble.empty(), "preamble must not be empty");
    const auto ones = std::count(preamble.begin(), preamble.end(), 1);
    detail::require(ones > 0 && ones < static_cast<std::ptrdiff_t>(preamble.size()),
                    "preamble must contain both 0s and 1s");
    detail::require(std::all_of(preamble.begin(), preamble.end(), [](auto b) { return b <= 1; }),
                    "preamble bits must be 0 or 1");
  }
};

struct SwitchSchedule {
  std::vector<std::uint8_t> on;  // 1 = ON load connected
  double sample_rate_hz = 1.0;
};

struct DemodResult {
  std::vector<double> soft_intensities;
  Bits decided_bits;
  double threshold_used = 0.0;
};

namespace detail {

// Phase of the subcarrier at integer sample positions. When both rates are
// integers the phase is tracked exactly as (i * f_sc) mod f_s in integer
// arithmetic; otherwise it is evaluated per sample with fmod.
class SubcarrierPhase {
 public:
  SubcarrierPhase(const ModemConfig& cfg, std::int64_t start)
      : fsc_(cfg.subcarrier_hz), fs_(cfg.sample_rate_hz), index_(start) {
    exact_ = fsc_ == std::floor(fsc_) && fs_ == std::floor(fs_) && fs_ < 4.0e12 && fsc_ < 4.0e12;
    if (exact_) {
      num_ = static_cast<std::int64_t>(fsc_);
      den_ = static_cast<std::int64_t>(fs_);
      const auto n = static_cast<__int128>(start) * num_;
      auto r = static_cast<std::int64_t>(n % den_);
      if (r < 0) r += den_;
      acc_ = r;
    }
  }

  // +1 on [0, 1/2) of each cycle, -1 on [1/2, 1). This is sgn(sin) with the
  // rising zero crossing mapped to +1.
  int value() const {
    if (exact_) return 2 * acc_ < den_ ? 1 : -1;
    double frac = std::fmod(static_cast<double>(index_) * fsc_, fs_);
    if (frac < 0.0) frac += fs_;
    return 2.0 * frac < fs_ ? 1 : -1;
  }

  void advance() {
    ++index_;
    if (exact_) {
      acc_ += num_;
      if (acc_ >= den_) acc_ -= den_;
    }
  }

 private:
  double fsc_;
  double fs_;
  std::int64_t index_;
  bool exact_ = false;
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  std::int64_t acc_ = 0;
};

}  // namespace detail

/// First sample of bit k: ceil(k * cycles_per_bit * f_s / f_sc).
inline std::size_t bit_boundary(const ModemConfig& cfg, std::size_t k) {
  const double x = static_cast<double>(k) * static_cast<double>(cfg.cycles_per_bit) *
                   cfg.sample_rate_hz / cfg.subcarrier_hz;
  return static_cast<std::size_t>(std::ceil(x));
}

/// +/-1 square subcarrier sampled at f_s, starting phase_offset samples in.
inline std::vector<std::int8_t> subcarrier_wave(const ModemConfig& cfg, std::size_t n,
                                                std::int64_t phase_offset = 0) {
  detail::require(n > 0, "subcarrier length must be > 0");
  detail::require(cfg.subcarrier_hz > 0.0 && cfg.sample_rate_hz > 0.0, "rates must be > 0");
  std::vector<std::int8_t> out(n);
  detail::SubcarrierPhase phase(cfg, phase_offset);
  for (auto& v : out) {
    v = static_cast<std::int8_t>(phase.value());
    phase.advance();
  }
  return out;
}

inline SwitchSchedule modulate(std::span<const std::uint8_t> bits, const ModemConfig& cfg) {
  detail::require(!bits.empty(), "cannot modulate an empty bit sequence");
  cfg.validate();
  SwitchSchedule s;
  s.sample_rate_hz = cfg.sample_rate_hz;
  s.on.resize(bit_boundary(cfg, bits.size()), 0);
  detail::SubcarrierPhase phase(cfg, 0);
  std::size_t i = 0;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    detail::require(bits[k] <= 1, "bits must be 0 or 1");
    const std::size_t end = bit_boundary(cfg, k + 1);
    for (; i < end; ++i, phase.advance()) {
      s.on[i] = (bits[k] == 1 && phase.value() > 0) ? 1 : 0;
    }
  }
  return s;
}

/// Draws each sample from N(0, sigma_on) where the schedule is ON and
/// N(0, sigma_off) where it is OFF.
inline SampleStream render_waveform(const SwitchSchedule& schedule, double sigma_on,
                                    double sigma_off, std::uint64_t seed, bool complex = false) {
  detail::require(sigma_on >= 0.0 && sigma_off >= 0.0, "variances must be >= 0");
  SampleStream s;
  s.sample_rate_hz = schedule.sample_rate_hz;
  s.seed = seed;
  s.real.resize(schedule.on.size());
  if (complex) s.imag.resize(schedule.on.size());
  const double sd_on = std::sqrt(sigma_on);
  const double sd_off = std::sqrt(sigma_off);
  GaussianSource src(seed);
  for (std::size_t i = 0; i < schedule.on.size(); ++i) {
    const double sd = schedule.on[i] ? sd_on : sd_off;
    s.real[i] = sd * src.next();
    if (complex) s.imag[i] = sd * src.next();
  }
  return s;
}

/// Integrate-and-dump over every complete bit after sync_offset.
inline std::vector<double> bit_intensities(const SampleStream& stream, const ModemConfig& cfg,
                                           std::size_t sync_offset = 0) {
  cfg.validate();
  const bool magnitude = cfg.power == PowerMode::magnitude_squared;
  detail::require(!magnitude || stream.is_complex(),
                  "magnitude power detection needs complex samples");
  const std::size_t avail = stream.size() > sync_offset ? stream.size() - sync_offset : 0;
  detail::require(avail >= bit_boundary(cfg, 1) && bit_boundary(cfg, 1) > 0,
                  "stream is shorter than one bit period after the sync offset");
  std::vector<double> out;
  detail::SubcarrierPhase phase(cfg, 0);
  std::size_t i = 0;
  for (std::size_t k = 0;; ++k) {
    const std::size_t end = bit_boundary(cfg, k + 1);
    if (end > avail) break;
    double acc = 0.0;
    for (; i < end; ++i, phase.advance()) {
      const std::size_t j = sync_offset + i;
      double p = stream.real[j] * stream.real[j];
      if (magnitude) p += stream.imag[j] * stream.imag[j];
      acc += phase.value() > 0 ? p : -p;
    }
    out.push_back(acc);
  }
  return out;
}

/// Midpoint between the mean intensity of the preamble's 1-bits and 0-bits.
inline double preamble_midpoint(std::span<const double> intensities, std::span<const std::uint8_t> preamble) {
  detail::require(intensities.size() >= preamble.size(),
                  "fewer intensities than preamble bits");
  double sum1 = 0.0;
  double sum0 = 0.0;
  std::size_t n1 = 0;
  std::size_t n0 = 0;
  for (std::size_t i = 0; i < preamble.size(); ++i) {
    if (preamble[i]) {
      sum1 += intensities[i];
      ++n1;
    } else {
      sum0 += intensities[i];
      ++n0;
    }
  }
  detail::require(n1 > 0 && n0 > 0, "preamble must contain both 0s and 1s");
  return 0.5 * (sum1 / static_cast<double>(n1) + sum0 / static_cast<double>(n0));
}

inline Bits decide(std::span<const double> intensities, double threshold) {
  Bits bits(intensities.size());
  std::transform(intensities.begin(), intensities.end(), bits.begin(),
                 [threshold](double x) { return static_cast<std::uint8_t>(x > threshold); });
  return bits;
}

/// With the preamble_midpoint policy the packet is assumed to start at
/// sync_offset and the threshold is learned from its preamble.
inline DemodResult demodulate(const SampleStream& stream, const ModemConfig& cfg,
                              std::size_t sync_offset = 0) {
  DemodResult r;
  r.soft_intensities = bit_intensities(stream, cfg, sync_offset);
  r.threshold_used = cfg.threshold.kind == ThresholdPolicy::Kind::fixed
                         ? cfg.threshold.value
                         : preamble_midpoint(r.soft_intensities, cfg.preamble);
  r.decided_bits = decide(r.soft_intensities, r.threshold_used);
  return r;
}

inline Bits frame(std::span<const std::uint8_t> payload, const ModemConfig& cfg) {
  detail::require(payload.size() == cfg.payload_bits,
                  "payload must be exactly " + std::to_string(cfg.payload_bits) + " bits");
  Bits packet(cfg.preamble.begin(), cfg.preamble.end());
  for (auto b : payload) {
    detail::require(b <= 1, "bits must be 0 or 1");
    packet.push_back(b);
  }
  return packet;
}

/// Payload of a packet starting at bits[0]; NoPacketError unless the preamble
/// matches exactly.
inline Bits deframe(std::span<const std::uint8_t> bits, const ModemConfig& cfg) {
  if (bits.size() < cfg.packet_bits()) throw NoPacketError("bit sequence shorter than a packet");
  if (!std::equal(cfg.preamble.begin(), cfg.preamble.end(), bits.begin())) {
    throw NoPacketError("preamble mismatch");
  }
  const auto first = bits.begin() + static_cast<std::ptrdiff_t>(cfg.preamble.size());
  return Bits(first, first + static_cast<std::ptrdiff_t>(cfg.payload_bits));
}

struct PacketAlignment {
  std::size_t offset = 0;  // bit index of the first preamble bit
  double threshold = 0.0;
  double correlation = 0.0;
};

/// Slides the +/-1 preamble over the mean-centered intensities and returns the
/// earliest offset of maximum normalized correlation among offsets where a
/// whole packet fits.
inline PacketAlignment detect_packet(std::span<const double> intensities, const ModemConfig& cfg) {
  cfg.validate();
  const std::size_t plen = cfg.preamble.size();
  detail::require(intensities.size() >= cfg.packet_bits(),
                  "fewer intensities than one packet");
  std::vector<double> code(plen);
  double code_mean = 0.0;
  for (std::size_t i = 0; i < plen; ++i) {
    code[i] = cfg.preamble[i] ? 1.0 : -1.0;
    code_mean += code[i];
  }
  code_mean /= static_cast<double>(plen);
  double code_norm = 0.0;
  for (auto& c : code) {
    c -= code_mean;
    code_norm += c * c;
  }
  code_norm = std::sqrt(code_norm);

  PacketAlignment best;
  best.correlation = -2.0;
  const std::size_t last = intensities.size() - cfg.packet_bits();
  for (std::size_t off = 0; off <= last; ++off) {
    const auto w = intensities.subspan(off, plen);
    double m = 0.0;
    for (double x : w) m += x;
    m /= static_cast<double>(plen);
    double dot = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < plen; ++i) {
      dot += code[i] * (w[i] - m);
      norm += (w[i] - m) * (w[i] - m);
    }
    const double corr = norm > 0.0 ? dot / (code_norm * std::sqrt(norm)) : 0.0;
    if (corr > best.correlation) {
      best.correlation = corr;
      best.offset = off;
    }
  }
  if (best.correlation < cfg.correlation_floor) {
    throw NoPacketError("preamble correlation " + std::to_string(best.correlation) +
                        " below floor " + std::to_string(cfg.correlation_floor));
  }
  best.threshold = cfg.threshold.kind == ThresholdPolicy::Kind::fixed
                       ? cfg.threshold.value
                       : preamble_midpoint(intensities.subspan(best.offset, plen), cfg.preamble);
  return best;
}

/// MSB-first hex rendering of a bit sequence, zero-padded to whole bytes.
inline std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char digits[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int nibble = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i + j < bits.size()) nibble |= bits[i + j] & 1;
    }
    out.push_back(digits[nibble]);
  }
  if (out.size() % 2 != 0) out.push_back('0');
  return out;
}

inline std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string out;
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

inline Bits bits_from_string(std::string_view s) {
  Bits bits;
  for (char c : s) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ' ' && c != ',') {
      throw ParseError("bit pattern may contain only 0 and 1: '" + std::string(s) + "'");
    }
  }
  return bits;
}

}  // namespace mjn
