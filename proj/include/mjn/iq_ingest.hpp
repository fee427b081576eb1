#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mjn/errors.hpp"
#include "mjn/receiver_model.hpp"
#include "mjn/text.hpp"

// Recorded IQ captures. Binary formats are little-endian interleaved (I, Q)
// records; the CSV format holds one `i,q` record per line. Every stored value
// is multiplied by `scale` to give SDR units.
namespace mjn {

enum class IqFormat { cf32_interleaved, i16_interleaved, csv };

inline IqFormat parse_iq_format(std::string_view name) {
  if (name == "cf32_interleaved" || name == "cf32") return IqFormat::cf32_interleaved;
  if (name == "i16_interleaved" || name == "i16" || name == "cs16") return IqFormat::i16_interleaved;
  if (name == "csv") return IqFormat::csv;
  throw ConfigError("unknown IQ format '" + std::string(name) + "'");
}

inline std::string to_string(IqFormat f) {
  switch (f) {
    case IqFormat::cf32_interleaved: return "cf32_interleaved";
    case IqFormat::i16_interleaved: return "i16_interleaved";
    case IqFormat::csv: return "csv";
  }
  return "?";
}

struct IqFileHeader {
  IqFormat format = IqFormat::cf32_interleaved;
  double sample_rate_hz = 1e6;
  double center_freq_hz = 1.42e9;
  double scale = 1.0;

  void validate() const {
    if (!(sample_rate_hz > 0.0)) throw ConfigError("IQ sample rate must be > 0");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("IQ scale must be > 0");
  }

  std::size_t record_bytes() const {
    return format == IqFormat::cf32_interleaved ? 8 : format == IqFormat::i16_interleaved ? 4 : 0;
  }
};

inline nlohmann::json to_json(const IqFileHeader& h) {
  return {{"format", to_string(h.format)},
          {"sample_rate_hz", h.sample_rate_hz},
          {"center_freq_hz", h.center_freq_hz},
          {"scale", h.scale}};
}

inline IqFileHeader iq_header_from_json(const nlohmann::json& j) {
  IqFileHeader h;
  try {
    h.format = parse_iq_format(j.at("format").get<std::string>());
    h.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    h.center_freq_hz = j.value("center_freq_hz", h.center_freq_hz);
    h.scale = j.value("scale", h.scale);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("IQ sidecar: ") + e.what());
  }
  h.validate();
  return h;
}

/// Reads a sidecar JSON header (keys: format, sample_rate_hz, center_freq_hz, scale).
inline IqFileHeader read_iq_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open IQ sidecar " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("IQ sidecar " + path.string() + ": " + e.what());
  }
  return iq_header_from_json(j);
}

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IQ file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline void store_le32(std::uint32_t v, std::vector<unsigned char>& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void store_le16(std::uint16_t v, std::vector<unsigned char>& out) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void check_finite(double v, std::size_t offset) {
  if (!std::isfinite(v)) {
    throw ParseError("non-finite sample at byte offset " + std::to_string(offset));
  }
}

}  // namespace detail

inline SampleStream read_iq(const std::filesystem::path& path, const IqFileHeader& header) {
  header.validate();
  const auto bytes = detail::read_bytes(path);
  SampleStream s;
  s.sample_rate_hz = header.sample_rate_hz;

  if (header.format == IqFormat::csv) {
    std::size_t offset = 0;
    std::size_t line_no = 0;
    const std::string_view all(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    while (offset < all.size()) {
      auto nl = all.find('\n', offset);
      if (nl == std::string_view::npos) nl = all.size();
      const auto line = text::trim(text::strip_comment(all.substr(offset, nl - offset)));
      ++line_no;
      if (!line.empty() && !(s.empty() && (line == "i,q" || line == "I,Q"))) {
        const auto fields = text::split(line, ',');
        if (fields.size() != 2) {
          throw ParseError("truncated IQ record on line " + std::to_string(line_no) +
                           " at byte offset " + std::to_string(offset));
        }
        const double i = text::parse_double(fields[0], "I at byte offset " + std::to_string(offset));
        const double q = text::parse_double(fields[1], "Q at byte offset " + std::to_string(offset));
        detail::check_finite(i, offset);
        detail::check_finite(q, offset);
        s.real.push_back(i * header.scale);
        s.imag.push_back(q * header.scale);
      }
      offset = nl + 1;
    }
  } else {
    const std::size_t rec = header.record_bytes();
    const std::size_t whole = bytes.size() / rec * rec;
    if (whole != bytes.size()) {
      throw ParseError("truncated IQ record at byte offset " + std::to_string(whole) + " of " +
                       path.string());
    }
    const std::size_t n = bytes.size() / rec;
    s.real.resize(n);
    s.imag.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const unsigned char* p = bytes.data() + k * rec;
      double i = 0.0;
      double q = 0.0;
      if (header.format == IqFormat::cf32_interleaved) {
        i = std::bit_cast<float>(detail::load_le32(p));
        q = std::bit_cast<float>(detail::load_le32(p + 4));
      } else {
        i = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | p[1] << 8));
        q = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[2] | p[3] << 8));
      }
      detail::check_finite(i, k * rec);
      detail::check_finite(q, k * rec);
      s.real[k] = i * header.scale;
      s.imag[k] = q * header.scale;
    }
  }
  if (s.empty()) throw DomainError("IQ file " + path.string() + " holds no samples");
  return s;
}

/// Writes `stream` in `header.format`. Real-only streams are written with Q = 0.
/// cf32 stores float(x / scale); i16 rounds and saturates.
inline void write_iq(const std::filesystem::path& path, const SampleStream& stream,
                     const IqFileHeader& header) {
  header.validate();
  auto q_at = [&](std::size_t k) { return stream.is_complex() ? stream.imag[k] : 0.0; };
  std::vector<unsigned char> out;
  if (header.format == IqFormat::csv) {
    std::string body = "i,q\n";
    char buf[64];
    for (std::size_t k = 0; k < stream.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", stream.real[k] / header.scale,
                    q_at(k) / header.scale);
      body += buf;
    }
    out.assign(body.begin(), body.end());
  } else if (header.format == IqFormat::cf32_interleaved) {
    out.reserve(stream.size() * 8);
    for (std::size_t k = 0; k < stream.size(); ++k) {
      detail::store_le32(std::bit_cast<std::uint32_t>(static_cast<float>(stream.real[k] / header.scale)), out);
      detail::store_le32(std::bit_cast<std::uint32_t>(static_cast<float>(q_at(k) / header.scale)), out);
    }
  } else {
    auto to_i16 = [](double v) {
      const double r = std::clamp(std::round(v), -32768.0, 32767.0);
      return static_cast<std::uint16_t>(static_cast<std::int16_t>(r));
    };
    out.reserve(stream.size() * 4);
    for (std::size_t k = 0; k < stream.size(); ++k) {
      detail::store_le16(to_i16(stream.real[k] / header.scale), out);
      detail::store_le16(to_i16(q_at(k) / header.scale), out);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write IQ file " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

namespace detail {

// Median of a scratch buffer; reorders it.
inline double median_inplace(std::span<double> xs) {
  const std::size_t n = xs.size();
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(xs.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Scales a MAD to a Gaussian standard deviation.
inline constexpr double kMadToSigma = 1.482602218505602;

namespace detail {

// One sliding-window pass; returns the number of replaced samples.
inline std::size_t hampel_pass(std::vector<double>& xs, std::size_t k, double n_sigma) {
  const std::vector<double> in = xs;
  std::vector<double> window;
  window.reserve(2 * k + 1);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::size_t lo = i >= k ? i - k : 0;
    const std::size_t hi = std::min(in.size() - 1, i + k);
    window.assign(in.begin() + static_cast<std::ptrdiff_t>(lo), in.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const double med = median_inplace(window);
    for (double& w : window) w = std::abs(w - med);
    const double mad = median_inplace(window);
    if (std::abs(in[i] - med) > n_sigma * kMadToSigma * mad) {
      xs[i] = med;
      ++changed;
    }
  }
  return changed;
}

}  // namespace detail

inline constexpr std::size_t kHampelMaxPasses = 1000;

/// Hampel identifier. Each point is compared with the median of the window
/// [i - k, i + k] (clipped at the ends) and replaced by that median when it
/// deviates by more than n_sigma * 1.4826 * MAD. Passes repeat until
/// none changes a sample.
inline std::vector<double> hampel_filter(std::span<const double> xs, std::size_t k = 100,
                                         double n_sigma = 3.0) {
  detail::require(k >= 1, "Hampel window half-width k must be >= 1");
  detail::require(n_sigma >= 0.0, "Hampel n_sigma must be >= 0");
  detail::require(xs.size() > 2 * k, "sequence too short for the Hampel window");
  std::vector<double> out(xs.begin(), xs.end());
  // Replacing a sample moves its neighbours' medians and MADs, so a single
  // pass can leave new outliers behind. Repeat until nothing changes.
  for (std::size_t pass = 0; pass < kHampelMaxPasses; ++pass) {
    if (detail::hampel_pass(out, k, n_sigma) == 0) return out;
  }
  throw DomainError("Hampel filter did not settle within " + std::to_string(kHampelMaxPasses) + " passes");
}

}  // namespace mjn
