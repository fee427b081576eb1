#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "mjn/errors.hpp"
#include "mjn/noise_physics.hpp"
#include "mjn/random.hpp"

namespace mjn {

/// Receive chain in SDR units: sigma^2 = <V^2> * gain_rx + offset.
struct ReceiverChain {
  double gain_rx = 2.3e11;  // SDR units^2 per volt^2
  double offset = 0.0212;   // SDR units^2, the receive-chain floor
  double bandwidth_hz = 1e6;
  double shunt_r = kLnaInputOhms;
  double lna_noise_temp = kLnaNoiseTemp;

  void validate() const {
    detail::require(gain_rx > 0.0, "receiver gain must be > 0");
    detail::require(offset >= 0.0, "receiver offset must be >= 0");
    detail::require(bandwidth_hz > 0.0, "receiver bandwidth must be > 0");
    detail::require(shunt_r > 0.0, "receiver input impedance must be > 0");
  }
};

/// Baseband samples in SDR units. Real-only streams leave `imag` empty;
/// complex streams carry one imaginary value per real value.
struct SampleStream {
  std::vector<double> real;
  std::vector<double> imag;
  double sample_rate_hz = 1.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return real.size(); }
  bool empty() const { return real.empty(); }
  bool is_complex() const { return !imag.empty(); }
};

inline double sdr_variance(double physical_msv, const ReceiverChain& chain) {
  detail::require(physical_msv >= 0.0, "physical mean-square voltage must be >= 0");
  return physical_msv * chain.gain_rx + chain.offset;
}

/// Predicted SDR variance of a load seen through `chain`.
inline double predicted_variance(const LoadProfile& load, const ReceiverChain& chain) {
  return sdr_variance(observed_msv(load, chain.bandwidth_hz, chain.shunt_r), chain);
}

/// i.i.d. zero-mean Gaussian samples of variance sigma_sq. Complex streams
/// draw real and imaginary parts alternately from the same source.
inline SampleStream synthesize(double sigma_sq, std::size_t n, std::uint64_t seed,
                               double sample_rate_hz = 1e6, bool complex = false) {
  detail::require(sigma_sq >= 0.0, "variance must be >= 0");
  detail::require(n > 0, "sample count must be > 0");
  SampleStream s;
  s.sample_rate_hz = sample_rate_hz;
  s.seed = seed;
  s.real.resize(n);
  const double sd = std::sqrt(sigma_sq);
  GaussianSource src(seed);
  if (!complex) {
    src.fill(s.real, sd);
    return s;
  }
  s.imag.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.real[i] = sd * src.next();
    s.imag[i] = sd * src.next();
  }
  return s;
}

inline double mean_square(std::span<const double> xs) {
  detail::require(!xs.empty(), "mean square of an empty stream");
  double acc = 0.0;
  for (double x : xs) acc += x * x;
  return acc / static_cast<double>(xs.size());
}

/// Mean square of the real component.
inline double mean_square(const SampleStream& stream) { return mean_square(stream.real); }

inline double gaussian_pdf(double x, double sigma_sq) {
  detail::require(sigma_sq > 0.0, "Gaussian variance must be > 0");
  return std::exp(-0.5 * x * x / sigma_sq) / std::sqrt(2.0 * std::numbers::pi * sigma_sq);
}

}  // namespace mjn
