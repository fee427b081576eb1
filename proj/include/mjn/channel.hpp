#pragma once

#include <cmath>
#include <numbers>

#include "mjn/errors.hpp"

namespace mjn {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Free-space link between the transmitter's switched load and the receive
/// antenna.
struct LinkBudget {
  double distance_m = 1.5;
  double tx_gain_dbi = 13.6;
  double rx_gain_dbi = 13.6;
  double frequency_hz = 1.42e9;

  double wavelength_m() const { return kSpeedOfLight / frequency_hz; }

  void validate() const {
    detail::require(distance_m > 0.0, "link distance must be > 0");
    detail::require(frequency_hz > 0.0, "link frequency must be > 0");
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Friis power ratio Gt * Gr * (lambda / (4 pi d))^2.
inline double path_factor(const LinkBudget& link) {
  link.validate();
  const double r = link.wavelength_m() / (4.0 * std::numbers::pi * link.distance_m);
  return db_to_linear(link.tx_gain_dbi) * db_to_linear(link.rx_gain_dbi) * r * r;
}

/// Receive-side variance contrast. The receiver floor is added downstream.
inline double received_contrast(double tx_contrast, const LinkBudget& link) {
  detail::require(tx_contrast >= 0.0, "transmit contrast must be >= 0");
  return tx_contrast * path_factor(link);
}

}  // namespace mjn
