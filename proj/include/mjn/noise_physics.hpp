#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "mjn/errors.hpp"

// First-principles Johnson noise: open-circuit mean-square voltage, available
// power, and the resistive divider formed by a noisy source and the LNA input.
//
// Only the resistive part of an impedance enters the model. The reactive part
// is carried in LoadProfile for bookkeeping and otherwise ignored.
namespace mjn {

struct PhysicalConstants {
  static constexpr double boltzmann_k = 1.380649e-23;  // J/K, exact (SI 2019)
};

inline constexpr double kLnaInputOhms = 50.0;

struct LoadProfile {
  std::string name;
  double impedance_re = 50.0;  // ohms
  double impedance_im = 0.0;   // ohms, unused by the divider model
  double physical_temp = 296.0;  // kelvin
  // Variance observed for this load on the reference receiver, SDR units^2.
  std::optional<double> measured_msv;

  void validate() const {
    detail::require(impedance_re >= 0.0, "load '" + name + "': Re(Z) must be >= 0");
    detail::require(physical_temp >= 0.0, "load '" + name + "': temperature must be >= 0");
    if (measured_msv) {
      detail::require(*measured_msv >= 0.0, "load '" + name + "': measured_msv must be >= 0");
    }
  }
};

struct DividerModel {
  double source_r = 50.0;  // R1, the noisy source
  double shunt_r = kLnaInputOhms;  // R2, the LNA input
};

/// Open-circuit Johnson noise 4 k T B Re(Z), volts^2.
inline double johnson_msv(const LoadProfile& load, double bandwidth_hz) {
  detail::require(bandwidth_hz > 0.0, "bandwidth must be > 0");
  load.validate();
  return 4.0 * PhysicalConstants::boltzmann_k * load.physical_temp * bandwidth_hz *
         load.impedance_re;
}

/// Available noise power k T B into a matched load, watts.
inline double available_noise_power(double temp_k, double bandwidth_hz) {
  detail::require(temp_k >= 0.0, "temperature must be >= 0");
  detail::require(bandwidth_hz > 0.0, "bandwidth must be > 0");
  return PhysicalConstants::boltzmann_k * temp_k * bandwidth_hz;
}

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

inline double available_noise_power_dbm(double temp_k, double bandwidth_hz) {
  return watts_to_dbm(available_noise_power(temp_k, bandwidth_hz));
}

/// Voltage divider gain R2 / (R1 + R2).
inline double divider_gain(const DividerModel& model) {
  detail::require(model.source_r >= 0.0 && model.shunt_r >= 0.0, "divider resistances must be >= 0");
  const double denom = model.source_r + model.shunt_r;
  detail::require(denom > 0.0 && std::isfinite(denom), "divider R1 + R2 must be > 0");
  return model.shunt_r / denom;
}

/// Mean-square voltage at the amplifier input: 4 k T B R1 g^2, volts^2.
inline double observed_msv(const LoadProfile& load, double bandwidth_hz,
                           double shunt_r = kLnaInputOhms) {
  const double g = divider_gain({load.impedance_re, shunt_r});
  return johnson_msv(load, bandwidth_hz) * g * g;
}

/// observed_msv expressed as a multiple of k T B (units of ohms). Matched
/// loads give exactly shunt_r.
inline double observed_msv_ktb_multiple(const LoadProfile& load, double bandwidth_hz,
                                        double shunt_r = kLnaInputOhms) {
  detail::require(load.physical_temp > 0.0, "kTB multiple undefined at T = 0");
  return observed_msv(load, bandwidth_hz, shunt_r) /
         available_noise_power(load.physical_temp, bandwidth_hz);
}

// Measured terminations at 1.42 GHz. The open and short resistances come from
// a Smith chart reading; the measured variances are the reference receiver's
// SDR-unit mean squares (the 273 K value lies on the calibration line and was
// not measured directly).
inline constexpr double kOpenOhms = 17000.0;
inline constexpr double kShortOhms = 0.254;
inline constexpr double kMatchedOhms = 50.0;
inline constexpr double kLnaNoiseTemp = 39.5;

inline const std::array<std::string_view, 10>& load_preset_names() {
  static const std::array<std::string_view, 10> names = {
      "matched_296", "matched_273", "matched_77", "open_296",  "open_273",
      "open_77",     "short_296",   "short_273",  "short_77",  "lna_input"};
  return names;
}

/// Built-in load presets; nullopt for an unknown name.
inline std::optional<LoadProfile> load_preset(std::string_view name) {
  auto make = [&](double r, double t, std::optional<double> msv) {
    return LoadProfile{std::string(name), r, 0.0, t, msv};
  };
  if (name == "matched_296") return make(kMatchedOhms, 296.0, 0.0676);
  if (name == "matched_273") return make(kMatchedOhms, 273.0, 0.000159 * 273.0 + 0.0212);
  if (name == "matched_77") return make(kMatchedOhms, 77.0, 0.0333);
  if (name == "open_296") return make(kOpenOhms, 296.0, 0.0274);
  if (name == "open_273") return make(kOpenOhms, 273.0, std::nullopt);
  if (name == "open_77") return make(kOpenOhms, 77.0, std::nullopt);
  if (name == "short_296") return make(kShortOhms, 296.0, 0.0283);
  if (name == "short_273") return make(kShortOhms, 273.0, std::nullopt);
  if (name == "short_77") return make(kShortOhms, 77.0, std::nullopt);
  // A powered LNA input behaves as a matched load at its noise temperature.
  if (name == "lna_input") return make(kMatchedOhms, kLnaNoiseTemp, 0.0273);
  return std::nullopt;
}

}  // namespace mjn
