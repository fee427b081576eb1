#pragma once

#include <cmath>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mjn/errors.hpp"
#include "mjn/text.hpp"

namespace mjn {

struct CalibrationPoint {
  double temp_k = 0.0;
  double measured_msv = 0.0;  // SDR units^2
};

/// measured_msv = slope * T + intercept. The intercept is the receive-chain
/// offset.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;

  double operator()(double temp_k) const { return slope * temp_k + intercept; }
};

// The reference receiver's calibration line (50 ohm loads at 296, 273, 77 K).
inline const LinearFit kReferenceFit{0.000159, 0.0212, {}};

/// Unweighted ordinary least squares.
inline LinearFit fit_line(std::span<const CalibrationPoint> points) {
  if (points.size() < 2) throw DegenerateFitError("linear fit needs at least two points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    detail::require(p.temp_k > 0.0, "calibration temperature must be > 0");
    mx += p.temp_k;
    my += p.measured_msv;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.temp_k - mx) * (p.temp_k - mx);
    sxy += (p.temp_k - mx) * (p.measured_msv - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFitError("calibration temperatures are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.reserve(points.size());
  for (const auto& p : points) fit.residuals.push_back(p.measured_msv - fit(p.temp_k));
  return fit;
}

struct FitUncertainty {
  double slope_sd = 0.0;
  double intercept_sd = 0.0;
};

/// Standard deviations of the OLS slope and intercept when point i carries
/// independent noise of variance point_variances[i].
inline FitUncertainty fit_uncertainty(std::span<const double> temps,
                                      std::span<const double> point_variances) {
  detail::require(temps.size() == point_variances.size() && temps.size() >= 2,
                  "fit_uncertainty needs matching temps/variances");
  const double n = static_cast<double>(temps.size());
  double mx = 0.0;
  for (double t : temps) mx += t;
  mx /= n;
  double sxx = 0.0;
  for (double t : temps) sxx += (t - mx) * (t - mx);
  if (!(sxx > 0.0)) throw DegenerateFitError("calibration temperatures are all equal");
  double vs = 0.0;
  double vi = 0.0;
  for (std::size_t i = 0; i < temps.size(); ++i) {
    const double ws = (temps[i] - mx) / sxx;
    const double wi = 1.0 / n - mx * ws;
    vs += ws * ws * point_variances[i];
    vi += wi * wi * point_variances[i];
  }
  return {std::sqrt(vs), std::sqrt(vi)};
}

/// Variance of the mean square of n real Gaussian samples of variance sigma_sq.
inline double mean_square_estimator_variance(double sigma_sq, double n) {
  return 2.0 * sigma_sq * sigma_sq / n;
}

/// Noise temperature by inverting the calibration line.
inline double extract_noise_temp(double measured_msv, const LinearFit& fit) {
  detail::require(fit.slope != 0.0, "calibration slope is zero");
  return (measured_msv - fit.intercept) / fit.slope;
}

/// G_RX = (measured - offset) / physical mean-square voltage.
inline double receiver_gain(double measured_msv, double offset, double physical_msv) {
  detail::require(physical_msv > 0.0, "physical mean-square voltage must be > 0");
  return (measured_msv - offset) / physical_msv;
}

/// Reads `temp_k,msv_sdr` rows. A header row, blank lines and `#` comments are
/// skipped.
inline std::vector<CalibrationPoint> read_calibration_csv(std::istream& in) {
  std::vector<CalibrationPoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(text::strip_comment(line));
    if (body.empty()) continue;
    const auto fields = text::split(body, ',');
    if (fields.size() != 2) {
      throw ParseError("calibration CSV line " + std::to_string(line_no) +
                       ": expected 2 columns (temp_k,msv_sdr)");
    }
    if (points.empty() && text::trim(fields[0]) == "temp_k") continue;
    CalibrationPoint p;
    p.temp_k = text::parse_double(fields[0], "temp_k on line " + std::to_string(line_no));
    p.measured_msv = text::parse_double(fields[1], "msv_sdr on line " + std::to_string(line_no));
    points.push_back(p);
  }
  return points;
}

inline nlohmann::json to_json(const LinearFit& fit) {
  return nlohmann::json{{"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"residuals", fit.residuals}};
}

}  // namespace mjn
