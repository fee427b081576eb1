#pragma once

#include <cmath>

#include "mjn/errors.hpp"
#include "mjn/stats.hpp"

// Closed-form bit error rate of the integrate-and-dump receiver under a
// Gaussian approximation of the soft intensity. Deliberately independent of
// the modem code path so the two can check each other.
//
// For a real zero-mean Gaussian sample of variance v, p = s^2 has mean v and
// variance 2 v^2; for complex samples |z|^2 has mean 2v and variance 4v^2.
namespace mjn::oracle {

struct IntensityMoments {
  double mean0 = 0.0;
  double var0 = 0.0;
  double mean1 = 0.0;
  double var1 = 0.0;
};

/// Moments of the integrated intensity for a bit with n_pos samples in the
/// positive subcarrier half and n_neg in the negative half.
inline IntensityMoments intensity_moments(double n_pos, double n_neg, double sigma_on,
                                          double sigma_off, bool complex_power = false) {
  detail::require(n_pos > 0.0 && n_neg > 0.0, "bit must span both subcarrier halves");
  const double m = complex_power ? 2.0 : 1.0;
  const double v = complex_power ? 4.0 : 2.0;
  IntensityMoments r;
  r.mean0 = (n_pos - n_neg) * m * sigma_off;
  r.var0 = (n_pos + n_neg) * v * sigma_off * sigma_off;
  r.mean1 = n_pos * m * sigma_on - n_neg * m * sigma_off;
  r.var1 = n_pos * v * sigma_on * sigma_on + n_neg * v * sigma_off * sigma_off;
  return r;
}

/// Balanced bit of N samples: N/2 in each half.
inline IntensityMoments intensity_moments(double samples_per_bit, double sigma_on,
                                          double sigma_off) {
  return intensity_moments(0.5 * samples_per_bit, 0.5 * samples_per_bit, sigma_on, sigma_off);
}

inline double midpoint_threshold(const IntensityMoments& m) { return 0.5 * (m.mean0 + m.mean1); }

/// Equiprobable-bit error rate for decision "1 iff intensity > threshold".
inline double ber(const IntensityMoments& m, double threshold) {
  const double p0 = m.var0 > 0.0 ? stats::q_function((threshold - m.mean0) / std::sqrt(m.var0))
                                 : (threshold < m.mean0 ? 1.0 : 0.0);
  const double p1 = m.var1 > 0.0 ? stats::q_function((m.mean1 - threshold) / std::sqrt(m.var1))
                                 : (m.mean1 <= threshold ? 1.0 : 0.0);
  return 0.5 * (p0 + p1);
}

inline double ber_at_midpoint(const IntensityMoments& m) { return ber(m, midpoint_threshold(m)); }

}  // namespace mjn::oracle
