#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "mjn/errors.hpp"

// Small statistics toolkit shared by the experiments: tail probabilities,
// binomial confidence intervals, histograms and goodness-of-fit tests.
namespace mjn::stats {

inline constexpr double kZ95 = 1.959963984540054;

/// Gaussian upper tail Q(z) = P(Z > z).
inline double q_function(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double mean(std::span<const double> xs) {
  detail::require(!xs.empty(), "mean of empty sequence");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
  detail::require(xs.size() >= 2, "variance needs at least two values");
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95) {
  detail::require(successes <= trials, "more successes than trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The bounds at p = 0 and p = 1 are exactly 0 and 1; pin them against rounding.
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

/// Kolmogorov distribution tail Q_KS(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.18) return 1.0;  // series has not converged; the tail is 1 to 1e-9 here
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 2.0;
  double prev_term = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = sign * std::exp(a2 * j * j);
    sum += term;
    if (std::abs(term) <= 1e-12 * prev_term || std::abs(term) <= 1e-16 * std::abs(sum)) {
      return std::clamp(sum, 0.0, 1.0);
    }
    sign = -sign;
    prev_term = std::abs(term);
  }
  return 1.0;
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction on the effective size).
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  detail::require(!a.empty() && !b.empty(), "KS test needs two nonempty samples");
  std::vector<double> xs(a.begin(), a.end());
  std::vector<double> ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double x = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == x) ++i;
    while (j < ys.size() && ys[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  const double en = std::sqrt(n1 * n2 / (n1 + n2));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t below = 0;  // samples < lo
  std::uint64_t above = 0;  // samples >= hi

  std::size_t bins() const { return counts.size(); }
  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double center(std::size_t bin) const { return lo + (static_cast<double>(bin) + 0.5) * width(); }
  double edge(std::size_t i) const { return lo + static_cast<double>(i) * width(); }
  std::uint64_t total() const {
    return std::accumulate(counts.begin(), counts.end(), below + above);
  }
};

inline Histogram make_histogram(std::span<const double> xs, std::size_t bins, double lo, double hi) {
  detail::require(bins >= 1, "histogram needs at least one bin");
  detail::require(hi > lo, "histogram range must be nonempty");
  Histogram h{lo, hi, std::vector<std::uint64_t>(bins, 0), 0, 0};
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double x : xs) {
    if (x < lo) {
      ++h.below;
    } else if (x >= hi) {
      ++h.above;
    } else {
      auto bin = static_cast<std::size_t>((x - lo) * scale);
      h.counts[std::min(bin, bins - 1)]++;
    }
  }
  return h;
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t intervals = 64) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / static_cast<double>(intervals);
  double acc = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) {
    acc += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square test of observed counts against expected counts.
/// Adjacent cells are pooled left to right until each expected count is at
/// least `min_expected`; a short remainder is folded into the last cell.
/// `fitted_params` reduces the degrees of freedom.
inline ChiSquareResult chi_square_gof(std::span<const double> observed,
                                      std::span<const double> expected,
                                      double min_expected = 5.0,
                                      std::size_t fitted_params = 0) {
  detail::require(observed.size() == expected.size(), "observed/expected size mismatch");
  std::vector<double> obs;
  std::vector<double> exp;
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  detail::require(exp.size() > fitted_params + 1, "too few cells for a chi-square test");
  ChiSquareResult r;
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const double d = obs[i] - exp[i];
    r.statistic += d * d / exp[i];
  }
  r.dof = exp.size() - 1 - fitted_params;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

}  // namespace mjn::stats
