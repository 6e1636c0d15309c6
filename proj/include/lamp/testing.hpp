#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lamp/statistics.hpp"

namespace lamp {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Phi via erfc keeps full relative accuracy in both tails.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_sf(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace detail {

// Acklam's rational approximation to the standard normal quantile,
// |relative error| < 1.15e-9; refined below.
inline double norm_quantile_approx(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

// z with Phi(z) = 1 - eps. Rational start plus two Newton steps against the
// erfc-based upper tail; absolute error well under 1e-9.
inline double gaussian_quantile(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("gaussian_quantile: eps must lie in (0,1)");
  double z = -detail::norm_quantile_approx(eps);
  for (int i = 0; i < 2; ++i) {
    const double err = normal_sf(z) - eps;
    z += err / normal_pdf(z);
  }
  return z;
}

struct TestOutcome {
  StatisticValue statistic;
  double threshold = 0.0;
  bool reject = false;
  double nominal_size = 0.0;
};

// Strict rejection rule: reject iff value > threshold.
inline TestOutcome decide(const StatisticValue& stat, double threshold,
                          double nominal_size) {
  if (!(nominal_size > 0.0) || !(nominal_size < 1.0))
    throw std::invalid_argument("decide: nominal size must lie in (0,1)");
  return {stat, threshold, stat.value > threshold, nominal_size};
}

// beta(u) = P{zeta > z_eps - u sqrt(info)}
inline double limiting_power_param(double u, double info, double eps) {
  if (!(u >= 0.0) || !(info >= 0.0))
    throw std::invalid_argument("limiting_power_param: need u >= 0, info >= 0");
  return normal_sf(gaussian_quantile(eps) - u * std::sqrt(info));
}

inline double limiting_power_dep(double u, double info_dep, double eps) {
  return limiting_power_param(u, info_dep, eps);
}

// beta(r) = P{zeta > z_eps - r sqrt(s*)}
inline double limiting_power_nonparam(double r, double s_star, double eps) {
  if (!(r >= 0.0)) throw std::invalid_argument("limiting_power_nonparam: r >= 0");
  detail::check_s_star(s_star, "limiting_power_nonparam");
  return normal_sf(gaussian_quantile(eps) - r * std::sqrt(s_star));
}

// Neyman-Pearson envelope at the least favorable boxcar alternative:
// P{zeta > z_eps - r sqrt(s* + 1/N)}.
inline double least_favorable_power_bound(double r, double n_support,
                                          double s_star, double eps) {
  if (!(r >= 0.0) || !(n_support > 0.0))
    throw std::invalid_argument(
        "least_favorable_power_bound: need r >= 0 and N > 0");
  detail::check_s_star(s_star, "least_favorable_power_bound");
  return normal_sf(gaussian_quantile(eps) - r * std::sqrt(s_star + 1.0 / n_support));
}

// P(X > k) for X ~ Poisson(mean); sums the smaller tail with the pmf
// recurrence, starting from an lgamma-anchored term. Stable for means
// well past 1e7.
inline double poisson_tail_gt(double mean, long long k) {
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("poisson_tail_gt: mean must be > 0");
  if (k < 0) return 1.0;
  const auto log_pmf = [&](long long j) {
    const double dj = static_cast<double>(j);
    return -mean + dj * std::log(mean) - std::lgamma(dj + 1.0);
  };
  if (static_cast<double>(k) < mean) {
    // lower sum downward from k; terms shrink fast below the mode
    long double term = std::exp(log_pmf(k));
    long double acc = 0.0L;
    for (long long j = k; j >= 0 && term > 0.0L; --j) {
      acc += term;
      if (term < acc * 1e-19L) break;
      term *= static_cast<long double>(j) / mean;
    }
    const double lower = static_cast<double>(acc);
    return lower >= 1.0 ? 0.0 : 1.0 - lower;
  }
  long double term = std::exp(log_pmf(k + 1));
  long double acc = 0.0L;
  for (long long j = k + 1; term > 0.0L; ++j) {
    acc += term;
    term *= mean / static_cast<double>(j + 1);
    if (static_cast<double>(j) > mean && term < acc * 1e-19L) break;
  }
  return static_cast<double>(acc);
}

// Smallest integer k >= 0 with P(Poisson(s* T) > k) <= eps; the exact
// (conservative) count threshold for the nonparametric test.
inline long long exact_nonparam_threshold(double s_star, double horizon,
                                          double eps) {
  const double mean = s_star * horizon;
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("exact_nonparam_threshold: s_star * T must be > 0");
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("exact_nonparam_threshold: eps must lie in (0,1)");
  if (poisson_tail_gt(mean, 0) <= eps) return 0;
  long long lo = 0;  // tail(lo) > eps
  long long hi = static_cast<long long>(mean) + 1;
  while (poisson_tail_gt(mean, hi) > eps) {
    lo = hi;
    hi = 2 * hi + 16;
  }
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    if (poisson_tail_gt(mean, mid) > eps)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace lamp
