#pragma once

// Shared oracles for the test suites. Everything here is deliberately
// independent of the library's evaluation paths: plain Simpson quadrature,
// raw Poisson moments, direct tail summation, empirical distribution
// distances.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Composite Simpson with 2*half panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int half = 2000) {
  const int n = 2 * half;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Raw Poisson(lambda) moments up to order 4 and Var(X^2).
inline double poisson_m2(double lam) { return lam + lam * lam; }
inline double poisson_m4(double lam) {
  return lam + 7 * lam * lam + 6 * lam * lam * lam + lam * lam * lam * lam;
}
inline double poisson_var_x2(double lam) {
  const double m2 = poisson_m2(lam);
  return poisson_m4(lam) - m2 * m2;
}

// P(X > k) by direct pmf summation (long double recurrence from pmf(0)).
inline double poisson_tail_gt_brute(double mean, long long k) {
  if (k < 0) return 1.0;
  long double pmf = std::exp(-static_cast<long double>(mean));
  long double cdf = pmf;
  for (long long j = 1; j <= k; ++j) {
    pmf *= mean / static_cast<long double>(j);
    cdf += pmf;
  }
  const double p = static_cast<double>(1.0L - cdf);
  return std::max(0.0, p);
}

// sup_x |F_n(x) - Phi(x)| for a sorted sample against a reference CDF.
inline double ks_distance(const std::vector<double>& sorted,
                          const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

// Two-sample KS distance between sorted samples.
inline double ks_two_sample(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib])
      ++ia;
    else
      ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / a.size() -
                             static_cast<double>(ib) / b.size()));
  }
  return d;
}

inline double mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double median_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace oracle
