#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lamp/rng.hpp"
#include "lamp/testing.hpp"
#include "support.hpp"

using namespace lamp;

namespace {

// bisection inverse of the erfc-based normal CDF; independent oracle
double quantile_bisect(double eps) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_sf(mid) > eps)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gaussian quantile values") {
  CHECK(std::abs(gaussian_quantile(0.5)) < 1e-12);
  CHECK(gaussian_quantile(0.05) == Catch::Approx(1.6449).margin(1e-4));
  CHECK(gaussian_quantile(0.025) == Catch::Approx(1.9600).margin(1e-4));
  CHECK(gaussian_quantile(0.05) ==
        Catch::Approx(quantile_bisect(0.05)).margin(1e-9));
  CHECK(gaussian_quantile(0.025) ==
        Catch::Approx(quantile_bisect(0.025)).margin(1e-9));
  CHECK(gaussian_quantile(1e-6) ==
        Catch::Approx(quantile_bisect(1e-6)).margin(1e-9));
  CHECK(gaussian_quantile(0.95) == Catch::Approx(-gaussian_quantile(0.05)).margin(1e-12));
  CHECK_THROWS_AS(gaussian_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_quantile(-0.1), std::invalid_argument);
}

TEST_CASE("quantile and cdf are mutual inverses") {
  for (double eps : {1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5}) {
    const double z = gaussian_quantile(eps);
    CHECK(std::abs(normal_cdf(z) - (1.0 - eps)) < 1e-12);
    CHECK(std::abs(normal_sf(z) - eps) < 1e-12);
  }
}

TEST_CASE("decide uses a strict rejection rule") {
  StatisticValue s{2.0, StatFamily::ParamDelta, 0};
  CHECK(decide(s, 1.6449, 0.05).reject);
  s.value = 1.6449;
  CHECK_FALSE(decide(s, 1.6449, 0.05).reject);  // boundary accepts
  s.value = -1.0;
  CHECK_FALSE(decide(s, 1.6449, 0.05).reject);
  CHECK(decide(s, 1.6449, 0.05).nominal_size == 0.05);
  CHECK(decide(s, 1.6449, 0.05).threshold == 1.6449);
  CHECK_THROWS_AS(decide(s, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("limiting power functions hit the oracle values") {
  CHECK(limiting_power_param(0.0, 1.25, 0.05) == Catch::Approx(0.05).margin(1e-12));
  CHECK(limiting_power_param(2.0, 1.25, 0.05) ==
        Catch::Approx(0.7228).margin(2e-4));
  CHECK(limiting_power_param(50.0, 1.25, 0.05) == Catch::Approx(1.0).margin(1e-12));

  CHECK(limiting_power_dep(0.0, 4.4, 0.05) == Catch::Approx(0.05).margin(1e-12));
  CHECK(limiting_power_dep(1.0, 4.4, 0.05) == Catch::Approx(0.6746).margin(2e-4));

  CHECK(limiting_power_nonparam(0.0, 1.0, 0.05) ==
        Catch::Approx(0.05).margin(1e-12));
  CHECK(limiting_power_nonparam(gaussian_quantile(0.05), 1.0, 0.05) ==
        Catch::Approx(0.5).margin(1e-12));
  CHECK(limiting_power_nonparam(3.0, 1.0, 0.05) ==
        Catch::Approx(0.9123).margin(2e-4));

  CHECK(least_favorable_power_bound(0.0, 5.0, 1.0, 0.05) ==
        Catch::Approx(0.05).margin(1e-12));
  CHECK(least_favorable_power_bound(2.0, 5.0, 1.0, 0.05) ==
        Catch::Approx(0.7074).margin(2e-4));
  CHECK(least_favorable_power_bound(1.7, 1e12, 1.0, 0.05) ==
        Catch::Approx(limiting_power_nonparam(1.7, 1.0, 0.05)).margin(1e-9));

  CHECK_THROWS_AS(limiting_power_param(-1.0, 1.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(least_favorable_power_bound(1.0, 0.0, 1.0, 0.05),
                  std::invalid_argument);
}

TEST_CASE("limiting power is monotone and equals eps at zero") {
  for (double eps : {0.01, 0.05, 0.2}) {
    double prev = 0.0;
    for (double u = 0.0; u <= 4.0; u += 0.25) {
      const double b = limiting_power_param(u, 1.25, eps);
      CHECK(b >= prev);
      prev = b;
    }
    CHECK(limiting_power_param(0.0, 1.25, eps) == Catch::Approx(eps).margin(1e-12));
    // monotone in the information too
    CHECK(limiting_power_param(1.0, 0.5, eps) <=
          limiting_power_param(1.0, 2.0, eps));
  }
}

TEST_CASE("minimax envelope: boxcar information is the least favorable") {
  // power at inf I over U_{r,N} never exceeds the power at any member's I
  const double r = 1.4, n = 6.0, s = 1.2, eps = 0.05;
  const double inf_info = s * r * r + r * r / n;
  Rng rng = Rng::split(31, 0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> knots{0.0};
    for (int i = 0; i < 3; ++i)
      knots.push_back(knots.back() + 0.3 + 1.5 * rng.uniform01());
    auto k = Kernel::tabulated(
        knots, {0.2 + rng.uniform01(), 0.1 + rng.uniform01(), 0.3 + rng.uniform01()});
    if (k.support_bound() > n) continue;
    k = k.scaled(r / k.l1_norm());
    const double member_info = fisher_info_star(k, s);
    for (double u : {0.5, 1.0, 2.0})
      CHECK(limiting_power_param(u, inf_info, eps) <=
            limiting_power_param(u, member_info, eps) + 1e-12);
  }
}

TEST_CASE("poisson tail matches brute-force summation") {
  for (double mean : {10.0, 100.0, 1000.0}) {
    for (long long k :
         {0LL, static_cast<long long>(mean) - 5, static_cast<long long>(mean),
          static_cast<long long>(mean + 3 * std::sqrt(mean))}) {
      if (k < 0) continue;
      CHECK(poisson_tail_gt(mean, k) ==
            Catch::Approx(oracle::poisson_tail_gt_brute(mean, k)).epsilon(1e-10));
    }
  }
  CHECK(poisson_tail_gt(5.0, -1) == 1.0);
}

TEST_CASE("exact nonparametric threshold: anchor value and minimality") {
  CHECK(exact_nonparam_threshold(1.0, 100.0, 0.05) == 117);
  CHECK(poisson_tail_gt(100.0, 117) <= 0.05);
  CHECK(poisson_tail_gt(100.0, 116) > 0.05);

  for (double mean : {10.0, 100.0, 1000.0}) {
    for (double eps : {0.01, 0.05, 0.1, 0.25}) {
      const long long k = exact_nonparam_threshold(1.0, mean, eps);
      // minimality against the brute-force oracle
      CHECK(oracle::poisson_tail_gt_brute(mean, k) <= eps);
      if (k > 0) CHECK(oracle::poisson_tail_gt_brute(mean, k - 1) > eps);
    }
  }

  // eps large enough that k = 0 already satisfies the tail bound
  const double mean = 0.01;  // P(X > 0) = 1 - e^{-0.01} < 0.05
  CHECK(exact_nonparam_threshold(0.01, 1.0, 0.05) == 0);

  CHECK_THROWS_AS(exact_nonparam_threshold(1.0, 0.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(exact_nonparam_threshold(1.0, 10.0, 0.0), std::invalid_argument);
  (void)mean;
}

TEST_CASE("exact threshold stays stable at large means") {
  const long long k = exact_nonparam_threshold(1.0, 1e7, 0.05);
  CHECK(poisson_tail_gt(1e7, k) <= 0.05);
  CHECK(poisson_tail_gt(1e7, k - 1) > 0.05);
  // gaussian approximation sanity: k ~ mean + z sqrt(mean)
  CHECK(std::abs(static_cast<double>(k) - (1e7 + 1.6449 * std::sqrt(1e7))) <
        3.0 * std::sqrt(1e7));
}
