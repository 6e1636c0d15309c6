#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lamp/event_sequence.hpp"
#include "lamp/montecarlo.hpp"
#include "lamp/simulate.hpp"
#include "support.hpp"

using namespace lamp;

namespace {

void check_invariants(const EventSequence& seq) {
  REQUIRE_NOTHROW(validate(seq));
  double prev = 0.0;
  for (double t : seq.times) {
    REQUIRE(t > prev);
    REQUIRE(t <= seq.horizon);
    prev = t;
  }
}

}  // namespace

TEST_CASE("simulate_poisson rejects bad arguments") {
  CHECK_THROWS_AS(simulate_poisson(0.0, 10.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_poisson(-1.0, 10.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_poisson(1.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("simulate_poisson ordering invariant and determinism") {
  for (std::uint64_t seed : {1ull, 2ull, 77ull}) {
    auto a = simulate_poisson(2.0, 50.0, seed);
    check_invariants(a);
    auto b = simulate_poisson(2.0, 50.0, seed);
    REQUIRE(a.times == b.times);
  }
  auto a = simulate_poisson(2.0, 50.0, 1);
  auto b = simulate_poisson(2.0, 50.0, 2);
  CHECK(a.times != b.times);
}

TEST_CASE("poisson counts have the right mean and variance") {
  const long long m = 10000;
  const double horizon = 100.0;
  std::vector<double> counts;
  run_replicates(m, 5, [&](long long, Rng& rng) {
    return static_cast<double>(simulate_poisson(1.0, horizon, rng).size());
  }, counts);
  const double mean = oracle::mean(counts);
  const double var = oracle::variance(counts);
  CHECK(std::abs(mean - horizon) < 0.4);              // 4 sigma of the MC mean
  CHECK(var / horizon == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("nonparametric CLT: (X_T - T)/sqrt(T) close to standard normal") {
  const long long m = 10000;
  const double horizon = 1000.0;
  std::vector<double> vals;
  run_replicates(m, 6, [&](long long, Rng& rng) {
    auto seq = simulate_poisson(1.0, horizon, rng);
    return (static_cast<double>(seq.size()) - horizon) / std::sqrt(horizon);
  }, vals);
  CHECK(std::abs(oracle::mean(vals)) < 0.05);
  CHECK(oracle::variance(vals) > 0.93);
  CHECK(oracle::variance(vals) < 1.07);
}

TEST_CASE("hawkes with zero amplitude reproduces the poisson path draw for draw") {
  Rng r1 = Rng::split(9, 3);
  Rng r2 = Rng::split(9, 3);
  auto p = simulate_poisson(1.5, 80.0, r1);
  SimSpec spec{1.5, Kernel::exponential(0.5, 0.5), 0.0, 0, 80.0};
  auto h = simulate_hawkes(spec, r2);
  REQUIRE(p.times == h.times);

  // absent kernel behaves the same way
  Rng r3 = Rng::split(9, 3);
  SimSpec spec2{1.5, std::nullopt, 0.3, 0, 80.0};
  auto h2 = simulate_hawkes(spec2, r3);
  REQUIRE(p.times == h2.times);
}

TEST_CASE("hawkes rejects an unstable effective kernel") {
  SimSpec spec{1.0, Kernel::exponential(1.0, 1.0), 1.0, 0, 10.0};
  CHECK_THROWS_AS(simulate_hawkes(spec), std::invalid_argument);
  spec.amplitude = 0.999;  // rho_eff just below 1 is accepted
  CHECK_NOTHROW(simulate_hawkes(spec));
  SimSpec neg{1.0, Kernel::exponential(0.5, 0.5), -0.1, 0, 10.0};
  CHECK_THROWS_AS(simulate_hawkes(neg), std::invalid_argument);
}

TEST_CASE("hawkes stationary regime reaches mu = s_star gamma/(gamma-alpha)") {
  // Example-1 kernel alpha=0.5 gamma=1: mu = 2
  const long long m = 400;
  std::vector<double> rates;
  run_replicates(m, 11, [&](long long, Rng& rng) {
    SimSpec spec{1.0, Kernel::exponential(0.5, 1.0), 1.0, 0, 500.0};
    return static_cast<double>(simulate_hawkes(spec, rng).size()) / 500.0;
  }, rates);
  CHECK(oracle::mean(rates) == Catch::Approx(2.0).margin(0.05));
}

TEST_CASE("boxcar alternative at amplitude 1/sqrt(T) lifts the rate as expected") {
  const long long m = 2000;
  const double horizon = 100.0;
  std::vector<double> rates;
  run_replicates(m, 12, [&](long long, Rng& rng) {
    SimSpec spec{1.0, Kernel::boxcar(1.0, 5.0), 1.0 / std::sqrt(horizon), 0,
                 horizon};
    return static_cast<double>(simulate_hawkes(spec, rng).size()) / horizon;
  }, rates);
  const double mean = oracle::mean(rates);
  CHECK(mean > 1.0);
  CHECK(mean < 1.2);
}

TEST_CASE("ordering invariant holds for every simulator and kernel") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    SimSpec a{1.0, Kernel::exponential(0.8, 1.1), 0.6, seed, 60.0};
    check_invariants(simulate_hawkes(a));
    SimSpec b{0.7, Kernel::boxcar(1.2, 3.0), 0.5, seed, 60.0};
    check_invariants(simulate_hawkes(b));
    SimSpec c{1.0, Kernel::tabulated({0.0, 0.4, 1.3}, {0.2, 0.9}), 0.7, seed, 60.0};
    check_invariants(simulate_hawkes(c));
    check_invariants(simulate_hawkes_inverse(a));
    auto [x, y] = simulate_pair(1.0, 0.8, Kernel::boxcar(1.0, 5.0), 0.2, 60.0, seed);
    check_invariants(x);
    check_invariants(y);
  }
}

TEST_CASE("thinning and compensator-inversion samplers agree in distribution") {
  const long long m = 10000;
  SimSpec spec{1.0, Kernel::exponential(0.5, 0.5), 0.8, 0, 50.0};
  std::vector<double> a, b;
  run_replicates(m, 3, [&](long long, Rng& rng) {
    return static_cast<double>(simulate_hawkes(spec, rng).size());
  }, a);
  run_replicates(m, 4, [&](long long, Rng& rng) {
    return static_cast<double>(simulate_hawkes_inverse(spec, rng).size());
  }, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double crit = 1.628 * std::sqrt(2.0 / static_cast<double>(m));  // 1% level
  CHECK(oracle::ks_two_sample(a, b) < crit);
}

TEST_CASE("independent pair: counts are uncorrelated at amplitude 0") {
  const long long m = 10000;
  std::vector<double> xs(m), ys;
  run_replicates(m, 13, [&](long long i, Rng& rng) {
    auto [x, y] = simulate_pair(1.0, 1.0, Kernel::boxcar(1.0, 5.0), 0.0, 50.0, rng);
    xs[static_cast<std::size_t>(i)] = static_cast<double>(x.size());
    return static_cast<double>(y.size());
  }, ys);
  const double mx = oracle::mean(xs), my = oracle::mean(ys);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (long long i = 0; i < m; ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    vx += (xs[i] - mx) * (xs[i] - mx);
    vy += (ys[i] - my) * (ys[i] - my);
  }
  const double corr = cov / std::sqrt(vx * vy);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("driven pair mean matches the closed-form first moment") {
  // E Y_T = s_y T + a s_x r (T - N/2) for the boxcar kernel
  const double horizon = 300.0, u = 2.0;
  const double amp = u / std::sqrt(horizon);
  const long long m = 5000;
  std::vector<double> ys;
  run_replicates(m, 14, [&](long long, Rng& rng) {
    auto [x, y] = simulate_pair(1.0, 1.0, Kernel::boxcar(1.0, 5.0), amp, horizon, rng);
    return static_cast<double>(y.size());
  }, ys);
  const double expect = horizon + amp * 1.0 * 1.0 * (horizon - 2.5);
  const double se = std::sqrt(oracle::variance(ys) / static_cast<double>(m));
  CHECK(oracle::mean(ys) == Catch::Approx(expect).margin(4.0 * se));
}

TEST_CASE("pair simulation rejects bad arguments") {
  auto k = Kernel::boxcar(1.0, 5.0);
  CHECK_THROWS_AS(simulate_pair(1.0, 1.0, k, 0.1, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_pair(0.0, 1.0, k, 0.1, 10.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_pair(1.0, -1.0, k, 0.1, 10.0, 1), std::invalid_argument);
}

TEST_CASE("intensity_at uses the strict left limit") {
  auto seq = make_sequence({1.0, 2.0}, 10.0);
  auto k = Kernel::exponential(0.5, 0.5);
  CHECK(intensity_at(seq, 1.0, k, 1.0, 0.5) == Catch::Approx(1.0));
  CHECK(intensity_at(seq, 1.0, k, 1.0, 3.0) ==
        Catch::Approx(1.0 + 0.5 * std::exp(-1.0) + 0.5 * std::exp(-0.5)));
  // event exactly at t is excluded
  CHECK(intensity_at(seq, 1.0, k, 1.0, 2.0) ==
        Catch::Approx(1.0 + 0.5 * std::exp(-0.5)));
  CHECK(intensity_at(seq, 1.0, k, 1.0, 1.0) == Catch::Approx(1.0));
  CHECK_THROWS_AS(intensity_at(seq, 1.0, k, 1.0, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(intensity_at(seq, 1.0, k, 1.0, 10.5), std::invalid_argument);
}

TEST_CASE("fp collision nudges one ulp up") {
  std::vector<double> ev{1.0, 2.0};
  CHECK(detail::nudge_after(ev, 2.0) ==
        std::nextafter(2.0, std::numeric_limits<double>::infinity()));
  CHECK(detail::nudge_after(ev, 1.5) ==
        std::nextafter(2.0, std::numeric_limits<double>::infinity()));
  CHECK(detail::nudge_after(ev, 3.0) == 3.0);
}

TEST_CASE("event csv round trip is bit exact") {
  const auto dir = std::filesystem::temp_directory_path() / "lamp_test_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "events.csv").string();

  auto seq = simulate_poisson(3.0, 37.5, 21);
  REQUIRE(seq.size() > 50);
  write_events_csv(path, seq);
  const auto back = read_events_csv(path);
  REQUIRE(back.horizon == seq.horizon);
  REQUIRE(back.times == seq.times);  // bit exact

  CHECK_THROWS_AS(read_events_csv((dir / "missing.csv").string()), io_error);
  CHECK_THROWS_AS(write_events_csv((dir / "no_dir" / "x.csv").string(), seq),
                  io_error);

  // malformed content is a validation error
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "t\n1.0\n";
  }
  CHECK_THROWS_AS(read_events_csv((dir / "bad.csv").string()),
                  std::invalid_argument);
  {
    std::ofstream bad(dir / "bad2.csv");
    bad << "# horizon=10\nt\n1.0\nnot_a_number\n";
  }
  CHECK_THROWS_AS(read_events_csv((dir / "bad2.csv").string()),
                  std::invalid_argument);
}

TEST_CASE("sequence validation rejects broken inputs") {
  CHECK_THROWS_AS(make_sequence({1.0, 1.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sequence({2.0, 1.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sequence({0.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sequence({11.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sequence({1.0}, 0.0), std::invalid_argument);
  const auto seq = make_sequence({1.0, 2.0, 3.0}, 5.0);
  CHECK(seq.count_before(2.0) == 1);
  CHECK(seq.count_before(2.5) == 2);
  CHECK(seq.count_before(0.5) == 0);
}
