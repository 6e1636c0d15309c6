#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lamp/event_sequence.hpp"
#include "lamp/kernel.hpp"
#include "lamp/rng.hpp"

namespace lamp {

// Simulation request. An absent kernel (or amplitude 0) means a plain
// Poisson path; `amplitude` multiplies the kernel, so theta_T = u/sqrt(T)
// alternatives are expressed as amplitude = u/sqrt(T).
struct SimSpec {
  double s_star = 1.0;
  std::optional<Kernel> kernel;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
};

namespace detail {

// Strict ordering under fp collision: a candidate landing on (or before)
// the previous event is nudged one ulp past it.
inline double nudge_after(const std::vector<double>& ev, double t) {
  if (!ev.empty() && t <= ev.back())
    return std::nextafter(ev.back(), std::numeric_limits<double>::infinity());
  return t;
}

inline void check_rate_horizon(double rate, double horizon, const char* who) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument(std::string(who) + ": intensity must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument(std::string(who) + ": horizon must be > 0");
}

}  // namespace detail

inline EventSequence simulate_poisson(double s, double horizon, Rng& rng) {
  detail::check_rate_horizon(s, horizon, "simulate_poisson");
  std::vector<double> ev;
  ev.reserve(static_cast<std::size_t>(s * horizon * 1.25) + 8);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(s);
    if (t > horizon) break;
    t = detail::nudge_after(ev, t);
    if (t > horizon) break;
    ev.push_back(t);
  }
  return EventSequence{std::move(ev), horizon};
}

inline EventSequence simulate_poisson(double s, double horizon, std::uint64_t seed) {
  Rng rng = Rng::split(seed, 0);
  return simulate_poisson(s, horizon, rng);
}

namespace detail {

// Ogata thinning, exponential kernel: one decayed accumulator gives O(1)
// intensity updates. `excite` tracks a*alpha*sum_i exp(-gamma (t - t_i));
// between events the intensity only decays, so the value right after the
// last move is a valid dominating rate.
inline EventSequence hawkes_thin_exponential(const SimSpec& spec,
                                             const ExponentialKernel& k,
                                             Rng& rng) {
  const double jump = spec.amplitude * k.alpha;
  std::vector<double> ev;
  ev.reserve(static_cast<std::size_t>(spec.s_star * spec.horizon * 1.5) + 8);
  double t = 0.0;
  double excite = 0.0;
  for (;;) {
    const double bound = spec.s_star + excite;
    const double step = rng.exponential(bound);
    t += step;
    if (t > spec.horizon) break;
    excite *= std::exp(-k.gamma * step);
    const double lam = spec.s_star + excite;
    if (lam >= bound || rng.uniform01() * bound < lam) {
      const double te = nudge_after(ev, t);
      if (te > spec.horizon) break;
      ev.push_back(te);
      excite += jump;
    }
  }
  return EventSequence{std::move(ev), spec.horizon};
}

// Boxcar kernel: intensity is s_star + rate * (events inside the trailing
// window), maintained with a two-pointer scan.
inline EventSequence hawkes_thin_boxcar(const SimSpec& spec, const BoxcarKernel& k,
                                        Rng& rng) {
  const double rate = spec.amplitude * k.mass / k.width;
  std::vector<double> ev;
  ev.reserve(static_cast<std::size_t>(spec.s_star * spec.horizon * 1.5) + 8);
  double t = 0.0;
  std::size_t lo = 0;
  for (;;) {
    while (lo < ev.size() && t - ev[lo] > k.width) ++lo;
    const double bound =
        spec.s_star + rate * static_cast<double>(ev.size() - lo);
    const double step = rng.exponential(bound);
    t += step;
    if (t > spec.horizon) break;
    while (lo < ev.size() && t - ev[lo] > k.width) ++lo;
    const double lam = spec.s_star + rate * static_cast<double>(ev.size() - lo);
    if (lam >= bound || rng.uniform01() * bound < lam) {
      const double te = nudge_after(ev, t);
      if (te > spec.horizon) break;
      ev.push_back(te);
    }
  }
  return EventSequence{std::move(ev), spec.horizon};
}

// General bounded-support kernel: the dominating rate sums the nonincreasing
// envelope over the trailing window, so nonmonotone tabulated kernels are
// still thinned correctly.
inline EventSequence hawkes_thin_generic(const SimSpec& spec, const Kernel& k,
                                         Rng& rng) {
  const double support = k.support_bound();
  const double a = spec.amplitude;
  std::vector<double> ev;
  std::size_t lo = 0;
  auto advance = [&](double at) {
    while (lo < ev.size() && at - ev[lo] > support) ++lo;
  };
  double t = 0.0;
  for (;;) {
    advance(t);
    double bound = spec.s_star;
    for (std::size_t i = lo; i < ev.size(); ++i) bound += a * k.envelope(t - ev[i]);
    const double step = rng.exponential(bound);
    t += step;
    if (t > spec.horizon) break;
    advance(t);
    double lam = spec.s_star;
    for (std::size_t i = lo; i < ev.size(); ++i) lam += a * k.eval(t - ev[i]);
    if (lam >= bound || rng.uniform01() * bound < lam) {
      const double te = nudge_after(ev, t);
      if (te > spec.horizon) break;
      ev.push_back(te);
    }
  }
  return EventSequence{std::move(ev), spec.horizon};
}

inline void check_hawkes_spec(const SimSpec& spec) {
  check_rate_horizon(spec.s_star, spec.horizon, "simulate_hawkes");
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude))
    throw std::invalid_argument("simulate_hawkes: amplitude must be >= 0");
  if (spec.kernel && spec.amplitude > 0.0) {
    const double rho_eff = spec.amplitude * spec.kernel->l1_norm();
    if (!(rho_eff < 1.0))
      throw std::invalid_argument(
          "simulate_hawkes: unstable effective kernel, amplitude * l1_norm >= 1");
  }
}

}  // namespace detail

// Self-exciting path on (0, horizon] by Ogata thinning. History starts empty
// at t = 0. With amplitude 0 (or no kernel) this consumes exactly the draws
// of simulate_poisson, so H0 and u=0 runs share event sequences stream for
// stream.
inline EventSequence simulate_hawkes(const SimSpec& spec, Rng& rng) {
  detail::check_hawkes_spec(spec);
  if (!spec.kernel || spec.amplitude == 0.0)
    return simulate_poisson(spec.s_star, spec.horizon, rng);
  if (const auto* e = spec.kernel->as_exponential())
    return detail::hawkes_thin_exponential(spec, *e, rng);
  if (const auto* b = spec.kernel->as_boxcar())
    return detail::hawkes_thin_boxcar(spec, *b, rng);
  return detail::hawkes_thin_generic(spec, *spec.kernel, rng);
}

inline EventSequence simulate_hawkes(const SimSpec& spec) {
  Rng rng = Rng::split(spec.seed, 0);
  return simulate_hawkes(spec, rng);
}

// Second route for the exponential kernel: inter-event waits drawn by
// inverting the closed-form compensator
//   s_star*tau + (C/gamma)(1 - e^{-gamma tau}) = Exp(1),
// Newton from below (the map is concave increasing). Used to cross-check the
// thinning sampler in distribution.
inline EventSequence simulate_hawkes_inverse(const SimSpec& spec, Rng& rng) {
  detail::check_hawkes_spec(spec);
  if (!spec.kernel || !spec.kernel->as_exponential())
    throw std::invalid_argument(
        "simulate_hawkes_inverse: exponential kernels only");
  const auto& k = *spec.kernel->as_exponential();
  const double jump = spec.amplitude * k.alpha;
  std::vector<double> ev;
  double t = 0.0;
  double excite = 0.0;  // C = sum of jump * exp(-gamma (t - t_i))
  for (;;) {
    const double xi = rng.exponential(1.0);
    double tau;
    if (excite <= 0.0) {
      tau = xi / spec.s_star;
    } else {
      tau = xi / (spec.s_star + excite);
      for (int it = 0; it < 100; ++it) {
        const double em = std::exp(-k.gamma * tau);
        const double m =
            spec.s_star * tau - (excite / k.gamma) * std::expm1(-k.gamma * tau) - xi;
        const double d = spec.s_star + excite * em;
        const double step = m / d;
        tau -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(tau))) break;
      }
    }
    t += tau;
    if (t > spec.horizon) break;
    excite = excite * std::exp(-k.gamma * tau) + jump;
    const double te = detail::nudge_after(ev, t);
    if (te > spec.horizon) break;
    ev.push_back(te);
  }
  return EventSequence{std::move(ev), spec.horizon};
}

inline EventSequence simulate_hawkes_inverse(const SimSpec& spec) {
  Rng rng = Rng::split(spec.seed, 0);
  return simulate_hawkes_inverse(spec, rng);
}

// (X, Y): X homogeneous Poisson(s_x); Y has intensity
// s_y + amplitude * sum_{t_i < t} h(t - t_i) driven by X's events, history
// from 0. Y is thinned segment by segment between X's events (the bound can
// only jump up at an X event).
inline std::pair<EventSequence, EventSequence> simulate_pair(
    double s_x, double s_y, const Kernel& kernel, double amplitude,
    double horizon, Rng& rng) {
  detail::check_rate_horizon(s_x, horizon, "simulate_pair");
  if (!(s_y > 0.0) || !std::isfinite(s_y))
    throw std::invalid_argument("simulate_pair: intensity must be > 0");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("simulate_pair: amplitude must be >= 0");

  EventSequence x = simulate_poisson(s_x, horizon, rng);
  const auto* ek = kernel.as_exponential();
  const double support = kernel.support_bound();

  std::vector<double> ys;
  double t = 0.0;
  std::size_t nx = 0;   // x events at or before t
  std::size_t lo = 0;   // first x event still inside the support window
  double excite = 0.0;  // exponential fast path accumulator
  for (;;) {
    const double segend = nx < x.times.size() ? x.times[nx] : horizon;
    double bound = s_y;
    if (ek) {
      bound += amplitude * ek->alpha * excite;
    } else {
      while (lo < nx && t - x.times[lo] > support) ++lo;
      for (std::size_t i = lo; i < nx; ++i)
        bound += amplitude * kernel.envelope(t - x.times[i]);
    }
    const double step = rng.exponential(bound);
    if (t + step >= segend) {
      if (ek) excite = excite * std::exp(-ek->gamma * (segend - t)) +
                       (nx < x.times.size() ? 1.0 : 0.0);
      t = segend;
      if (nx < x.times.size()) {
        ++nx;
        continue;
      }
      break;
    }
    if (ek) excite *= std::exp(-ek->gamma * step);
    t += step;
    double lam = s_y;
    if (ek) {
      lam += amplitude * ek->alpha * excite;
    } else {
      while (lo < nx && t - x.times[lo] > support) ++lo;
      for (std::size_t i = lo; i < nx; ++i)
        lam += amplitude * kernel.eval(t - x.times[i]);
    }
    if (lam >= bound || rng.uniform01() * bound < lam) {
      const double te = detail::nudge_after(ys, t);
      if (te <= horizon) ys.push_back(te);
    }
  }
  return {std::move(x), EventSequence{std::move(ys), horizon}};
}

inline std::pair<EventSequence, EventSequence> simulate_pair(
    double s_x, double s_y, const Kernel& kernel, double amplitude,
    double horizon, std::uint64_t seed) {
  Rng rng = Rng::split(seed, 0);
  return simulate_pair(s_x, s_y, kernel, amplitude, horizon, rng);
}

// Conditional intensity s_star + amplitude * sum_{t_i < t} h(t - t_i);
// strictly left limits, so an event exactly at t does not count.
inline double intensity_at(const EventSequence& seq, double s_star,
                           const Kernel& kernel, double amplitude, double t) {
  if (!(t >= 0.0) || !(t <= seq.horizon))
    throw std::invalid_argument("intensity_at: t outside [0, horizon]");
  const std::size_t end = seq.count_before(t);
  std::size_t begin = 0;
  const double support = kernel.support_bound();
  if (std::isfinite(support)) {
    begin = static_cast<std::size_t>(
        std::lower_bound(seq.times.begin(), seq.times.begin() + end, t - support) -
        seq.times.begin());
  }
  double lam = s_star;
  for (std::size_t i = begin; i < end; ++i)
    lam += amplitude * kernel.eval(t - seq.times[i]);
  return lam;
}

}  // namespace lamp
