#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lamp/digest.hpp"
#include "lamp/event_sequence.hpp"
#include "lamp/kernel.hpp"

namespace lamp {

enum class StatFamily { ParamDelta, DepDelta, NonparamDelta, LogLR };

struct StatisticValue {
  double value = 0.0;
  StatFamily family = StatFamily::ParamDelta;
  std::uint64_t inputs_digest = 0;
};

namespace detail {

inline std::uint64_t stat_digest(StatFamily fam, const EventSequence& seq,
                                 const Kernel* k, double s_star, double extra) {
  Digest d;
  d.mix(static_cast<std::uint64_t>(fam));
  d.mix(seq.horizon);
  d.mix(seq.times);
  d.mix(s_star);
  d.mix(extra);
  if (k) k->mix_into(d);
  return d.value();
}

// Visits j = 0..n-1 in order with A_j = sum_{i<j} h(t_j - t_i).
// Exponential kernels use the O(n) decayed accumulator
//   A_j = e^{-gamma dt} (A_{j-1} + alpha);
// bounded-support kernels scan the trailing window.
template <typename F>
inline void scan_excitation(const std::vector<double>& ts, const Kernel& k,
                            F&& visit) {
  const std::size_t n = ts.size();
  if (const auto* e = k.as_exponential()) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) acc = (acc + e->alpha) * std::exp(-e->gamma * (ts[j] - ts[j - 1]));
      visit(j, acc);
    }
    return;
  }
  if (const auto* b = k.as_boxcar()) {
    const double rate = b->width > 0.0 ? b->mass / b->width : 0.0;
    std::size_t lo = 0;
    for (std::size_t j = 0; j < n; ++j) {
      while (lo < j && ts[j] - ts[lo] > b->width) ++lo;
      visit(j, rate * static_cast<double>(j - lo));
    }
    return;
  }
  const double support = k.support_bound();
  std::size_t lo = 0;
  for (std::size_t j = 0; j < n; ++j) {
    while (lo < j && ts[j] - ts[lo] > support) ++lo;
    double a = 0.0;
    for (std::size_t i = lo; i < j; ++i) a += k.eval(ts[j] - ts[i]);
    visit(j, a);
  }
}

// Reference route: direct O(n^2) double scan, no recursions, no windows.
template <typename F>
inline void scan_excitation_pairscan(const std::vector<double>& ts,
                                     const Kernel& k, F&& visit) {
  for (std::size_t j = 0; j < ts.size(); ++j) {
    double a = 0.0;
    for (std::size_t i = 0; i < j; ++i) a += k.eval(ts[j] - ts[i]);
    visit(j, a);
  }
}

// sum_j int_0^{T - t_j} h
inline double tail_integral_sum(const std::vector<double>& ts, double horizon,
                                const Kernel& k) {
  double s = 0.0;
  for (double t : ts) s += k.integral_to(horizon - t);
  return s;
}

inline void check_s_star(double s_star, const char* who) {
  if (!(s_star > 0.0) || !std::isfinite(s_star))
    throw std::invalid_argument(std::string(who) + ": s_star must be > 0");
}

}  // namespace detail

// Delta_T(X^T) in its double-sum form:
//   (1/(s* sqrt(T I*))) sum_j sum_{i<j} h(t_j - t_i)
//     - (1/sqrt(T I*)) sum_j int_0^{T-t_j} h.
inline StatisticValue delta_param(const EventSequence& seq, const Kernel& kernel,
                                  double s_star) {
  detail::check_s_star(s_star, "delta_param");
  const double info = fisher_info_star(kernel, s_star);
  if (!(info > 0.0))
    throw std::invalid_argument(
        "delta_param: zero Fisher information (zero kernel)");
  double s1 = 0.0;
  detail::scan_excitation(seq.times, kernel,
                          [&](std::size_t, double a) { s1 += a; });
  const double s2 = detail::tail_integral_sum(seq.times, seq.horizon, kernel);
  const double root = std::sqrt(seq.horizon * info);
  return {s1 / (s_star * root) - s2 / root, StatFamily::ParamDelta,
          detail::stat_digest(StatFamily::ParamDelta, seq, &kernel, s_star, 0.0)};
}

// Same statistic through the direct pair scan; kept as an independent
// evaluation route for agreement checks.
inline double delta_param_pairscan(const EventSequence& seq, const Kernel& kernel,
                                   double s_star) {
  detail::check_s_star(s_star, "delta_param");
  const double info = fisher_info_star(kernel, s_star);
  if (!(info > 0.0))
    throw std::invalid_argument(
        "delta_param: zero Fisher information (zero kernel)");
  double s1 = 0.0;
  detail::scan_excitation_pairscan(seq.times, kernel,
                                   [&](std::size_t, double a) { s1 += a; });
  const double s2 = detail::tail_integral_sum(seq.times, seq.horizon, kernel);
  const double root = std::sqrt(seq.horizon * info);
  return s1 / (s_star * root) - s2 / root;
}

// Two-sample statistic Delta_T(X^T, Y^T): cross sum over X events strictly
// before each Y event, normalized by I_h from fisher_info_dep.
inline StatisticValue delta_dep(const EventSequence& x, const EventSequence& y,
                                const Kernel& kernel, double s_y, double s_x) {
  if (x.horizon != y.horizon)
    throw std::invalid_argument("delta_dep: sequences must share one horizon");
  const double info = fisher_info_dep(kernel, s_x, s_y);
  if (!(info > 0.0))
    throw std::invalid_argument("delta_dep: zero Fisher information (zero kernel)");

  double s1 = 0.0;
  if (const auto* e = kernel.as_exponential()) {
    double acc = 0.0;  // sum alpha*exp(-gamma (cur - t_i)) over consumed x events
    double cur = 0.0;
    std::size_t ix = 0;
    for (double sj : y.times) {
      while (ix < x.times.size() && x.times[ix] < sj) {
        acc = acc * std::exp(-e->gamma * (x.times[ix] - cur)) + e->alpha;
        cur = x.times[ix];
        ++ix;
      }
      acc *= std::exp(-e->gamma * (sj - cur));
      cur = sj;
      s1 += acc;
    }
  } else {
    const double support = kernel.support_bound();
    std::size_t lo = 0;
    for (double sj : y.times) {
      while (lo < x.times.size() && sj - x.times[lo] > support) ++lo;
      for (std::size_t i = lo; i < x.times.size() && x.times[i] < sj; ++i)
        s1 += kernel.eval(sj - x.times[i]);
    }
  }
  const double s2 = detail::tail_integral_sum(x.times, x.horizon, kernel);
  const double root = std::sqrt(x.horizon * info);

  Digest d;
  d.mix(static_cast<std::uint64_t>(StatFamily::DepDelta));
  d.mix(x.horizon);
  d.mix(x.times);
  d.mix(y.times);
  d.mix(s_x);
  d.mix(s_y);
  kernel.mix_into(d);
  return {s1 / (s_y * root) - s2 / root, StatFamily::DepDelta, d.value()};
}

// delta_T = (X_T - s* T) / sqrt(s* T)
inline StatisticValue delta_nonparam(const EventSequence& seq, double s_star) {
  detail::check_s_star(s_star, "delta_nonparam");
  const double mean = s_star * seq.horizon;
  const double value =
      (static_cast<double>(seq.times.size()) - mean) / std::sqrt(mean);
  return {value, StatFamily::NonparamDelta,
          detail::stat_digest(StatFamily::NonparamDelta, seq, nullptr, s_star, 0.0)};
}

// log L(X^T) = sum_j ln(S(t_j)/s*) - int_0^T (S(t) - s*) dt with the
// compensator in closed form per kernel.
inline double log_likelihood_ratio(const EventSequence& seq, double s_star,
                                   const Kernel& kernel, double amplitude) {
  detail::check_s_star(s_star, "log_likelihood_ratio");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("log_likelihood_ratio: amplitude must be >= 0");
  if (amplitude == 0.0) return 0.0;
  double sum_ln = 0.0;
  bool bad = false;
  detail::scan_excitation(seq.times, kernel, [&](std::size_t, double a) {
    const double ratio = amplitude * a / s_star;
    if (ratio <= -1.0) bad = true;  // unreachable for nonnegative kernels
    sum_ln += std::log1p(ratio);
  });
  if (bad)
    throw std::invalid_argument(
        "log_likelihood_ratio: nonpositive intensity at an event");
  const double compensator =
      amplitude * detail::tail_integral_sum(seq.times, seq.horizon, kernel);
  return sum_ln - compensator;
}

// Exact split of the log likelihood ratio at theta_T = u/sqrt(T):
//   log Z_T(u) = u sqrt(I*) Delta_T - u^2 I*/2 + remainder.
struct LanDecomposition {
  double delta = 0.0;
  double info = 0.0;
  double log_lr = 0.0;
  double remainder = 0.0;
};

inline LanDecomposition lan_decompose(const EventSequence& seq, double u,
                                      const Kernel& kernel, double s_star) {
  if (!(u >= 0.0) || !std::isfinite(u))
    throw std::invalid_argument("lan_decompose: u must be >= 0");
  LanDecomposition out;
  out.delta = delta_param(seq, kernel, s_star).value;
  out.info = fisher_info_star(kernel, s_star);
  const double theta = u / std::sqrt(seq.horizon);
  out.log_lr = log_likelihood_ratio(seq, s_star, kernel, theta);
  out.remainder =
      out.log_lr - u * std::sqrt(out.info) * out.delta + 0.5 * u * u * out.info;
  return out;
}

namespace detail {

// Piece of a kernel restricted to a window: value(t) = v0 * exp(-decay (t-lo))
// on [lo, hi). decay = 0 encodes a constant piece.
struct Seg {
  double lo, hi, v0, decay;
};

inline std::vector<Seg> kernel_segments(const Kernel& k, double a, double b) {
  std::vector<Seg> segs;
  if (const auto* e = k.as_exponential()) {
    const double lo = std::max(a, 0.0);
    if (lo < b) segs.push_back({lo, b, e->alpha * std::exp(-e->gamma * lo), e->gamma});
    return segs;
  }
  if (const auto* bx = k.as_boxcar()) {
    const double lo = std::max(a, 0.0);
    const double hi = std::min(b, bx->width);
    if (lo < hi && bx->mass > 0.0) segs.push_back({lo, hi, bx->mass / bx->width, 0.0});
    return segs;
  }
  const auto& tb = *k.as_tabulated();
  for (std::size_t i = 0; i < tb.values.size(); ++i) {
    if (tb.values[i] == 0.0) continue;
    const double lo = std::max(a, tb.knots[i]);
    const double hi = std::min(b, tb.knots[i + 1]);
    if (lo < hi) segs.push_back({lo, hi, tb.values[i], 0.0});
  }
  return segs;
}

inline double seg_value_at(const std::vector<Seg>& segs, double t, double* decay) {
  for (const auto& s : segs) {
    if (t >= s.lo && t < s.hi) {
      *decay = s.decay;
      return s.decay == 0.0 ? s.v0 : s.v0 * std::exp(-s.decay * (t - s.lo));
    }
  }
  *decay = 0.0;
  return 0.0;
}

// int_a^b f^p g^q dt with f, g piecewise c*exp(-d t); exact per piece.
inline double product_integral(const std::vector<Seg>& fs,
                               const std::vector<Seg>& gs, int p, int q,
                               double a, double b) {
  std::vector<double> cuts{a, b};
  for (const auto& s : fs) {
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
  }
  for (const auto& s : gs) {
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double x0 = cuts[i], x1 = cuts[i + 1];
    if (x1 <= a || x0 >= b) continue;
    double c = 1.0, d = 0.0;
    if (p > 0) {
      double df = 0.0;
      const double vf = seg_value_at(fs, x0, &df);
      if (vf == 0.0) continue;
      c *= std::pow(vf, p);
      d += p * df;
    }
    if (q > 0) {
      double dg = 0.0;
      const double vg = seg_value_at(gs, x0, &dg);
      if (vg == 0.0) continue;
      c *= std::pow(vg, q);
      d += q * dg;
    }
    const double len = x1 - x0;
    total += d == 0.0 ? c * len : c * (-std::expm1(-d * len)) / d;
  }
  return total;
}

}  // namespace detail

// Cov((int_A f dX)^2, (int_A g dX)^2) for a Poisson process of constant
// intensity s on the window A = [a, b]; five-term moment expansion, every
// integral evaluated in closed form.
inline double lemma1_covariance(const Kernel& f, const Kernel& g, double s,
                                double window_lo, double window_hi) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("lemma1_covariance: intensity must be > 0");
  if (!std::isfinite(window_lo) || !std::isfinite(window_hi) ||
      !(window_lo < window_hi))
    throw std::invalid_argument(
        "lemma1_covariance: window must be bounded with lo < hi");
  const auto fs = detail::kernel_segments(f, window_lo, window_hi);
  const auto gs = detail::kernel_segments(g, window_lo, window_hi);
  const double a = window_lo, b = window_hi;
  const double i_f = s * detail::product_integral(fs, gs, 1, 0, a, b);
  const double i_g = s * detail::product_integral(fs, gs, 0, 1, a, b);
  const double i_fg = s * detail::product_integral(fs, gs, 1, 1, a, b);
  const double i_f2g2 = s * detail::product_integral(fs, gs, 2, 2, a, b);
  const double i_fg2 = s * detail::product_integral(fs, gs, 1, 2, a, b);
  const double i_f2g = s * detail::product_integral(fs, gs, 2, 1, a, b);
  return 4.0 * i_f * i_g * i_fg + 2.0 * i_fg * i_fg + i_f2g2 +
         2.0 * i_f * i_fg2 + 2.0 * i_g * i_f2g;
}

}  // namespace lamp
