#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "lamp/digest.hpp"

namespace lamp {

// h(t) = alpha * exp(-gamma t), t >= 0
struct ExponentialKernel {
  double alpha = 0.0;
  double gamma = 0.0;
};

// h(t) = (mass/width) on [0, width]; `mass` is the L1 norm
struct BoxcarKernel {
  double mass = 0.0;
  double width = 0.0;
};

// Right-constant step function: values[i] on [knots[i], knots[i+1]),
// zero before knots.front() and from knots.back() on.
struct TabulatedKernel {
  std::vector<double> knots;     // size k+1, strictly increasing, >= 0
  std::vector<double> values;    // size k, all >= 0
  std::vector<double> cum;       // cum[i] = int_0^{knots[i]} h
  std::vector<double> sup_from;  // sup_from[i] = max(values[i..k-1])
};

class Kernel {
 public:
  static Kernel exponential(double alpha, double gamma) {
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !(gamma > 0.0) ||
        !std::isfinite(gamma))
      throw std::invalid_argument(
          "exponential kernel: need alpha > 0 and gamma > 0");
    return Kernel(ExponentialKernel{alpha, gamma});
  }

  static Kernel boxcar(double mass, double width) {
    if (!(mass >= 0.0) || !std::isfinite(mass) || !(width > 0.0) ||
        !std::isfinite(width))
      throw std::invalid_argument("boxcar kernel: need mass >= 0 and width > 0");
    return Kernel(BoxcarKernel{mass, width});
  }

  static Kernel tabulated(std::vector<double> knots, std::vector<double> values) {
    if (knots.size() < 2 || values.size() + 1 != knots.size())
      throw std::invalid_argument(
          "tabulated kernel: need k+1 knots for k values, k >= 1");
    if (!(knots.front() >= 0.0))
      throw std::invalid_argument("tabulated kernel: knots must start at t >= 0");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      if (!std::isfinite(knots[i + 1]) || !(knots[i] < knots[i + 1]))
        throw std::invalid_argument(
            "tabulated kernel: knots must be finite and strictly increasing");
    for (double v : values)
      if (!std::isfinite(v) || !(v >= 0.0))
        throw std::invalid_argument("tabulated kernel: values must be >= 0");

    TabulatedKernel t{std::move(knots), std::move(values), {}, {}};
    const std::size_t k = t.values.size();
    t.cum.resize(k + 1);
    t.cum[0] = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      t.cum[i + 1] = t.cum[i] + t.values[i] * (t.knots[i + 1] - t.knots[i]);
    t.sup_from.resize(k);
    double m = 0.0;
    for (std::size_t i = k; i-- > 0;) {
      m = std::max(m, t.values[i]);
      t.sup_from[i] = m;
    }
    return Kernel(std::move(t));
  }

  double eval(double t) const {
    if (t < 0.0) return 0.0;
    if (const auto* e = as_exponential()) return e->alpha * std::exp(-e->gamma * t);
    if (const auto* b = as_boxcar()) return t <= b->width ? b->mass / b->width : 0.0;
    const auto& tb = std::get<TabulatedKernel>(v_);
    if (t < tb.knots.front() || t >= tb.knots.back()) return 0.0;
    const auto it = std::upper_bound(tb.knots.begin(), tb.knots.end(), t);
    return tb.values[static_cast<std::size_t>(it - tb.knots.begin()) - 1];
  }

  double l1_norm() const {
    if (const auto* e = as_exponential()) return e->alpha / e->gamma;
    if (const auto* b = as_boxcar()) return b->mass;
    return std::get<TabulatedKernel>(v_).cum.back();
  }

  double l2_norm_sq() const {
    if (const auto* e = as_exponential())
      return e->alpha * e->alpha / (2.0 * e->gamma);
    if (const auto* b = as_boxcar()) return b->mass * b->mass / b->width;
    const auto& tb = std::get<TabulatedKernel>(v_);
    double s = 0.0;
    for (std::size_t i = 0; i < tb.values.size(); ++i)
      s += tb.values[i] * tb.values[i] * (tb.knots[i + 1] - tb.knots[i]);
    return s;
  }

  // int_0^x h(v) dv, closed form per variant
  double integral_to(double x) const {
    if (!(x > 0.0)) return 0.0;
    if (const auto* e = as_exponential())
      return -(e->alpha / e->gamma) * std::expm1(-e->gamma * x);
    if (const auto* b = as_boxcar())
      return (b->mass / b->width) * std::min(x, b->width);
    const auto& tb = std::get<TabulatedKernel>(v_);
    if (x <= tb.knots.front()) return 0.0;
    if (x >= tb.knots.back()) return tb.cum.back();
    const auto it = std::upper_bound(tb.knots.begin(), tb.knots.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - tb.knots.begin()) - 1;
    return tb.cum[i] + tb.values[i] * (x - tb.knots[i]);
  }

  // Nonincreasing majorant sup_{v >= max(t,0)} h(v); dominating rate for
  // thinning even when a tabulated kernel has increasing segments.
  double envelope(double t) const {
    if (t < 0.0) t = 0.0;
    if (const auto* e = as_exponential()) return e->alpha * std::exp(-e->gamma * t);
    if (const auto* b = as_boxcar()) return t <= b->width ? b->mass / b->width : 0.0;
    const auto& tb = std::get<TabulatedKernel>(v_);
    if (t >= tb.knots.back()) return 0.0;
    const auto it = std::upper_bound(tb.knots.begin(), tb.knots.end(), t);
    const std::size_t i =
        it == tb.knots.begin() ? 0 : static_cast<std::size_t>(it - tb.knots.begin()) - 1;
    return tb.sup_from[i];
  }

  // +inf for the exponential variant
  double support_bound() const {
    if (as_exponential()) return std::numeric_limits<double>::infinity();
    if (const auto* b = as_boxcar()) return b->width;
    return std::get<TabulatedKernel>(v_).knots.back();
  }

  bool bounded_support() const { return !as_exponential(); }

  // h -> c*h
  Kernel scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c))
      throw std::invalid_argument("kernel scaling factor must be > 0");
    if (const auto* e = as_exponential()) return exponential(c * e->alpha, e->gamma);
    if (const auto* b = as_boxcar()) return boxcar(c * b->mass, b->width);
    const auto& tb = std::get<TabulatedKernel>(v_);
    std::vector<double> vals = tb.values;
    for (double& v : vals) v *= c;
    return tabulated(tb.knots, std::move(vals));
  }

  const ExponentialKernel* as_exponential() const {
    return std::get_if<ExponentialKernel>(&v_);
  }
  const BoxcarKernel* as_boxcar() const { return std::get_if<BoxcarKernel>(&v_); }
  const TabulatedKernel* as_tabulated() const {
    return std::get_if<TabulatedKernel>(&v_);
  }

  void mix_into(Digest& d) const {
    if (const auto* e = as_exponential()) {
      d.mix(std::uint64_t{1});
      d.mix(e->alpha);
      d.mix(e->gamma);
    } else if (const auto* b = as_boxcar()) {
      d.mix(std::uint64_t{2});
      d.mix(b->mass);
      d.mix(b->width);
    } else {
      const auto& tb = std::get<TabulatedKernel>(v_);
      d.mix(std::uint64_t{3});
      d.mix(tb.knots);
      d.mix(tb.values);
    }
  }

 private:
  template <typename V>
  explicit Kernel(V v) : v_(std::move(v)) {}
  std::variant<ExponentialKernel, BoxcarKernel, TabulatedKernel> v_;
};

struct StabilityCheck {
  double rho = 0.0;  // int_0^inf g
  bool stable = false;
};

inline StabilityCheck stability_check(const Kernel& k) {
  const double rho = k.l1_norm();
  return {rho, rho < 1.0};
}

// I_h* = int h^2 + s_star * (int h)^2
inline double fisher_info_star(const Kernel& k, double s_star) {
  if (!(s_star > 0.0) || !std::isfinite(s_star))
    throw std::invalid_argument("fisher_info_star: s_star must be > 0");
  const double l1 = k.l1_norm();
  return k.l2_norm_sq() + s_star * l1 * l1;
}

// I_h = (s_x/s_y) * (int h^2 + s_x * (int h)^2)
inline double fisher_info_dep(const Kernel& k, double s_x, double s_y) {
  if (!(s_x > 0.0) || !std::isfinite(s_x) || !(s_y > 0.0) || !std::isfinite(s_y))
    throw std::invalid_argument("fisher_info_dep: intensities must be > 0");
  const double l1 = k.l1_norm();
  return (s_x / s_y) * (k.l2_norm_sq() + s_x * l1 * l1);
}

// mu = s_star / (1 - rho); requires a stable kernel
inline double stationary_rate(double s_star, const Kernel& k) {
  if (!(s_star > 0.0) || !std::isfinite(s_star))
    throw std::invalid_argument("stationary_rate: s_star must be > 0");
  const auto st = stability_check(k);
  if (!st.stable)
    throw std::invalid_argument(
        "stationary_rate: kernel is unstable (int g >= 1), no stationary regime");
  return s_star / (1.0 - st.rho);
}

namespace detail {

// int_a^b v * e^{i lambda t} dt by composite Simpson; exact for lambda = 0.
inline std::complex<double> simpson_const_piece(double a, double b, double v,
                                                double lambda) {
  const double len = b - a;
  if (!(len > 0.0) || v == 0.0) return {0.0, 0.0};
  std::size_t half = static_cast<std::size_t>(8.0 * len * std::abs(lambda)) + 8;
  half = std::min<std::size_t>(half, 1u << 20);
  const std::size_t n = 2 * half;
  const double h = len / static_cast<double>(n);
  auto f = [&](double t) {
    return std::complex<double>(std::cos(lambda * t), std::sin(lambda * t));
  };
  std::complex<double> acc = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i)
    acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return acc * (v * h / 3.0);
}

}  // namespace detail

// G(lambda) = int_0^inf e^{i lambda t} h(t) dt. Closed form for the
// exponential variant; composite Simpson over the bounded support otherwise.
inline std::complex<double> kernel_fourier(const Kernel& k, double lambda) {
  if (const auto* e = k.as_exponential())
    return e->alpha / std::complex<double>(e->gamma, -lambda);
  if (const auto* b = k.as_boxcar())
    return detail::simpson_const_piece(0.0, b->width, b->mass / b->width, lambda);
  const auto& tb = *k.as_tabulated();
  std::complex<double> g{0.0, 0.0};
  for (std::size_t i = 0; i < tb.values.size(); ++i)
    g += detail::simpson_const_piece(tb.knots[i], tb.knots[i + 1], tb.values[i],
                                     lambda);
  return g;
}

// f(lambda) = mu / (2 pi |1 - G(lambda)|^2) of the stationary process
inline double spectral_density(const Kernel& k, double s_star, double lambda) {
  const double mu = stationary_rate(s_star, k);  // rejects unstable kernels
  const std::complex<double> g = kernel_fourier(k, lambda);
  return mu / (2.0 * std::numbers::pi * std::norm(1.0 - g));
}

}  // namespace lamp
