#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lamp/kernel.hpp"

namespace lamp {

enum class TestFamily { Param, Dep, Nonparam };
enum class ExperimentKind { Size, Power, Threshold };
enum class NonparamRule { Gaussian, Exact };

// One Monte-Carlo experiment. `grid` holds u values (param/dep), r values
// (nonparam power) or eps values (threshold calibration). For nonparam runs
// the alternative kernel is Boxcar(r, support_n) at amplitude 1/sqrt(T).
// s_star doubles as S_X for the dependence family.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Power;
  TestFamily family = TestFamily::Param;
  double s_star = 1.0;
  double s_y = 1.0;
  std::vector<double> horizons{100.0, 300.0, 1000.0};
  long long replicates = 0;  // 0 -> kind default (1e5 size/threshold, 1e4 power)
  std::uint64_t master_seed = 1;
  std::optional<Kernel> kernel;  // default Exponential(0.5, 0.5)
  std::vector<double> grid;
  double eps = 0.05;
  double support_n = 5.0;
  NonparamRule rule = NonparamRule::Gaussian;
};

inline long long default_replicates(ExperimentKind kind) {
  return kind == ExperimentKind::Power ? 10000 : 100000;
}

inline long long effective_replicates(const ExperimentConfig& cfg) {
  return cfg.replicates > 0 ? cfg.replicates : default_replicates(cfg.kind);
}

inline const Kernel& effective_kernel(const ExperimentConfig& cfg) {
  static const Kernel fallback = Kernel::exponential(0.5, 0.5);
  return cfg.kernel ? *cfg.kernel : fallback;
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.s_star > 0.0) || !std::isfinite(cfg.s_star))
    throw std::invalid_argument("config: s_star must be > 0");
  if (cfg.family == TestFamily::Dep && (!(cfg.s_y > 0.0) || !std::isfinite(cfg.s_y)))
    throw std::invalid_argument("config: s_y must be > 0");
  if (cfg.horizons.empty())
    throw std::invalid_argument("config: horizon grid must be nonempty");
  if (!std::is_sorted(cfg.horizons.begin(), cfg.horizons.end()))
    throw std::invalid_argument("config: horizon grid must be sorted");
  for (double t : cfg.horizons)
    if (!(t > 0.0) || !std::isfinite(t))
      throw std::invalid_argument("config: horizons must be > 0");
  if (cfg.replicates < 0 || effective_replicates(cfg) < 1)
    throw std::invalid_argument("config: replicates must be >= 1");
  if (!(cfg.eps > 0.0) || !(cfg.eps < 1.0))
    throw std::invalid_argument("config: eps must lie in (0,1)");
  if (cfg.kind != ExperimentKind::Size) {
    if (cfg.grid.empty())
      throw std::invalid_argument("config: parameter grid must be nonempty");
    if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end()))
      throw std::invalid_argument("config: parameter grid must be sorted");
    for (double v : cfg.grid) {
      if (!std::isfinite(v) || !(v >= 0.0))
        throw std::invalid_argument("config: grid values must be >= 0");
      if (cfg.kind == ExperimentKind::Threshold && !(v > 0.0 && v < 1.0))
        throw std::invalid_argument("config: threshold grid is eps values in (0,1)");
    }
  }
  if (cfg.family == TestFamily::Nonparam &&
      (!(cfg.support_n > 0.0) || !std::isfinite(cfg.support_n)))
    throw std::invalid_argument("config: N (support bound) must be > 0");
}

struct CurveRow {
  double param = 0.0;  // T for size curves, u/r for power, eps for thresholds
  double frequency = 0.0;
  double std_error = 0.0;
  long long m_effective = 0;
  bool valid = true;
};

struct CurveResult {
  std::vector<CurveRow> rows;
  std::uint64_t config_digest = 0;
  double wall_seconds = 0.0;  // informational; never serialized
};

struct PowerCell {
  double beta = 0.0;
  double std_error = 0.0;
  bool valid = true;
};

struct PowerTable {
  std::vector<double> grid;
  std::vector<double> horizons;
  std::vector<std::vector<PowerCell>> cells;  // [horizon][grid point]
  std::vector<double> beta_limit;
  TestFamily family = TestFamily::Param;
  std::uint64_t config_digest = 0;
  double wall_seconds = 0.0;
};

struct ThresholdTable {
  std::vector<double> eps_grid;
  std::vector<double> horizons;
  std::vector<std::vector<double>> z_emp;  // [horizon][eps]
  std::vector<double> z_gauss;
  std::vector<bool> warn;  // M * eps < 10: quantile unstable
  std::uint64_t config_digest = 0;
  double wall_seconds = 0.0;
};

namespace detail {

inline std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double v = lo; v <= hi + 1e-12; v += step) g.push_back(v);
  return g;
}

}  // namespace detail

// Built-in experiment presets for the six study figures. Desk scale keeps
// runs in the minutes range; paper scale uses the full replicate
// counts (hours of CPU).
inline ExperimentConfig figure_preset(const std::string& name, bool paper_scale) {
  ExperimentConfig cfg;
  cfg.kernel = Kernel::exponential(0.5, 0.5);
  cfg.master_seed = 20240801;
  if (name == "fig1") {
    cfg.kind = ExperimentKind::Size;
    cfg.horizons = {25, 50, 100, 200, 300, 500, 750, 1000};
    cfg.replicates = paper_scale ? 10000000LL : 100000LL;
  } else if (name == "fig2") {
    cfg.kind = ExperimentKind::Power;
    cfg.grid = detail::linear_grid(0.0, 5.0, 0.5);
    cfg.replicates = paper_scale ? 1000000LL : 10000LL;
  } else if (name == "fig3") {
    cfg.kind = ExperimentKind::Threshold;
    cfg.grid = detail::linear_grid(0.005, 0.25, 0.005);
    cfg.replicates = paper_scale ? 10000000LL : 100000LL;
  } else if (name == "fig4") {
    cfg.kind = ExperimentKind::Threshold;
    cfg.grid = detail::linear_grid(0.0025, 0.05, 0.0025);
    cfg.replicates = paper_scale ? 10000000LL : 100000LL;
  } else if (name == "fig5" || name == "fig6") {
    cfg.kind = ExperimentKind::Power;
    cfg.family = TestFamily::Nonparam;
    cfg.kernel.reset();
    cfg.support_n = name == "fig5" ? 5.0 : 50.0;
    cfg.grid = detail::linear_grid(0.0, 5.0, 0.5);
    cfg.replicates = paper_scale ? 1000000LL : 10000LL;
  } else {
    throw std::invalid_argument(
        "unknown figure '" + name + "'; valid names: fig1 fig2 fig3 fig4 fig5 fig6");
  }
  return cfg;
}

inline const char* figure_csv_kind(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Size: return "size";
    case ExperimentKind::Power: return "power";
    case ExperimentKind::Threshold: return "threshold";
  }
  return "experiment";
}

}  // namespace lamp
