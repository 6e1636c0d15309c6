#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "lamp/config.hpp"
#include "lamp/experiment.hpp"
#include "lamp/simulate.hpp"
#include "lamp/statistics.hpp"
#include "lamp/testing.hpp"
#include "lamp/version.hpp"

namespace lamp {

// LAMP_THREADS overrides the worker count. It affects speed only: replicate
// i always consumes the stream split(master_seed, i), and work is handed out
// in fixed-size chunks, so outputs are identical for any thread count.
inline unsigned mc_thread_count() {
  if (const char* s = std::getenv("LAMP_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(s, &end, 10);
    if (end != s && *end == '\0' && v >= 1 && v <= 1024)
      return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// out[i] = fn(i, split(master_seed, i)) for i in [0, n)
inline void run_replicates(long long n, std::uint64_t master_seed,
                           const std::function<double(long long, Rng&)>& fn,
                           std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(n), 0.0);
  constexpr long long kChunk = 256;
  const long long nchunks = (n + kChunk - 1) / kChunk;
  std::atomic<long long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto work = [&] {
    try {
      for (;;) {
        const long long c = next.fetch_add(1);
        if (c >= nchunks) return;
        const long long b = c * kChunk;
        const long long e = std::min(n, b + kChunk);
        for (long long i = b; i < e; ++i) {
          Rng rng = Rng::split(master_seed, static_cast<std::uint64_t>(i));
          out[static_cast<std::size_t>(i)] = fn(i, rng);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };
  const unsigned nt = std::min<unsigned>(
      mc_thread_count(), static_cast<unsigned>(std::max<long long>(nchunks, 1)));
  if (nt <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned i = 0; i < nt; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

// One (family, horizon, parameter) cell of an experiment.
struct CellSpec {
  TestFamily family = TestFamily::Param;
  double s_star = 1.0;
  double s_y = 1.0;
  double horizon = 0.0;
  std::optional<Kernel> kernel;  // statistic kernel; also drives the simulator
  double amplitude = 0.0;
};

inline double cell_statistic(const CellSpec& c, Rng& rng) {
  switch (c.family) {
    case TestFamily::Param: {
      const SimSpec ss{c.s_star, c.kernel, c.amplitude, 0, c.horizon};
      const EventSequence seq = simulate_hawkes(ss, rng);
      return delta_param(seq, *c.kernel, c.s_star).value;
    }
    case TestFamily::Nonparam: {
      const SimSpec ss{c.s_star, c.kernel, c.amplitude, 0, c.horizon};
      const EventSequence seq = simulate_hawkes(ss, rng);
      return delta_nonparam(seq, c.s_star).value;
    }
    case TestFamily::Dep: {
      const auto [x, y] = simulate_pair(c.s_star, c.s_y, *c.kernel, c.amplitude,
                                        c.horizon, rng);
      return delta_dep(x, y, *c.kernel, c.s_y, c.s_star).value;
    }
  }
  return 0.0;
}

inline void collect_cell(const CellSpec& cell, long long m,
                         std::uint64_t master_seed, std::vector<double>& out) {
  run_replicates(
      m, master_seed,
      [&cell](long long, Rng& rng) { return cell_statistic(cell, rng); }, out);
}

}  // namespace detail

// Rejection threshold on the statistic scale. The nonparametric exact rule
// maps the integer count threshold k (reject iff X_T > k) onto the delta_T
// scale, where it is an equivalent strict cut.
inline double rejection_threshold(const ExperimentConfig& cfg, double horizon) {
  if (cfg.family == TestFamily::Nonparam && cfg.rule == NonparamRule::Exact) {
    const long long k = exact_nonparam_threshold(cfg.s_star, horizon, cfg.eps);
    const double mean = cfg.s_star * horizon;
    return (static_cast<double>(k) - mean) / std::sqrt(mean);
  }
  return gaussian_quantile(cfg.eps);
}

namespace detail {

inline CellSpec make_cell(const ExperimentConfig& cfg, double horizon,
                          double param) {
  CellSpec c;
  c.family = cfg.family;
  c.s_star = cfg.s_star;
  c.s_y = cfg.s_y;
  c.horizon = horizon;
  if (cfg.family == TestFamily::Nonparam) {
    c.kernel = Kernel::boxcar(param, cfg.support_n);
    c.amplitude = 1.0 / std::sqrt(horizon);
  } else {
    c.kernel = effective_kernel(cfg);
    c.amplitude = param / std::sqrt(horizon);
  }
  return c;
}

// Self-exciting alternatives must satisfy amplitude * int(h) < 1.
inline bool cell_valid(const CellSpec& c) {
  if (c.family == TestFamily::Dep) return true;  // Y is driven, no feedback
  if (!c.kernel || c.amplitude == 0.0) return true;
  return c.amplitude * c.kernel->l1_norm() < 1.0;
}

inline double binomial_se(double p, long long m) {
  return m > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(m)) : 0.0;
}

}  // namespace detail

// Rejection frequency under H0 over the horizon grid.
inline CurveResult estimate_size(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const long long m = effective_replicates(cfg);
  CurveResult res;
  res.config_digest = config_digest(cfg);
  std::vector<double> values;
  for (double horizon : cfg.horizons) {
    detail::CellSpec cell = detail::make_cell(cfg, horizon, 0.0);
    detail::collect_cell(cell, m, cfg.master_seed, values);
    const double thr = rejection_threshold(cfg, horizon);
    long long rejected = 0;
    for (double v : values) rejected += v > thr ? 1 : 0;
    const double p = static_cast<double>(rejected) / static_cast<double>(m);
    res.rows.push_back({horizon, p, detail::binomial_se(p, m), m, true});
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Rejection frequency under the alternative over the parameter grid, one
// column per horizon, plus the closed-form limiting curve. Unstable cells
// are flagged invalid and carry NaN, never a clamped value.
inline PowerTable estimate_power(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const long long m = effective_replicates(cfg);
  PowerTable out;
  out.grid = cfg.grid;
  out.horizons = cfg.horizons;
  out.family = cfg.family;
  out.config_digest = config_digest(cfg);
  out.cells.resize(cfg.horizons.size());

  std::vector<double> values;
  for (std::size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
    const double horizon = cfg.horizons[hi];
    const double thr = rejection_threshold(cfg, horizon);
    for (double param : cfg.grid) {
      detail::CellSpec cell = detail::make_cell(cfg, horizon, param);
      if (!detail::cell_valid(cell)) {
        out.cells[hi].push_back(
            {std::numeric_limits<double>::quiet_NaN(),
             std::numeric_limits<double>::quiet_NaN(), false});
        continue;
      }
      detail::collect_cell(cell, m, cfg.master_seed, values);
      long long rejected = 0;
      for (double v : values) rejected += v > thr ? 1 : 0;
      const double p = static_cast<double>(rejected) / static_cast<double>(m);
      out.cells[hi].push_back({p, detail::binomial_se(p, m), true});
    }
  }
  for (double param : cfg.grid) {
    double lim = 0.0;
    switch (cfg.family) {
      case TestFamily::Param:
        lim = limiting_power_param(
            param, fisher_info_star(effective_kernel(cfg), cfg.s_star), cfg.eps);
        break;
      case TestFamily::Dep:
        lim = limiting_power_dep(
            param, fisher_info_dep(effective_kernel(cfg), cfg.s_star, cfg.s_y),
            cfg.eps);
        break;
      case TestFamily::Nonparam:
        lim = limiting_power_nonparam(param, cfg.s_star, cfg.eps);
        break;
    }
    out.beta_limit.push_back(lim);
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Order statistic at rank ceil((1-eps) M), 1-based, of the ascending sample.
inline double empirical_upper_quantile(const std::vector<double>& sorted,
                                       double eps) {
  if (sorted.empty())
    throw std::invalid_argument("empirical_upper_quantile: empty sample");
  const double m = static_cast<double>(sorted.size());
  long long rank = static_cast<long long>(std::ceil((1.0 - eps) * m));
  rank = std::max<long long>(1, std::min<long long>(rank, sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

// Empirical 1-eps quantiles of the H0 statistic for each horizon and each
// eps on the grid.
inline ThresholdTable calibrate_threshold(const ExperimentConfig& cfg,
                                          const std::vector<double>& eps_grid) {
  ExperimentConfig local = cfg;
  local.kind = ExperimentKind::Threshold;
  local.grid = eps_grid;
  validate_config(local);
  const auto t0 = std::chrono::steady_clock::now();
  const long long m = effective_replicates(local);
  ThresholdTable out;
  out.eps_grid = eps_grid;
  out.horizons = local.horizons;
  out.config_digest = config_digest(local);
  std::vector<double> values;
  for (double horizon : local.horizons) {
    detail::CellSpec cell = detail::make_cell(local, horizon, 0.0);
    detail::collect_cell(cell, m, local.master_seed, values);
    std::sort(values.begin(), values.end());
    std::vector<double> zs;
    zs.reserve(eps_grid.size());
    for (double eps : eps_grid) zs.push_back(empirical_upper_quantile(values, eps));
    out.z_emp.push_back(std::move(zs));
  }
  for (double eps : eps_grid) {
    out.z_gauss.push_back(gaussian_quantile(eps));
    out.warn.push_back(static_cast<double>(m) * eps < 10.0);
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// --- CSV output ----------------------------------------------------------

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output file: " + path);
  return out;
}

inline void write_metadata(std::ofstream& out, const ExperimentConfig& cfg,
                           std::uint64_t digest) {
  nlohmann::json j;
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(digest));
  j["digest"] = hex;
  j["seed"] = cfg.master_seed;
  j["M"] = effective_replicates(cfg);
  j["version"] = kVersion;
  out << "# " << j.dump() << "\n";
}

inline std::string horizon_tag(double horizon) {
  return detail::format_g(horizon, 12);
}

inline const char* param_name(TestFamily family) {
  return family == TestFamily::Nonparam ? "r" : "u";
}

inline void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace detail

inline void write_size_csv(const std::string& path, const ExperimentConfig& cfg,
                           const CurveResult& res) {
  auto out = detail::open_output(path);
  detail::write_metadata(out, cfg, res.config_digest);
  out << "T,alpha,se\n";
  for (const auto& row : res.rows)
    out << detail::format_g(row.param, 12) << ','
        << detail::format_g(row.frequency, 12) << ','
        << detail::format_g(row.std_error, 12) << "\n";
  detail::finish_output(out, path);
}

inline void write_power_csv(const std::string& path, const ExperimentConfig& cfg,
                            const PowerTable& table) {
  auto out = detail::open_output(path);
  detail::write_metadata(out, cfg, table.config_digest);
  out << detail::param_name(table.family);
  for (double horizon : table.horizons)
    out << ",beta_T" << detail::horizon_tag(horizon);
  out << ",beta_limit,valid\n";
  for (std::size_t gi = 0; gi < table.grid.size(); ++gi) {
    out << detail::format_g(table.grid[gi], 12);
    bool all_valid = true;
    for (std::size_t hi = 0; hi < table.horizons.size(); ++hi) {
      const auto& cell = table.cells[hi][gi];
      all_valid = all_valid && cell.valid;
      out << ',' << (cell.valid ? detail::format_g(cell.beta, 12) : "nan");
    }
    out << ',' << detail::format_g(table.beta_limit[gi], 12) << ','
        << (all_valid ? 1 : 0) << "\n";
  }
  detail::finish_output(out, path);
}

inline void write_threshold_csv(const std::string& path,
                                const ExperimentConfig& cfg,
                                const ThresholdTable& table) {
  auto out = detail::open_output(path);
  detail::write_metadata(out, cfg, table.config_digest);
  for (std::size_t i = 0; i < table.eps_grid.size(); ++i)
    if (table.warn[i])
      out << "# warn: eps=" << detail::format_g(table.eps_grid[i], 12)
          << " has M*eps < 10, quantile unstable\n";
  out << "eps";
  for (double horizon : table.horizons)
    out << ",z_emp_T" << detail::horizon_tag(horizon);
  out << ",z_gauss\n";
  for (std::size_t i = 0; i < table.eps_grid.size(); ++i) {
    out << detail::format_g(table.eps_grid[i], 12);
    for (std::size_t hi = 0; hi < table.horizons.size(); ++hi)
      out << ',' << detail::format_g(table.z_emp[hi][i], 12);
    out << ',' << detail::format_g(table.z_gauss[i], 12) << "\n";
  }
  detail::finish_output(out, path);
}

// Closed-form limiting power curve over the config grid, no simulation.
inline void write_limit_csv(const std::string& path, const ExperimentConfig& cfg) {
  ExperimentConfig local = cfg;
  local.kind = ExperimentKind::Power;
  validate_config(local);
  auto out = detail::open_output(path);
  detail::write_metadata(out, local, config_digest(local));
  out << detail::param_name(local.family) << ",beta_limit\n";
  for (double param : local.grid) {
    double lim = 0.0;
    switch (local.family) {
      case TestFamily::Param:
        lim = limiting_power_param(
            param, fisher_info_star(effective_kernel(local), local.s_star),
            local.eps);
        break;
      case TestFamily::Dep:
        lim = limiting_power_dep(
            param, fisher_info_dep(effective_kernel(local), local.s_star, local.s_y),
            local.eps);
        break;
      case TestFamily::Nonparam:
        lim = limiting_power_nonparam(param, local.s_star, local.eps);
        break;
    }
    out << detail::format_g(param, 12) << ',' << detail::format_g(lim, 12) << "\n";
  }
  detail::finish_output(out, path);
}

struct RunOutcome {
  ExperimentKind kind = ExperimentKind::Power;
  std::uint64_t digest = 0;
  std::string path;
  double wall_seconds = 0.0;
};

// Dispatches to the estimator for cfg.kind and persists the CSV. The same
// config and seed always produce a byte-identical file.
inline RunOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::string& output_path) {
  validate_config(cfg);
  RunOutcome outcome;
  outcome.kind = cfg.kind;
  outcome.path = output_path;
  switch (cfg.kind) {
    case ExperimentKind::Size: {
      const CurveResult res = estimate_size(cfg);
      write_size_csv(output_path, cfg, res);
      outcome.digest = res.config_digest;
      outcome.wall_seconds = res.wall_seconds;
      break;
    }
    case ExperimentKind::Power: {
      const PowerTable res = estimate_power(cfg);
      write_power_csv(output_path, cfg, res);
      outcome.digest = res.config_digest;
      outcome.wall_seconds = res.wall_seconds;
      break;
    }
    case ExperimentKind::Threshold: {
      const ThresholdTable res = calibrate_threshold(cfg, cfg.grid);
      write_threshold_csv(output_path, cfg, res);
      outcome.digest = res.config_digest;
      outcome.wall_seconds = res.wall_seconds;
      break;
    }
  }
  return outcome;
}

}  // namespace lamp
