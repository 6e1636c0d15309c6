// Command-line front end: simulation, single-statistic evaluation, the
// size/power/threshold experiments, figure presets, and the Lemma-1
// verification harness.
//
// Exit codes: 0 success, 1 check failure (lemma1-check), 2 usage or config
// error, 3 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lamp/config.hpp"
#include "lamp/montecarlo.hpp"
#include "lamp/version.hpp"

namespace {

struct SimulateArgs {
  std::string config_path;
  std::string output = "events.csv";
  std::optional<double> s_star;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<double> amplitude;
  std::string kernel_spec;
};

int run_simulate(const SimulateArgs& a) {
  lamp::SimSpec spec;
  spec.s_star = 1.0;
  spec.amplitude = 1.0;
  if (!a.config_path.empty()) spec = lamp::load_simspec(a.config_path);
  if (a.s_star) spec.s_star = *a.s_star;
  if (a.horizon) spec.horizon = *a.horizon;
  if (a.seed) spec.seed = *a.seed;
  if (a.amplitude) spec.amplitude = *a.amplitude;
  if (!a.kernel_spec.empty()) spec.kernel = lamp::kernel_from_spec(a.kernel_spec);
  if (!(spec.horizon > 0.0))
    throw std::invalid_argument("simulate: horizon (--T) must be > 0");
  const lamp::EventSequence seq = lamp::simulate_hawkes(spec);
  lamp::write_events_csv(a.output, seq);
  std::cout << a.output << ": " << seq.size() << " events on (0, "
            << lamp::detail::format_g(seq.horizon, 12) << "]\n";
  return 0;
}

struct StatArgs {
  std::string family;
  std::string input;
  std::string input_y;
  std::string kernel_spec;
  double s_star = 1.0;
  double s_y = 1.0;
  double amplitude = 1.0;
};

int run_stat(const StatArgs& a) {
  const lamp::EventSequence x = lamp::read_events_csv(a.input);
  std::optional<lamp::Kernel> kernel;
  if (!a.kernel_spec.empty()) kernel = lamp::kernel_from_spec(a.kernel_spec);

  double value = 0.0;
  if (a.family == "param") {
    if (!kernel) throw std::invalid_argument("stat: --kernel required for param");
    value = lamp::delta_param(x, *kernel, a.s_star).value;
  } else if (a.family == "dep") {
    if (!kernel) throw std::invalid_argument("stat: --kernel required for dep");
    if (a.input_y.empty())
      throw std::invalid_argument("stat: --input-y required for dep");
    const lamp::EventSequence y = lamp::read_events_csv(a.input_y);
    value = lamp::delta_dep(x, y, *kernel, a.s_y, a.s_star).value;
  } else if (a.family == "nonparam") {
    value = lamp::delta_nonparam(x, a.s_star).value;
  } else if (a.family == "loglr") {
    if (!kernel) throw std::invalid_argument("stat: --kernel required for loglr");
    value = lamp::log_likelihood_ratio(x, a.s_star, *kernel, a.amplitude);
  } else {
    throw std::invalid_argument("stat: unknown family '" + a.family +
                                "' (param|dep|nonparam|loglr)");
  }

  std::printf("%.12g\n", value);
  nlohmann::json j;
  j["family"] = a.family;
  j["value"] = value;
  j["T"] = x.horizon;
  j["s_star"] = a.s_star;
  j["kernel"] = kernel ? lamp::kernel_to_json(*kernel) : nlohmann::json();
  std::cout << j.dump() << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string config_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<long long> replicates;
  std::optional<double> eps;
  bool limit_only = false;
};

lamp::ExperimentConfig build_config(lamp::ExperimentKind kind,
                                    const ExperimentArgs& a) {
  lamp::ExperimentConfig cfg;
  if (!a.config_path.empty()) cfg = lamp::load_config(a.config_path);
  cfg.kind = kind;
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.replicates) cfg.replicates = *a.replicates;
  if (a.eps) cfg.eps = *a.eps;
  if (kind != lamp::ExperimentKind::Size && cfg.grid.empty()) {
    // usable defaults when no config is given
    cfg.grid = kind == lamp::ExperimentKind::Threshold
                   ? std::vector<double>{0.01, 0.025, 0.05, 0.1, 0.25}
                   : lamp::detail::linear_grid(0.0, 5.0, 0.5);
  }
  return cfg;
}

int run_experiment_cmd(lamp::ExperimentKind kind, const ExperimentArgs& a) {
  const lamp::ExperimentConfig cfg = build_config(kind, a);
  if (a.limit_only) {
    lamp::write_limit_csv(a.output, cfg);
    std::cout << a.output << ": limiting curve, "
              << cfg.grid.size() << " rows\n";
    return 0;
  }
  const lamp::RunOutcome out = lamp::run_experiment(cfg, a.output);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(out.digest));
  std::cout << out.path << ": digest " << hex << ", "
            << lamp::detail::format_g(out.wall_seconds, 3) << " s\n";
  return 0;
}

struct FigureArgs {
  std::string name;
  std::string scale = "desk";
  std::string outdir = ".";
  std::optional<std::uint64_t> seed;
};

int run_figure(const FigureArgs& a) {
  if (a.scale != "desk" && a.scale != "paper")
    throw std::invalid_argument("figure: --scale must be desk or paper");
  lamp::ExperimentConfig cfg = lamp::figure_preset(a.name, a.scale == "paper");
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.scale == "paper")
    std::cerr << "warning: paper scale uses the full replicate counts; "
                 "expect a very long run\n";
  const std::string path =
      a.outdir + "/" + a.name + "_" + lamp::figure_csv_kind(cfg) + ".csv";
  const lamp::RunOutcome out = lamp::run_experiment(cfg, path);
  std::cout << out.path << ": done in "
            << lamp::detail::format_g(out.wall_seconds, 3) << " s\n";
  return 0;
}

struct Lemma1Args {
  int cases = 5;
  long long mc = 1000000;
  std::uint64_t seed = 42;
};

struct Lemma1Case {
  std::string label;
  lamp::Kernel f;
  lamp::Kernel g;
  double intensity;
  double lo, hi;
};

std::vector<Lemma1Case> lemma1_cases(int randomized, std::uint64_t seed) {
  using lamp::Kernel;
  std::vector<Lemma1Case> cases;
  cases.push_back({"f=g=1 on [0,1], S=1 (Var(X^2) of Poisson(1) = 11)",
                   Kernel::boxcar(1.0, 1.0), Kernel::boxcar(1.0, 1.0), 1.0, 0.0,
                   1.0});
  cases.push_back({"g = 0 (covariance vanishes)", Kernel::exponential(0.7, 1.1),
                   Kernel::boxcar(0.0, 1.0), 1.0, 0.0, 1.5});
  lamp::Rng rng = lamp::Rng::split(seed, 0xC0FFEE);
  for (int i = 0; i < randomized; ++i) {
    const auto pick = [&](int which) -> Kernel {
      switch (which) {
        case 0:
          return Kernel::exponential(0.2 + 1.3 * rng.uniform01(),
                                     0.4 + 1.6 * rng.uniform01());
        case 1:
          return Kernel::boxcar(0.2 + 1.2 * rng.uniform01(),
                                0.3 + 1.2 * rng.uniform01());
        default: {
          const double k1 = 0.2 + 0.4 * rng.uniform01();
          const double k2 = k1 + 0.2 + 0.6 * rng.uniform01();
          return Kernel::tabulated({0.0, k1, k2},
                                   {0.2 + rng.uniform01(), 0.1 + rng.uniform01()});
        }
      }
    };
    const Kernel f = pick(static_cast<int>(rng.next_u64() % 3));
    const Kernel g = pick(static_cast<int>(rng.next_u64() % 3));
    const double s = 0.5 + 2.5 * rng.uniform01();
    const double hi = 0.5 + 1.5 * rng.uniform01();
    cases.push_back({"randomized case " + std::to_string(i + 1), f, g, s, 0.0, hi});
  }
  return cases;
}

int run_lemma1(const Lemma1Args& a) {
  if (a.cases <= 0)
    throw std::invalid_argument("lemma1-check: --cases must be >= 1");
  if (a.mc < 1000)
    throw std::invalid_argument("lemma1-check: --mc must be >= 1000");
  const auto cases = lemma1_cases(a.cases, a.seed);
  bool all_ok = true;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    const double analytic =
        lamp::lemma1_covariance(c.f, c.g, c.intensity, c.lo, c.hi);

    // MC estimate of Cov(F^2, G^2) with F = sum f(t_i), G = sum g(t_i)
    std::vector<double> f2;
    std::vector<double> g2(static_cast<std::size_t>(a.mc));
    lamp::run_replicates(
        a.mc, a.seed + 1 + ci,
        [&](long long i, lamp::Rng& rng) {
          double t = c.lo, fs = 0.0, gs = 0.0;
          for (;;) {
            t += rng.exponential(c.intensity);
            if (t >= c.hi) break;
            fs += c.f.eval(t);
            gs += c.g.eval(t);
          }
          g2[static_cast<std::size_t>(i)] = gs * gs;
          return fs * fs;
        },
        f2);
    const double m = static_cast<double>(a.mc);
    double mf = 0.0, mg = 0.0;
    for (long long i = 0; i < a.mc; ++i) {
      mf += f2[static_cast<std::size_t>(i)];
      mg += g2[static_cast<std::size_t>(i)];
    }
    mf /= m;
    mg /= m;
    double cov = 0.0, var_c = 0.0;
    for (long long i = 0; i < a.mc; ++i) {
      const double ci2 = (f2[static_cast<std::size_t>(i)] - mf) *
                         (g2[static_cast<std::size_t>(i)] - mg);
      cov += ci2;
    }
    cov /= (m - 1.0);
    for (long long i = 0; i < a.mc; ++i) {
      const double ci2 = (f2[static_cast<std::size_t>(i)] - mf) *
                             (g2[static_cast<std::size_t>(i)] - mg) -
                         cov;
      var_c += ci2 * ci2;
    }
    const double se = std::sqrt(var_c / (m - 1.0)) / std::sqrt(m);
    const double z = se > 0.0 ? (cov - analytic) / se : 0.0;
    const bool ok = std::abs(z) <= 4.0;
    all_ok = all_ok && ok;
    std::printf("case %zu [%s]: analytic=%.6g mc=%.6g se=%.3g z=%+.2f %s\n", ci,
                c.label.c_str(), analytic, cov, se, z, ok ? "PASS" : "FAIL");
  }
  std::printf("lemma1-check: %s\n", all_ok ? "all cases pass at 4 SE" : "FAILURES");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point process simulation and testing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lamp::kVersion);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate one event sequence CSV");
  c_sim->add_option("--config", sim.config_path, "JSON simulation config");
  c_sim->add_option("--s-star", sim.s_star, "baseline intensity (default 1)");
  c_sim->add_option("--T,--horizon", sim.horizon, "observation horizon");
  c_sim->add_option("--seed", sim.seed, "RNG seed");
  c_sim->add_option("--amplitude", sim.amplitude,
                    "kernel multiplier (default 1 with --kernel)");
  c_sim->add_option("--kernel", sim.kernel_spec,
                    "kernel spec, e.g. exponential:0.5,0.5 or boxcar:1,5");
  c_sim->add_option("-o,--output", sim.output, "output CSV path");

  StatArgs stat;
  auto* c_stat =
      app.add_subcommand("stat", "evaluate one statistic from an event CSV");
  c_stat->add_option("--family", stat.family, "param|dep|nonparam|loglr")
      ->required();
  c_stat->add_option("--input", stat.input, "event CSV (X)")->required();
  c_stat->add_option("--input-y", stat.input_y, "event CSV (Y, dep family)");
  c_stat->add_option("--kernel", stat.kernel_spec, "kernel spec");
  c_stat->add_option("--s-star", stat.s_star, "baseline intensity / S_X");
  c_stat->add_option("--s-y", stat.s_y, "S_Y (dep family)");
  c_stat->add_option("--amplitude", stat.amplitude, "amplitude (loglr)");

  ExperimentArgs size_args, power_args, thr_args;
  auto* c_size = app.add_subcommand("size", "empirical test size over horizons");
  auto* c_power = app.add_subcommand("power", "empirical power over a grid");
  auto* c_thr =
      app.add_subcommand("threshold", "empirical H0 quantiles over an eps grid");
  const auto add_common = [](CLI::App* c, ExperimentArgs& a,
                             const char* default_out) {
    a.output = default_out;
    c->add_option("--config", a.config_path, "JSON experiment config");
    c->add_option("-o,--output", a.output, "output CSV path");
    c->add_option("--seed", a.seed, "override master seed");
    c->add_option("-M,--replicates", a.replicates, "override replicate count");
    c->add_option("--eps", a.eps, "override nominal size");
  };
  add_common(c_size, size_args, "size.csv");
  add_common(c_power, power_args, "power.csv");
  add_common(c_thr, thr_args, "threshold.csv");
  c_power->add_flag("--limit", power_args.limit_only,
                    "emit the closed-form limiting curve only");

  FigureArgs fig;
  auto* c_fig = app.add_subcommand("figure", "run a study-figure preset");
  c_fig->add_option("name", fig.name, "fig1..fig6")->required();
  c_fig->add_option("--scale", fig.scale, "desk|paper (default desk)");
  c_fig->add_option("-o,--outdir", fig.outdir, "output directory");
  c_fig->add_option("--seed", fig.seed, "override master seed");

  Lemma1Args lem;
  auto* c_lem = app.add_subcommand(
      "lemma1-check", "verify the covariance identity against Monte Carlo");
  c_lem->add_option("--cases", lem.cases, "number of randomized cases");
  c_lem->add_option("--mc", lem.mc, "Monte-Carlo replicates per case");
  c_lem->add_option("--seed", lem.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_stat->parsed()) return run_stat(stat);
    if (c_size->parsed())
      return run_experiment_cmd(lamp::ExperimentKind::Size, size_args);
    if (c_power->parsed())
      return run_experiment_cmd(lamp::ExperimentKind::Power, power_args);
    if (c_thr->parsed())
      return run_experiment_cmd(lamp::ExperimentKind::Threshold, thr_args);
    if (c_fig->parsed()) return run_figure(fig);
    if (c_lem->parsed()) return run_lemma1(lem);
  } catch (const lamp::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
