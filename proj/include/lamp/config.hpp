#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "lamp/common.hpp"
#include "lamp/digest.hpp"
#include "lamp/experiment.hpp"
#include "lamp/simulate.hpp"

namespace lamp {

// Kernel grammar in config files:
//   {"type":"exponential","alpha":...,"gamma":...}
//   {"type":"boxcar","r":...,"N":...}
//   {"type":"tabulated","knots":[...],"values":[...]}
inline Kernel kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("kernel spec: expected object with a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "exponential")
      return Kernel::exponential(j.at("alpha").get<double>(),
                                 j.at("gamma").get<double>());
    if (type == "boxcar")
      return Kernel::boxcar(j.at("r").get<double>(), j.at("N").get<double>());
    if (type == "tabulated")
      return Kernel::tabulated(j.at("knots").get<std::vector<double>>(),
                               j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("kernel spec: ") + e.what());
  }
  throw std::invalid_argument("kernel spec: unknown type '" + type + "'");
}

inline nlohmann::json kernel_to_json(const Kernel& k) {
  nlohmann::json j;
  if (const auto* e = k.as_exponential()) {
    j["type"] = "exponential";
    j["alpha"] = e->alpha;
    j["gamma"] = e->gamma;
  } else if (const auto* b = k.as_boxcar()) {
    j["type"] = "boxcar";
    j["r"] = b->mass;
    j["N"] = b->width;
  } else {
    const auto* t = k.as_tabulated();
    j["type"] = "tabulated";
    j["knots"] = t->knots;
    j["values"] = t->values;
  }
  return j;
}

namespace detail {

inline TestFamily family_from_string(const std::string& s) {
  if (s == "param") return TestFamily::Param;
  if (s == "dep") return TestFamily::Dep;
  if (s == "nonparam") return TestFamily::Nonparam;
  throw std::invalid_argument("config: unknown family '" + s +
                              "' (expected param|dep|nonparam)");
}

inline std::string family_to_string(TestFamily f) {
  switch (f) {
    case TestFamily::Param: return "param";
    case TestFamily::Dep: return "dep";
    case TestFamily::Nonparam: return "nonparam";
  }
  return "param";
}

inline ExperimentKind kind_from_string(const std::string& s) {
  if (s == "size") return ExperimentKind::Size;
  if (s == "power") return ExperimentKind::Power;
  if (s == "threshold") return ExperimentKind::Threshold;
  throw std::invalid_argument("config: unknown kind '" + s +
                              "' (expected size|power|threshold)");
}

inline std::string kind_to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Size: return "size";
    case ExperimentKind::Power: return "power";
    case ExperimentKind::Threshold: return "threshold";
  }
  return "power";
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("kind")) cfg.kind = detail::kind_from_string(j.at("kind"));
    if (j.contains("family"))
      cfg.family = detail::family_from_string(j.at("family"));
    if (j.contains("s_star")) cfg.s_star = j.at("s_star").get<double>();
    if (j.contains("s_y")) cfg.s_y = j.at("s_y").get<double>();
    if (j.contains("horizons"))
      cfg.horizons = j.at("horizons").get<std::vector<double>>();
    if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<long long>();
    if (j.contains("master_seed"))
      cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("kernel") && !j.at("kernel").is_null())
      cfg.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("grid")) cfg.grid = j.at("grid").get<std::vector<double>>();
    if (j.contains("eps")) cfg.eps = j.at("eps").get<double>();
    if (j.contains("N")) cfg.support_n = j.at("N").get<double>();
    if (j.contains("threshold_rule")) {
      const std::string r = j.at("threshold_rule").get<std::string>();
      if (r == "gaussian")
        cfg.rule = NonparamRule::Gaussian;
      else if (r == "exact")
        cfg.rule = NonparamRule::Exact;
      else
        throw std::invalid_argument(
            "config: threshold_rule must be gaussian|exact");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = detail::kind_to_string(cfg.kind);
  j["family"] = detail::family_to_string(cfg.family);
  j["s_star"] = cfg.s_star;
  j["s_y"] = cfg.s_y;
  j["horizons"] = cfg.horizons;
  j["replicates"] = effective_replicates(cfg);
  j["master_seed"] = cfg.master_seed;
  j["kernel"] = cfg.kernel ? kernel_to_json(*cfg.kernel) : nlohmann::json();
  j["grid"] = cfg.grid;
  j["eps"] = cfg.eps;
  j["N"] = cfg.support_n;
  j["threshold_rule"] =
      cfg.rule == NonparamRule::Exact ? "exact" : "gaussian";
  return j;
}

// Command-line shorthand: "exponential:0.5,0.5", "boxcar:1,5",
// "tabulated:0,1,2;0.4,0.2" (knots ; values).
inline Kernel kernel_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("kernel spec '" + spec +
                                "': expected type:params");
  const std::string type = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  const auto parse_list = [&](const std::string& s) {
    std::vector<double> out;
    const char* p = s.c_str();
    while (*p) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw std::invalid_argument("kernel spec '" + spec + "': bad number");
      out.push_back(v);
      p = end;
      if (*p == ',') ++p;
      else if (*p != '\0')
        throw std::invalid_argument("kernel spec '" + spec + "': bad separator");
    }
    return out;
  };
  if (type == "exponential" || type == "boxcar") {
    const auto v = parse_list(rest);
    if (v.size() != 2)
      throw std::invalid_argument("kernel spec '" + spec +
                                  "': expected two parameters");
    return type == "exponential" ? Kernel::exponential(v[0], v[1])
                                 : Kernel::boxcar(v[0], v[1]);
  }
  if (type == "tabulated") {
    const auto semi = rest.find(';');
    if (semi == std::string::npos)
      throw std::invalid_argument("kernel spec '" + spec +
                                  "': tabulated needs knots;values");
    return Kernel::tabulated(parse_list(rest.substr(0, semi)),
                             parse_list(rest.substr(semi + 1)));
  }
  throw std::invalid_argument("kernel spec '" + spec + "': unknown type '" +
                              type + "'");
}

// Simulation config file fields: s_star, horizon, seed, amplitude, kernel.
inline SimSpec simspec_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("simulate config: expected a JSON object");
  SimSpec spec;
  try {
    if (j.contains("s_star")) spec.s_star = j.at("s_star").get<double>();
    if (j.contains("horizon")) spec.horizon = j.at("horizon").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("kernel") && !j.at("kernel").is_null()) {
      spec.kernel = kernel_from_json(j.at("kernel"));
      spec.amplitude = 1.0;  // kernel taken literally unless amplitude is given
    }
    if (j.contains("amplitude")) spec.amplitude = j.at("amplitude").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("simulate config: ") + e.what());
  }
  return spec;
}

inline SimSpec load_simspec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return simspec_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return config_from_json(j);
}

// Fingerprint of the effective configuration; nlohmann orders keys, so the
// dump is canonical.
inline std::uint64_t config_digest(const ExperimentConfig& cfg) {
  Digest d;
  d.mix(config_to_json(cfg).dump());
  return d.value();
}

}  // namespace lamp
