#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "lamp/common.hpp"

namespace lamp {

// Sample path of a point process on (0, horizon]: strictly increasing event
// times. X_t counts events strictly before t.
struct EventSequence {
  std::vector<double> times;
  double horizon = 0.0;

  std::size_t size() const { return times.size(); }

  std::size_t count_before(double t) const {
    return static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), t) - times.begin());
  }
};

inline void validate(const EventSequence& seq) {
  if (!(seq.horizon > 0.0) || !std::isfinite(seq.horizon))
    throw std::invalid_argument("event sequence: horizon must be positive and finite");
  double prev = 0.0;
  for (double t : seq.times) {
    if (!std::isfinite(t) || !(t > prev))
      throw std::invalid_argument(
          "event sequence: times must be finite, strictly increasing and > 0");
    if (t > seq.horizon)
      throw std::invalid_argument("event sequence: event time beyond horizon");
    prev = t;
  }
}

inline EventSequence make_sequence(std::vector<double> times, double horizon) {
  EventSequence s{std::move(times), horizon};
  validate(s);
  return s;
}

// CSV layout: `# horizon=<T>` metadata line, `t` header, one time per row.
// Times are printed with 17 significant digits so write/read round-trips
// are bit exact.
inline void write_events_csv(const std::string& path, const EventSequence& seq) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output file: " + path);
  out << "# horizon=" << detail::format_g(seq.horizon, 17) << "\n";
  out << "t\n";
  for (double t : seq.times) out << detail::format_g(t, 17) << "\n";
  out.flush();
  if (!out) throw io_error("write failed: " + path);
}

inline EventSequence read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open input file: " + path);
  std::vector<double> ts;
  double horizon = -1.0;
  bool seen_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("horizon=");
      if (pos != std::string::npos) {
        const char* s = line.c_str() + pos + 8;
        char* end = nullptr;
        horizon = std::strtod(s, &end);
        if (end == s)
          throw std::invalid_argument(path + ": bad horizon metadata on line " +
                                      std::to_string(lineno));
      }
      continue;
    }
    if (!seen_header) {
      if (line != "t")
        throw std::invalid_argument(path + ": expected header 't' on line " +
                                    std::to_string(lineno));
      seen_header = true;
      continue;
    }
    const char* s = line.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
      throw std::invalid_argument(path + ": bad event time on line " +
                                  std::to_string(lineno));
    ts.push_back(v);
  }
  if (horizon < 0.0)
    throw std::invalid_argument(path + ": missing '# horizon=' metadata line");
  if (!seen_header)
    throw std::invalid_argument(path + ": missing 't' header line");
  return make_sequence(std::move(ts), horizon);
}

}  // namespace lamp
