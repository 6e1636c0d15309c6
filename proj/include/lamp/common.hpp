#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace lamp {

// Filesystem-level failure (open/create/write). Kept distinct from
// std::invalid_argument so the CLI can map the two to different exit codes.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// printf-%g formatting with a fixed digit count; all file output goes through
// here so reruns are byte-reproducible.
inline std::string format_g(double x, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, x);
  return buf;
}

}  // namespace detail
}  // namespace lamp
