#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace lamp {

// FNV-1a over raw bytes. Statistic values and experiment CSVs carry one of
// these as an input fingerprint so results stay auditable.
class Digest {
 public:
  void mix_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001B3ull;
    }
  }
  void mix(double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof(u));
    mix_bytes(&u, sizeof(u));
  }
  void mix(std::uint64_t u) { mix_bytes(&u, sizeof(u)); }
  void mix(std::string_view s) { mix_bytes(s.data(), s.size()); }
  void mix(const std::vector<double>& v) {
    for (double x : v) mix(x);
  }

  std::uint64_t value() const { return h_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

}  // namespace lamp
