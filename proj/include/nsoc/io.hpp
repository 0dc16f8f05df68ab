#pragma once

// Small I/O helpers shared by the trajectory/report writers: deterministic
// number formatting (round-trip precision, no locale) and a config hash.

#include <cstdint>
#include <cstdio>
#include <string>

namespace nsoc::io {

// Shortest representation that round-trips a double exactly.
inline std::string fmt(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return std::string(buf);
}

// FNV-1a 64-bit, used to tag artifacts with the configuration they came from.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace nsoc::io
