// util.hpp — deterministic seed derivation, config hashing, and stable
// floating-point formatting shared by the estimators and the CSV writers.

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace thlab {

// splitmix64; used to derive independent per-cell seeds from one run seed so
// results do not depend on thread scheduling.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 1));
}

// FNV-1a, 64-bit; stable across platforms, used for config hashes in artifact
// headers.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shortest-round-trip-ish decimal form: %.17g is byte-stable for a given
// value, which the reproducibility contract needs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace thlab
