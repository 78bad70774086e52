#pragma once

#include <cstdio>
#include <cstring>
#include <string>

namespace prost {

// Shortest round-trippable decimal form; used by every exporter so repeated
// runs with the same seed produce byte-identical files.
inline std::string fmt_double(double v) {
  char best[40];
  std::snprintf(best, sizeof(best), "%.17g", v);
  // Prefer the shortest representation that still round-trips.
  for (int precision = 1; precision < 17; ++precision) {
    char candidate[40];
    std::snprintf(candidate, sizeof(candidate), "%.*g", precision, v);
    double parsed = 0.0;
    std::sscanf(candidate, "%lf", &parsed);
    if (parsed == v && std::strlen(candidate) < std::strlen(best)) {
      std::memcpy(best, candidate, sizeof(candidate));
    }
  }
  return best;
}

}  // namespace prost
