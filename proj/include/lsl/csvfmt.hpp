#pragma once

#include <cstdio>
#include <string>

namespace lsl {

// Shortest round-trippable decimal form; used for all numeric file output so
// that identical runs produce bitwise-identical artifacts.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace lsl
