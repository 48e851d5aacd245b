#pragma once

#include <cmath>

#include "lsl/errors.hpp"

namespace lsl {

namespace quintic {

// 6s^5 - 15s^4 + 10s^3 rising from 0 to 1 on [0,1]; C^2 at both ends.
inline double rise(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
inline double rise_d1(double s) { return 30.0 * s * s * (1.0 + s * (-2.0 + s)); }
inline double rise_d2(double s) { return 60.0 * s * (1.0 + s * (-3.0 + 2.0 * s)); }

}  // namespace quintic

// C^2 monotone transition: 1 for r <= a, 0 for r >= b.
inline double smoothstep(double a, double b, double r) {
  if (!(a < b)) throw ValidationError("smoothstep needs a < b");
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  return 1.0 - quintic::rise((r - a) / (b - a));
}

inline double smoothstep_d1(double a, double b, double r) {
  if (!(a < b)) throw ValidationError("smoothstep needs a < b");
  if (r <= a || r >= b) return 0.0;
  return -quintic::rise_d1((r - a) / (b - a)) / (b - a);
}

inline double smoothstep_d2(double a, double b, double r) {
  if (!(a < b)) throw ValidationError("smoothstep needs a < b");
  if (r <= a || r >= b) return 0.0;
  double w = b - a;
  return -quintic::rise_d2((r - a) / w) / (w * w);
}

}  // namespace lsl
