#pragma once

#include <algorithm>
#include <cmath>

#include "lsl/errors.hpp"
#include "lsl/vec.hpp"

namespace lsl {

// Box or ball domain with closed-form distance to the boundary.
struct DomainSpec {
  enum class Kind { box, ball };

  int dim = 2;
  Kind kind = Kind::box;
  Vec lower = vec0();   // box
  Vec upper = vec0();   // box
  Vec center = vec0();  // ball
  double radius = 0;    // ball

  static DomainSpec make_box(int dim, const Vec& lower, const Vec& upper) {
    DomainSpec d;
    d.dim = dim;
    d.kind = Kind::box;
    d.lower = lower;
    d.upper = upper;
    for (int i = 0; i < dim; ++i)
      if (!(lower[i] < upper[i])) throw ValidationError("box domain needs lower < upper");
    return d;
  }

  static DomainSpec unit_box(int dim) {
    Vec lo = vec0(), hi = vec0();
    for (int i = 0; i < dim; ++i) hi[i] = 1.0;
    return make_box(dim, lo, hi);
  }

  static DomainSpec make_ball(int dim, const Vec& center, double radius) {
    DomainSpec d;
    d.dim = dim;
    d.kind = Kind::ball;
    d.center = center;
    d.radius = radius;
    if (!(radius > 0)) throw ValidationError("ball domain needs radius > 0");
    return d;
  }

  // Signed depth: > 0 strictly inside, 0 on the boundary, < 0 outside.
  // For the ball this equals the signed distance; for the box it is the
  // min face margin inside and minus the Euclidean distance outside.
  double inside_depth(const Vec& x) const {
    if (kind == Kind::ball) return radius - norm(sub(x, center, dim), dim);
    double inside = 1e300;
    double out2 = 0;
    bool outside = false;
    for (int i = 0; i < dim; ++i) {
      inside = std::min(inside, std::min(x[i] - lower[i], upper[i] - x[i]));
      double e = std::max(lower[i] - x[i], x[i] - upper[i]);
      if (e > 0) {
        outside = true;
        out2 += e * e;
      }
    }
    return outside ? -std::sqrt(out2) : inside;
  }

  // Distance from x to the boundary surface (valid inside and outside).
  double boundary_distance(const Vec& x) const {
    if (kind == Kind::ball) return std::abs(inside_depth(x));
    double depth = inside_depth(x);
    if (depth <= 0) return -depth;
    return depth;  // inside a box the nearest boundary point is on a face
  }

  bool contains(const Vec& x, double tol = 0.0) const { return inside_depth(x) >= -tol; }

  bool on_boundary(const Vec& x, double tol = 1e-9) const {
    return std::abs(inside_depth(x)) <= tol;
  }

  // Project a point that overshot the closed domain back onto it.
  Vec clamp(const Vec& x) const {
    Vec r = x;
    if (kind == Kind::box) {
      for (int i = 0; i < dim; ++i) r[i] = std::clamp(r[i], lower[i], upper[i]);
    } else {
      Vec u = sub(x, center, dim);
      double n = norm(u, dim);
      if (n > radius && n > 0) r = add(center, scale(radius / n, u, dim), dim);
    }
    return r;
  }

  Vec bounding_lower() const {
    if (kind == Kind::box) return lower;
    Vec r = vec0();
    for (int i = 0; i < dim; ++i) r[i] = center[i] - radius;
    return r;
  }

  Vec bounding_upper() const {
    if (kind == Kind::box) return upper;
    Vec r = vec0();
    for (int i = 0; i < dim; ++i) r[i] = center[i] + radius;
    return r;
  }
};

}  // namespace lsl
