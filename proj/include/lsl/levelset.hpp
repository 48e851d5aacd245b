#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "lsl/errors.hpp"
#include "lsl/vec.hpp"

namespace lsl {

// Initial level-set data with analytic gradient.
struct LevelSetModel {
  std::string id;
  int dim = 2;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
};

// Signed distance to a circle (2D) / sphere (3D).
inline LevelSetModel circle_levelset(int dim, const Vec& center, double radius) {
  if (!(radius > 0)) throw ValidationError("circle_levelset needs radius > 0");
  LevelSetModel m;
  m.id = (dim == 2) ? "circle" : "sphere";
  m.dim = dim;
  m.eval = [center, radius, dim](const Vec& x) { return norm(sub(x, center, dim), dim) - radius; };
  m.grad = [center, dim](const Vec& x) {
    Vec u = sub(x, center, dim);
    double n = norm(u, dim);
    if (n < 1e-300) return vec0();
    return scale(1.0 / n, u, dim);
  };
  return m;
}

// Normalized quadric sum((x_i-c_i)/a_i)^2 - 1; not a distance function.
inline LevelSetModel ellipse_levelset(int dim, const Vec& center, const Vec& axes) {
  for (int i = 0; i < dim; ++i)
    if (!(axes[i] > 0)) throw ValidationError("ellipse_levelset needs positive semi-axes");
  LevelSetModel m;
  m.id = "ellipse";
  m.dim = dim;
  m.eval = [center, axes, dim](const Vec& x) {
    double s = -1.0;
    for (int i = 0; i < dim; ++i) {
      double u = (x[i] - center[i]) / axes[i];
      s += u * u;
    }
    return s;
  };
  m.grad = [center, axes, dim](const Vec& x) {
    Vec g = vec0();
    for (int i = 0; i < dim; ++i) g[i] = 2.0 * (x[i] - center[i]) / (axes[i] * axes[i]);
    return g;
  };
  return m;
}

inline LevelSetModel affine_levelset(int dim, const Vec& normal, double offset) {
  if (norm(normal, dim) < 1e-300) throw ValidationError("affine_levelset needs normal != 0");
  LevelSetModel m;
  m.id = "affine";
  m.dim = dim;
  m.eval = [normal, offset, dim](const Vec& x) { return dot(normal, x, dim) + offset; };
  m.grad = [normal](const Vec&) { return normal; };
  return m;
}

// m*tanh(f/m): same zero set and same gradient on it, but values capped at
// +-m so that far-field magnitudes (and hence grid time steps) stay small.
inline LevelSetModel saturate(LevelSetModel base, double m) {
  if (!(m > 0)) throw ValidationError("saturate needs m > 0");
  LevelSetModel out;
  out.id = base.id + "-sat";
  out.dim = base.dim;
  auto b = std::make_shared<LevelSetModel>(std::move(base));
  out.eval = [b, m](const Vec& x) { return m * std::tanh(b->eval(x) / m); };
  out.grad = [b, m](const Vec& x) {
    double th = std::tanh(b->eval(x) / m);
    return scale(1.0 - th * th, b->grad(x), b->dim);
  };
  return out;
}

}  // namespace lsl
