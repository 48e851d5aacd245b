#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lsl/domain.hpp"
#include "lsl/vec.hpp"

namespace lsl {

// Analytic velocity field v(t,x) = time_factor(t) * spatial(x), with exact
// Jacobian and second derivatives. All builtin fields are of this separable
// form, which lets grid solvers cache the spatial parts.
struct VelocityFieldModel {
  std::string id;
  int dim = 2;
  double lipschitz_bound = 0;  // sup over (t,x) of |dv_i/dx_j|

  std::function<Vec(const Vec&)> spatial_eval;
  std::function<Mat(const Vec&)> spatial_jacobian;
  std::function<Ten(const Vec&)> spatial_second;
  std::function<double(double)> time_factor;  // empty means identically 1

  double tf(double t) const { return time_factor ? time_factor(t) : 1.0; }

  Vec eval(double t, const Vec& x) const { return scale(tf(t), spatial_eval(x), dim); }

  Mat jacobian(double t, const Vec& x) const {
    Mat j = spatial_jacobian(x);
    double g = tf(t);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) j[i][k] *= g;
    return j;
  }

  Ten second_derivs(double t, const Vec& x) const {
    Ten s = spatial_second(x);
    double g = tf(t);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) s[i][j][k] *= g;
    return s;
  }
};

VelocityFieldModel zero_field(int dim);

// Rigid rotation with angular rate omega about `center` (2D) / the z-axis
// through `center` (3D). Tangent to ball boundaries centered at `center`.
VelocityFieldModel rotation_field(int dim, const Vec& center, double omega);

// Rigid rotation times a radial C^2 bump: full strength for |x-center| <= r0,
// zero for |x-center| >= r1, so the field vanishes near the box boundary.
VelocityFieldModel rotation_bump_field(int dim, const Vec& center, double omega, double r0,
                                       double r1);

// Single-vortex box field u = -A sin^2(pi x) sin(2 pi y), w = A sin^2(pi y) sin(2 pi x),
// optionally multiplied by cos(pi t / period) (period <= 0 means steady).
VelocityFieldModel vortex_field_2d(double amplitude, double period);

// 3D deformation-field analogue of the single vortex.
VelocityFieldModel vortex_field_3d(double amplitude, double period);

// Shear pattern u = gamma sin^2(pi x) sin(2 pi y) (1,0,...) tangent on the unit box.
VelocityFieldModel shear_field(int dim, double gamma);

// Outward radial field v = x - center; deliberately violates subtangentiality
// on ball boundaries. Not part of the builtin registry.
VelocityFieldModel broken_radial_field(int dim, const Vec& center);

// Registry of fields satisfying the flow-invariance hypotheses on their
// natural domains (unit box for all of them).
std::vector<VelocityFieldModel> builtin_fields(int dim);

}  // namespace lsl
