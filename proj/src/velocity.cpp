#include "lsl/velocity.hpp"

#include <cmath>
#include <memory>

#include "lsl/errors.hpp"
#include "lsl/smoothstep.hpp"

namespace lsl {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Univariate factor types for product-form trig fields.
enum class Fac { one, sin_sq, sin_2pi };

double fac_val(Fac f, double a) {
  switch (f) {
    case Fac::one: return 1.0;
    case Fac::sin_sq: { double s = std::sin(kPi * a); return s * s; }
    case Fac::sin_2pi: return std::sin(2 * kPi * a);
  }
  return 0;
}

double fac_d1(Fac f, double a) {
  switch (f) {
    case Fac::one: return 0.0;
    case Fac::sin_sq: return kPi * std::sin(2 * kPi * a);
    case Fac::sin_2pi: return 2 * kPi * std::cos(2 * kPi * a);
  }
  return 0;
}

double fac_d2(Fac f, double a) {
  switch (f) {
    case Fac::one: return 0.0;
    case Fac::sin_sq: return 2 * kPi * kPi * std::cos(2 * kPi * a);
    case Fac::sin_2pi: return -4 * kPi * kPi * std::sin(2 * kPi * a);
  }
  return 0;
}

struct TrigComponent {
  double coef = 0;
  Fac fac[3] = {Fac::one, Fac::one, Fac::one};
};

// v_i(x) = coef_i * f_i0(x0) f_i1(x1) f_i2(x2); derivatives by product rule.
VelocityFieldModel trig_product_field(std::string id, int dim,
                                      std::vector<TrigComponent> comps, double period) {
  VelocityFieldModel m;
  m.id = std::move(id);
  m.dim = dim;
  auto cs = std::make_shared<std::vector<TrigComponent>>(std::move(comps));

  m.spatial_eval = [cs, dim](const Vec& x) {
    Vec v = vec0();
    for (int i = 0; i < dim; ++i) {
      double p = (*cs)[i].coef;
      for (int a = 0; a < dim; ++a) p *= fac_val((*cs)[i].fac[a], x[a]);
      v[i] = p;
    }
    return v;
  };
  m.spatial_jacobian = [cs, dim](const Vec& x) {
    Mat j = mat0();
    for (int i = 0; i < dim; ++i) {
      double f[3], d1[3];
      for (int a = 0; a < dim; ++a) {
        f[a] = fac_val((*cs)[i].fac[a], x[a]);
        d1[a] = fac_d1((*cs)[i].fac[a], x[a]);
      }
      for (int k = 0; k < dim; ++k) {
        double p = (*cs)[i].coef;
        for (int a = 0; a < dim; ++a) p *= (a == k) ? d1[a] : f[a];
        j[i][k] = p;
      }
    }
    return j;
  };
  m.spatial_second = [cs, dim](const Vec& x) {
    Ten t = ten0();
    for (int i = 0; i < dim; ++i) {
      double f[3], d1[3], d2[3];
      for (int a = 0; a < dim; ++a) {
        f[a] = fac_val((*cs)[i].fac[a], x[a]);
        d1[a] = fac_d1((*cs)[i].fac[a], x[a]);
        d2[a] = fac_d2((*cs)[i].fac[a], x[a]);
      }
      for (int j = 0; j < dim; ++j)
        for (int k = j; k < dim; ++k) {
          double p = (*cs)[i].coef;
          for (int a = 0; a < dim; ++a) {
            if (a == j && a == k) p *= d2[a];
            else if (a == j || a == k) p *= d1[a];
            else p *= f[a];
          }
          t[i][j][k] = p;
          t[i][k][j] = p;
        }
    }
    return t;
  };
  if (period > 0) {
    double T = period;
    m.time_factor = [T](double t) { return std::cos(kPi * t / T); };
  }
  return m;
}

// Deterministic sup |dv_i/dx_j| estimate over the unit box.
double sample_lipschitz(const VelocityFieldModel& m, const Vec& lo, const Vec& hi) {
  double bound = 0;
  int n = (m.dim == 2) ? 64 : 24;
  Vec x = vec0();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      int kmax = (m.dim == 3) ? n : 0;
      for (int k = 0; k <= kmax; ++k) {
        x[0] = lo[0] + (hi[0] - lo[0]) * i / n;
        x[1] = lo[1] + (hi[1] - lo[1]) * j / n;
        if (m.dim == 3) x[2] = lo[2] + (hi[2] - lo[2]) * k / n;
        Mat J = m.spatial_jacobian(x);
        for (int a = 0; a < m.dim; ++a)
          for (int b = 0; b < m.dim; ++b) bound = std::max(bound, std::abs(J[a][b]));
      }
    }
  return bound;
}

Mat rotation_generator(int dim) {
  Mat e = mat0();
  e[0][1] = -1;
  e[1][0] = 1;
  (void)dim;
  return e;
}

}  // namespace

VelocityFieldModel zero_field(int dim) {
  VelocityFieldModel m;
  m.id = "zero";
  m.dim = dim;
  m.lipschitz_bound = 0;
  m.spatial_eval = [](const Vec&) { return vec0(); };
  m.spatial_jacobian = [](const Vec&) { return mat0(); };
  m.spatial_second = [](const Vec&) { return ten0(); };
  return m;
}

VelocityFieldModel rotation_field(int dim, const Vec& center, double omega) {
  VelocityFieldModel m;
  m.id = "rotation";
  m.dim = dim;
  m.lipschitz_bound = std::abs(omega);
  Mat e = rotation_generator(dim);
  m.spatial_eval = [center, omega, e, dim](const Vec& x) {
    return scale(omega, matvec(e, sub(x, center, dim), dim), dim);
  };
  m.spatial_jacobian = [omega, e, dim](const Vec&) {
    Mat j = mat0();
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) j[i][k] = omega * e[i][k];
    return j;
  };
  m.spatial_second = [](const Vec&) { return ten0(); };
  return m;
}

VelocityFieldModel rotation_bump_field(int dim, const Vec& center, double omega, double r0,
                                       double r1) {
  if (!(0 < r0 && r0 < r1)) throw ValidationError("rotation_bump_field needs 0 < r0 < r1");
  VelocityFieldModel m;
  m.id = "rotation-bump";
  m.dim = dim;
  Mat e = rotation_generator(dim);
  double s0 = r0 * r0, s1 = r1 * r1;

  m.spatial_eval = [=](const Vec& x) {
    Vec u = sub(x, center, dim);
    double b = smoothstep(s0, s1, dot(u, u, dim));
    return scale(omega * b, matvec(e, u, dim), dim);
  };
  m.spatial_jacobian = [=](const Vec& x) {
    Vec u = sub(x, center, dim);
    double s = dot(u, u, dim);
    double b = smoothstep(s0, s1, s), db = smoothstep_d1(s0, s1, s);
    Vec eu = matvec(e, u, dim);
    Mat j = mat0();
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k)
        j[i][k] = omega * (2.0 * db * u[k] * eu[i] + b * e[i][k]);
    return j;
  };
  m.spatial_second = [=](const Vec& x) {
    Vec u = sub(x, center, dim);
    double s = dot(u, u, dim);
    double db = smoothstep_d1(s0, s1, s), d2b = smoothstep_d2(s0, s1, s);
    Vec eu = matvec(e, u, dim);
    Ten t = ten0();
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double val = 4.0 * d2b * u[k] * u[l] * eu[i];
          if (k == l) val += 2.0 * db * eu[i];
          val += 2.0 * db * (u[k] * e[i][l] + u[l] * e[i][k]);
          t[i][k][l] = omega * val;
        }
    return t;
  };
  Vec lo = vec0(), hi = vec0();
  for (int i = 0; i < dim; ++i) {
    lo[i] = center[i] - r1;
    hi[i] = center[i] + r1;
  }
  m.lipschitz_bound = sample_lipschitz(m, lo, hi);
  return m;
}

VelocityFieldModel vortex_field_2d(double amplitude, double period) {
  std::vector<TrigComponent> c(2);
  c[0] = {-amplitude, {Fac::sin_sq, Fac::sin_2pi, Fac::one}};
  c[1] = {amplitude, {Fac::sin_2pi, Fac::sin_sq, Fac::one}};
  auto m = trig_product_field(period > 0 ? "vortex-reversal" : "vortex", 2, std::move(c), period);
  m.lipschitz_bound = 2 * kPi * std::abs(amplitude);
  return m;
}

VelocityFieldModel vortex_field_3d(double amplitude, double period) {
  std::vector<TrigComponent> c(3);
  c[0] = {2 * amplitude, {Fac::sin_sq, Fac::sin_2pi, Fac::sin_2pi}};
  c[1] = {-amplitude, {Fac::sin_2pi, Fac::sin_sq, Fac::sin_2pi}};
  c[2] = {-amplitude, {Fac::sin_2pi, Fac::sin_2pi, Fac::sin_sq}};
  auto m = trig_product_field(period > 0 ? "vortex3d-reversal" : "vortex3d", 3, std::move(c),
                              period);
  m.lipschitz_bound = 4 * kPi * std::abs(amplitude);
  return m;
}

VelocityFieldModel shear_field(int dim, double gamma) {
  std::vector<TrigComponent> c(dim);
  c[0] = {gamma, {Fac::sin_sq, Fac::sin_2pi, Fac::one}};
  for (int i = 1; i < dim; ++i) c[i] = {0.0, {Fac::one, Fac::one, Fac::one}};
  auto m = trig_product_field("shear", dim, std::move(c), 0);
  m.lipschitz_bound = 2 * kPi * std::abs(gamma);
  return m;
}

VelocityFieldModel broken_radial_field(int dim, const Vec& center) {
  VelocityFieldModel m;
  m.id = "radial-outward";
  m.dim = dim;
  m.lipschitz_bound = 1.0;
  m.spatial_eval = [center, dim](const Vec& x) { return sub(x, center, dim); };
  m.spatial_jacobian = [dim](const Vec&) {
    Mat j = mat0();
    for (int i = 0; i < dim; ++i) j[i][i] = 1.0;
    return j;
  };
  m.spatial_second = [](const Vec&) { return ten0(); };
  return m;
}

std::vector<VelocityFieldModel> builtin_fields(int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("builtin_fields: dimension must be 2 or 3");
  Vec c = vec0();
  for (int i = 0; i < dim; ++i) c[i] = 0.5;
  std::vector<VelocityFieldModel> fields;
  fields.push_back(zero_field(dim));
  fields.push_back(rotation_bump_field(dim, c, 1.0, 0.42, 0.49));
  if (dim == 2) {
    fields.push_back(vortex_field_2d(1.0, 0));
    fields.push_back(vortex_field_2d(1.0, 2.0));
  } else {
    fields.push_back(vortex_field_3d(0.5, 0));
    fields.push_back(vortex_field_3d(0.5, 1.0));
  }
  fields.push_back(shear_field(dim, 1.0));
  return fields;
}

}  // namespace lsl
