#include "lsl/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lsl/errors.hpp"

namespace lsl {

namespace {

constexpr double kDegenerateP = 1e-12;   // |p| below which grad_preserving H is undefined
constexpr double kAbortP = 1e-10;        // integration abort threshold
constexpr double kFdStep = 1e-6;

// <D(v) phat, phat> = <J phat, phat> by symmetry of the quadratic form.
double normal_stretch(const Mat& j, const Vec& phat, int d) { return bilinear(j, phat, phat, d); }

Vec dtilde(const Ten& t2, const Vec& phat, int d) {
  Vec g = vec0();
  for (int k = 0; k < d; ++k) {
    double s = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += t2[i][j][k] * phat[i] * phat[j];
    g[k] = s;
  }
  return g;
}

double dh_dphi(const SourceMode& mode, const VelocityFieldModel& field, double t, const Vec& x,
               const Vec& p) {
  const int d = field.dim;
  switch (mode.kind) {
    case SourceKind::linear_transport: return 0.0;
    case SourceKind::grad_preserving: {
      double pn = norm(p, d);
      if (pn <= kDegenerateP) throw DegenerateGradient("grad_preserving needs |p| > 1e-12");
      Vec phat = scale(1.0 / pn, p, d);
      return -normal_stretch(field.jacobian(t, x), phat, d);
    }
    case SourceKind::grad_bounding: return -(mode.beta - norm(p, d));
  }
  return 0.0;
}

}  // namespace

SourceMode SourceMode::grad_bounding(double beta) {
  if (!(beta > 0)) throw ValidationError("grad_bounding needs beta > 0");
  return {SourceKind::grad_bounding, beta};
}

double hamiltonian(const SourceMode& mode, const VelocityFieldModel& field, double t, const Vec& x,
                   const Vec& p, double phi) {
  const int d = field.dim;
  double vp = dot(field.eval(t, x), p, d);
  switch (mode.kind) {
    case SourceKind::linear_transport: return vp;
    case SourceKind::grad_preserving: {
      double pn = norm(p, d);
      if (pn <= kDegenerateP) throw DegenerateGradient("grad_preserving needs |p| > 1e-12");
      Vec phat = scale(1.0 / pn, p, d);
      return vp - phi * normal_stretch(field.jacobian(t, x), phat, d);
    }
    case SourceKind::grad_bounding: return vp - phi * (mode.beta - norm(p, d));
  }
  return vp;
}

CharacteristicState characteristic_rhs(const SourceMode& mode, const VelocityFieldModel& field,
                                       double t, const CharacteristicState& s) {
  const int d = field.dim;
  CharacteristicState out;
  Vec v = field.eval(t, s.x);
  Mat j = field.jacobian(t, s.x);

  switch (mode.kind) {
    case SourceKind::linear_transport:
      out.x = v;
      out.p = scale(-1.0, mattvec(j, s.p, d), d);
      out.phi = 0;
      break;
    case SourceKind::grad_preserving: {
      double pn = norm(s.p, d);
      if (pn <= kDegenerateP) throw DegenerateGradient("grad_preserving needs |p| > 1e-12");
      Vec phat = scale(1.0 / pn, s.p, d);
      Mat dsym = symmetrize(j, d);
      Vec dp = matvec(dsym, phat, d);
      double a = dot(dp, phat, d);
      out.x = add(v, scale(-2.0 * s.phi / pn, sub(dp, scale(a, phat, d), d), d), d);
      out.p = add(add(scale(-1.0, mattvec(j, s.p, d), d), scale(a, s.p, d), d),
                  scale(s.phi, dtilde(field.second_derivs(t, s.x), phat, d), d), d);
      out.phi = s.phi * a;
      break;
    }
    case SourceKind::grad_bounding: {
      double pn = norm(s.p, d);
      Vec phat = pn > 1e-14 ? scale(1.0 / pn, s.p, d) : vec0();
      out.x = add(v, scale(s.phi, phat, d), d);
      out.p = add(scale(-1.0, mattvec(j, s.p, d), d), scale(mode.beta - pn, s.p, d), d);
      out.phi = mode.beta * s.phi;
      break;
    }
  }
  return out;
}

MarkerTrajectory integrate_characteristic(const SourceMode& mode, const VelocityFieldModel& field,
                                          const CharacteristicState& state0, double t0, double t1,
                                          const OdeOptions& opts, bool with_variational,
                                          std::vector<double> output_times,
                                          const VariationalState* state0_var,
                                          const double* residual0) {
  if (!(t1 > t0)) throw ValidationError("integrate_characteristic needs t1 > t0");
  const int d = field.dim;
  const int base = 2 * d + 1;  // x, p, phi
  const int col = base;        // one tangent column per xi-direction
  const int total = base + 1 + (with_variational ? d * col : 0);

  if (output_times.empty()) output_times = {t0, t1};
  std::sort(output_times.begin(), output_times.end());
  for (double t : output_times)
    if (t < t0 || t > t1) throw ValidationError("output time outside [t0, t1]");

  auto unpack = [d](const std::vector<double>& y) {
    CharacteristicState s;
    for (int i = 0; i < d; ++i) s.x[i] = y[i];
    for (int i = 0; i < d; ++i) s.p[i] = y[d + i];
    s.phi = y[2 * d];
    return s;
  };
  auto base_rhs = [&](double t, const std::vector<double>& y, std::vector<double>* dy) {
    CharacteristicState ds = characteristic_rhs(mode, field, t, unpack(y));
    for (int i = 0; i < d; ++i) (*dy)[i] = ds.x[i];
    for (int i = 0; i < d; ++i) (*dy)[d + i] = ds.p[i];
    (*dy)[2 * d] = ds.phi;
  };

  std::vector<double> yp(base), ym(base), dp(base), dm(base);
  auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
    base_rhs(t, y, &dy);
    // q' = -dH/dt - (dH/dPhi) q
    CharacteristicState s = unpack(y);
    double hp = hamiltonian(mode, field, t + kFdStep, s.x, s.p, s.phi);
    double hm = hamiltonian(mode, field, t - kFdStep, s.x, s.p, s.phi);
    dy[base] = -(hp - hm) / (2 * kFdStep) - dh_dphi(mode, field, t, s.x, s.p) * y[base];
    if (!with_variational) return;
    for (int c = 0; c < d; ++c) {
      const double* w = y.data() + base + 1 + c * col;
      double wn = 0;
      for (int i = 0; i < col; ++i) wn += w[i] * w[i];
      wn = std::sqrt(wn);
      double* out = dy.data() + base + 1 + c * col;
      if (wn < 1e-300) {
        std::fill(out, out + col, 0.0);
        continue;
      }
      double delta = kFdStep;
      for (int i = 0; i < col; ++i) {
        yp[i] = y[i] + delta * w[i] / wn;
        ym[i] = y[i] - delta * w[i] / wn;
      }
      base_rhs(t, yp, &dp);
      base_rhs(t, ym, &dm);
      for (int i = 0; i < col; ++i) out[i] = (dp[i] - dm[i]) * wn / (2 * delta);
    }
  };

  std::vector<double> y(total, 0.0);
  for (int i = 0; i < d; ++i) y[i] = state0.x[i];
  for (int i = 0; i < d; ++i) y[d + i] = state0.p[i];
  y[2 * d] = state0.phi;
  y[base] = residual0 ? *residual0
                      : -hamiltonian(mode, field, t0, state0.x, state0.p, state0.phi);
  VariationalState v0;
  if (with_variational) {
    if (state0_var) {
      v0 = *state0_var;
    } else {
      for (int i = 0; i < d; ++i) v0.dx_dxi[i][i] = 1.0;
      v0.dphi_dxi = state0.p;
    }
    for (int c = 0; c < d; ++c) {
      double* w = y.data() + base + 1 + c * col;
      for (int i = 0; i < d; ++i) w[i] = v0.dx_dxi[i][c];
      for (int i = 0; i < d; ++i) w[d + i] = v0.dp_dxi[i][c];
      w[2 * d] = v0.dphi_dxi[c];
    }
  }

  MarkerTrajectory traj;
  traj.xi0 = state0.x;
  traj.on_interface = std::abs(state0.phi) <= 1e-12;

  auto extract_var = [&](const std::vector<double>& yy) {
    VariationalState vs;
    for (int c = 0; c < d; ++c) {
      const double* w = yy.data() + base + 1 + c * col;
      for (int i = 0; i < d; ++i) vs.dx_dxi[i][c] = w[i];
      for (int i = 0; i < d; ++i) vs.dp_dxi[i][c] = w[d + i];
      vs.dphi_dxi[c] = w[2 * d];
    }
    return vs;
  };
  auto record = [&](double t, const std::vector<double>& yy) {
    traj.times.push_back(t);
    traj.states.push_back(unpack(yy));
    traj.residual.push_back(yy[base]);
    if (with_variational) {
      VariationalState vs = extract_var(yy);
      traj.variational.push_back(vs);
      traj.det_dx_dxi.push_back(det(vs.dx_dxi, d));
    }
  };
  auto guard = [&](double t, std::vector<double>& yy) {
    if (mode.kind == SourceKind::grad_preserving) {
      double pn = 0;
      for (int i = 0; i < d; ++i) pn += yy[d + i] * yy[d + i];
      if (std::sqrt(pn) < kAbortP)
        throw DegenerateGradient("|p| collapsed below 1e-10 at t=" + std::to_string(t));
    }
    if (with_variational && det(extract_var(yy).dx_dxi, d) <= 0.0)
      throw TubeDegenerate("det(dx/dxi) <= 0 at t=" + std::to_string(t));
  };

  double cur = t0;
  if (!output_times.empty() && output_times.front() == t0) record(t0, y);
  for (double t : output_times) {
    if (t <= cur) continue;
    integrate_ode(rhs, y, cur, t, opts, guard);
    cur = t;
    record(t, y);
  }
  return traj;
}

double estimate_alpha(const VelocityFieldModel& field, const DomainSpec& domain, double t_max,
                      int samples) {
  if (samples <= 0) throw ValidationError("estimate_alpha needs samples > 0");
  const int d = field.dim;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vec lo = domain.bounding_lower(), hi = domain.bounding_upper();
  double worst = 0;
  int accepted = 0;
  while (accepted < samples) {
    Vec x = vec0();
    for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * uni(rng);
    if (!domain.contains(x)) continue;
    double t = t_max * uni(rng);
    worst = std::max(worst, spectral_radius_sym(symmetrize(field.jacobian(t, x), d), d));
    ++accepted;
  }
  return 1.1 * worst;
}

double estimate_tstar(double v4) {
  if (v4 < 0) throw ValidationError("estimate_tstar needs V4 >= 0");
  // positive root of 3a + 6a^2 + 6a^3 = 1
  double lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    double a = 0.5 * (lo + hi);
    (3 * a + 6 * a * a + 6 * a * a * a < 1.0 ? lo : hi) = a;
  }
  double astar = 0.5 * (lo + hi);
  if (v4 == 0) return 1.0;
  return std::min(1.0, 0.9 * astar / (2 * v4));
}

}  // namespace lsl
