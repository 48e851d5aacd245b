#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lsl/errors.hpp"

namespace lsl {

struct OdeOptions {
  enum class Method { rk4_fixed, rk45_adaptive };

  Method method = Method::rk4_fixed;
  double step = 1e-3;       // fixed-step size (time units)
  double abs_tol = 1e-9;    // adaptive
  double rel_tol = 1e-9;    // adaptive
  long max_steps = 50'000'000;

  void validate() const {
    if (!(step > 0)) throw ValidationError("ode step must be > 0");
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw ValidationError("ode tolerances must be > 0");
    if (!(max_steps > 0)) throw ValidationError("ode max_steps must be > 0");
  }
};

namespace detail {

template <class Rhs>
void rk4_step(Rhs&& rhs, double t, double h, std::vector<double>& y, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
  const std::size_t n = y.size();
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(t + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    y[i] += (h / 6.0) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

}  // namespace detail

// Integrates y' = rhs(t, y) from t0 to t1 (either direction) in place.
// rhs signature: void(double t, const std::vector<double>& y, std::vector<double>& dy).
// per_step (optional) is called after each accepted step as per_step(t, y) and may
// modify y (used for domain clamping / escape checks).
template <class Rhs, class PerStep>
void integrate_ode(Rhs&& rhs, std::vector<double>& y, double t0, double t1,
                   const OdeOptions& opts, PerStep&& per_step) {
  opts.validate();
  const std::size_t n = y.size();
  if (t1 == t0) return;
  const double dir = (t1 > t0) ? 1.0 : -1.0;

  auto check_finite = [&](double t) {
    for (double v : y)
      if (!std::isfinite(v)) throw NonFiniteState("non-finite ODE state at t=" + std::to_string(t));
  };

  if (opts.method == OdeOptions::Method::rk4_fixed) {
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = t0;
    long steps = 0;
    while (dir * (t1 - t) > 0) {
      double h = dir * std::min(opts.step, std::abs(t1 - t));
      detail::rk4_step(rhs, t, h, y, k1, k2, k3, k4, tmp);
      t += h;
      check_finite(t);
      per_step(t, y);
      if (++steps > opts.max_steps) throw MaxStepsExceeded("rk4_fixed exceeded max_steps");
    }
    return;
  }

  // Dormand-Prince 5(4).
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);
  double t = t0;
  double h = dir * std::min(opts.step, std::abs(t1 - t0));
  long steps = 0;
  while (dir * (t1 - t) > 0) {
    if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, y5, k7);

    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0 || std::abs(h) <= 1e-14) {
      t += h;
      y = y5;
      check_finite(t);
      per_step(t, y);
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    if (++steps > opts.max_steps) throw MaxStepsExceeded("rk45_adaptive exceeded max_steps");
  }
}

template <class Rhs>
void integrate_ode(Rhs&& rhs, std::vector<double>& y, double t0, double t1,
                   const OdeOptions& opts) {
  integrate_ode(rhs, y, t0, t1, opts, [](double, std::vector<double>&) {});
}

}  // namespace lsl
