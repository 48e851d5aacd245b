#pragma once

#include "lsl/characteristics.hpp"
#include "lsl/domain.hpp"
#include "lsl/smoothstep.hpp"
#include "lsl/velocity.hpp"

namespace lsl {

// Cut-off configuration for the grid problem's source term. eps is the
// (constant-in-time) boundary collar scale; the gradient-magnitude knots are
// fixed at (1/3, 2/3, 4/3, 5/3) for the gradient-preserving mode and at
// (2(beta+alpha), 3(beta+alpha)) for the gradient-bounding mode.
struct CutoffConfig {
  double eps = 0.05;
  double beta = 1.0;
  double alpha = 0.0;

  void validate() const {
    if (!(eps > 0)) throw ValidationError("cutoff eps must be > 0");
    if (!(beta > 0)) throw ValidationError("cutoff beta must be > 0");
    if (alpha < 0) throw ValidationError("cutoff alpha must be >= 0");
  }
};

// 1 in the interior, 0 within distance 2*eps of the boundary.
inline double eta1(const CutoffConfig& cut, const DomainSpec& domain, const Vec& x) {
  return 1.0 - smoothstep(2.0 * cut.eps, 3.0 * cut.eps, domain.boundary_distance(x));
}

// 1 for |p| in [2/3, 4/3], 0 for |p| <= 1/3 or >= 5/3.
inline double eta2(double r) {
  return (1.0 - smoothstep(1.0 / 3.0, 2.0 / 3.0, r)) * smoothstep(4.0 / 3.0, 5.0 / 3.0, r);
}

// 1 for |p| <= 2(beta+alpha), 0 for |p| >= 3(beta+alpha).
inline double eta3(const CutoffConfig& cut, double r) {
  double ba = cut.beta + cut.alpha;
  return smoothstep(2.0 * ba, 3.0 * ba, r);
}

// Source with precomputed Jacobian and eta1 (the grid solver caches both).
inline double source_R_core(const SourceMode& mode, const CutoffConfig& cut, const Mat& jac,
                            double eta1_value, const Vec& p, int d) {
  if (eta1_value == 0.0) return 0.0;
  switch (mode.kind) {
    case SourceKind::linear_transport: return 0.0;
    case SourceKind::grad_preserving: {
      double pn = norm(p, d);
      if (pn <= 1e-14) return 0.0;
      double e2 = eta2(pn);
      if (e2 == 0.0) return 0.0;
      Vec phat = scale(1.0 / pn, p, d);
      return eta1_value * e2 * bilinear(jac, phat, phat, d);
    }
    case SourceKind::grad_bounding: {
      double pn = norm(p, d);
      double e3 = eta3(cut, pn);
      if (e3 == 0.0) return 0.0;
      return eta1_value * e3 * (mode.beta - pn);
    }
  }
  return 0.0;
}

// R(t,x,p): the cut-off source of the grid problem.
inline double source_R(const SourceMode& mode, const VelocityFieldModel& field,
                       const CutoffConfig& cut, const DomainSpec& domain, double t, const Vec& x,
                       const Vec& p) {
  if (mode.kind == SourceKind::linear_transport) return 0.0;
  double e1 = eta1(cut, domain, x);
  if (e1 == 0.0) return 0.0;
  Mat jac = mode.kind == SourceKind::grad_preserving ? field.jacobian(t, x) : mat0();
  return source_R_core(mode, cut, jac, e1, p, field.dim);
}

}  // namespace lsl
