#pragma once

#include <functional>
#include <vector>

#include "lsl/eulerian.hpp"

namespace lsl {

// The discontinuous rate S(t,x): -V0 where the reference solution is
// positive, +V0 where it is negative, 0 on the interface, always damped to 0
// across the boundary collar (distance < eps_collar) so that the barriers
// coincide with the Dirichlet datum there.
double barrier_S(const VelocityFieldModel& field, const DomainSpec& domain,
                 const std::function<double(const Vec&)>& phi0, double v0, double eps_collar,
                 double t, const Vec& x, const OdeOptions& opts);

struct BarrierPair {
  double rho = 0;        // subsolution:  f exp(+int S)
  double rho_tilde = 0;  // supersolution: f exp(-int S)
  double f = 0;          // reference solution value phi0(X(0,t,x))
};

// Computes f and int_0^t S(s, X(s,t,x)) ds in one backward pass (the sign of
// the reference solution is constant along the trajectory).
BarrierPair barrier_bounds(const VelocityFieldModel& field, const DomainSpec& domain,
                           const std::function<double(const Vec&)>& phi0, double v0,
                           double eps_collar, double t, const Vec& x, const OdeOptions& opts);

struct EnvelopeReport {
  long checked = 0;
  long violations = 0;
  double violation_fraction = 0;
  double worst_excess = 0;  // largest amount by which phi escaped [rho, rho_tilde]
};

// Verifies rho - tol <= phi_grid <= rho_tilde + tol on every `stride`-th
// interior node of every snapshot.
EnvelopeReport envelope_check(const std::vector<GridField>& snapshots,
                              const VelocityFieldModel& field, const DomainSpec& domain,
                              const std::function<double(const Vec&)>& phi0, double v0,
                              double eps_collar, double tol, int stride, const OdeOptions& opts,
                              int threads = 1);

}  // namespace lsl
