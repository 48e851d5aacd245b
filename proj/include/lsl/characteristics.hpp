#pragma once

#include <string>
#include <vector>

#include "lsl/domain.hpp"
#include "lsl/ode.hpp"
#include "lsl/velocity.hpp"

namespace lsl {

enum class SourceKind { linear_transport, grad_preserving, grad_bounding };

struct SourceMode {
  SourceKind kind = SourceKind::linear_transport;
  double beta = 1.0;  // grad_bounding only

  static SourceMode linear_transport() { return {SourceKind::linear_transport, 1.0}; }
  static SourceMode grad_preserving() { return {SourceKind::grad_preserving, 1.0}; }
  static SourceMode grad_bounding(double beta);
};

struct CharacteristicState {
  Vec x = vec0();
  Vec p = vec0();
  double phi = 0;
};

struct VariationalState {
  Mat dx_dxi = mat0();    // column j = d x / d xi_j
  Mat dp_dxi = mat0();
  Vec dphi_dxi = vec0();
};

struct MarkerTrajectory {
  long id = 0;
  Vec xi0 = vec0();
  bool on_interface = false;
  std::vector<double> times;
  std::vector<CharacteristicState> states;
  std::vector<double> residual;  // q(s) carried so that H + q == 0 along the curve
  std::vector<VariationalState> variational;  // empty unless requested
  std::vector<double> det_dx_dxi;             // parallel to variational
};

// H(t,x,p,Phi) of the mode. grad_preserving: v.p - Phi <grad(v) p/|p|, p/|p|>;
// grad_bounding: v.p - Phi (beta - |p|); linear_transport: v.p.
double hamiltonian(const SourceMode& mode, const VelocityFieldModel& field, double t, const Vec& x,
                   const Vec& p, double phi);

// Right-hand side of the characteristic system d(x,p,Phi)/ds.
CharacteristicState characteristic_rhs(const SourceMode& mode, const VelocityFieldModel& field,
                                       double t, const CharacteristicState& state);

// Integrates one characteristic from t0 to t1 recording the state at
// output_times (defaults to {t0, t1}). Always carries the autonomized
// Hamiltonian residual q with q' = -dH/dt - (dH/dPhi) q, q(t0) = -H(t0), so
// that H + q == 0 is a checkable invariant. If with_variational, the tangent
// system along the xi-coordinate directions is propagated by directional
// central differences of the characteristic right-hand side (step 1e-6),
// starting from dx_dxi = I, dp_dxi = grad_p0 (caller-supplied via state0_var),
// dphi_dxi = p(0) by default.
// state0_var and residual0 let a caller resume a trajectory mid-flight
// (continuing the tangent matrices and the carried q instead of restarting
// them from their t0 initial values).
MarkerTrajectory integrate_characteristic(const SourceMode& mode, const VelocityFieldModel& field,
                                          const CharacteristicState& state0, double t0, double t1,
                                          const OdeOptions& opts, bool with_variational,
                                          std::vector<double> output_times = {},
                                          const VariationalState* state0_var = nullptr,
                                          const double* residual0 = nullptr);

// 1.1 times the max sampled spectral radius of D(v) = (grad v + grad v^T)/2
// over [0, t_max] x domain; the constant bounding <grad(v) p, p>/|p|^2.
double estimate_alpha(const VelocityFieldModel& field, const DomainSpec& domain, double t_max,
                      int samples);

// min(1, 0.9 a*/(2 V4)) with a* the positive root of 3a + 6a^2 + 6a^3 = 1;
// returns 1 for V4 = 0. Advisory step-size horizon for the tube construction.
double estimate_tstar(double v4);

}  // namespace lsl
