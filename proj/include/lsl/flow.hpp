#pragma once

#include <functional>
#include <vector>

#include "lsl/domain.hpp"
#include "lsl/ode.hpp"
#include "lsl/velocity.hpp"

namespace lsl {

// X(t_target, t_source, xi): position at t_target of the trajectory of
// x' = v(t,x) passing through xi at t_source. The trajectory is kept inside
// the closed domain; overshoot beyond `escape_tol` raises DomainEscape.
Vec eval_flow_map(const VelocityFieldModel& field, const DomainSpec& domain, double t_target,
                  double t_source, const Vec& xi, const OdeOptions& opts,
                  double escape_tol = 1e-9);

// f(t,x) = phi0(X(0,t,x)): the exact solution of the pure transport problem
// and the boundary/initial datum of the grid problem.
double reference_levelset(const VelocityFieldModel& field, const DomainSpec& domain,
                          const std::function<double(const Vec&)>& phi0, double t, const Vec& x,
                          const OdeOptions& opts);

struct SubtangentialReport {
  std::vector<double> h_values;
  std::vector<double> ratios_plus;   // dist(x + h v, boundary)/h
  std::vector<double> ratios_minus;  // dist(x - h v, boundary)/h
  bool verdict = false;              // both directions subtangential
};

std::vector<double> default_h_values();  // 2^-k, k = 4..26

// Estimates the Bouligand-cone membership of +-v(t,x) at a boundary point by
// the decay of dist(x + h z, boundary)/h along h_values. Verdict true iff for
// both signs the minimum ratio over the last three h values is <= ratio_tol
// times |v| (trivially true when |v| <= 1e-12).
SubtangentialReport check_subtangential(const VelocityFieldModel& field, const DomainSpec& domain,
                                        double t, const Vec& x,
                                        const std::vector<double>& h_values = default_h_values(),
                                        double ratio_tol = 1e-4);

}  // namespace lsl
