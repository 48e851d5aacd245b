#include "lsl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsl/errors.hpp"

namespace lsl {

Vec eval_flow_map(const VelocityFieldModel& field, const DomainSpec& domain, double t_target,
                  double t_source, const Vec& xi, const OdeOptions& opts, double escape_tol) {
  if (!domain.contains(xi, escape_tol))
    throw DomainEscape("flow map seed outside the closed domain");
  const int d = field.dim;
  std::vector<double> y(xi.begin(), xi.begin() + d);

  auto rhs = [&](double t, const std::vector<double>& s, std::vector<double>& ds) {
    Vec x = vec0();
    for (int i = 0; i < d; ++i) x[i] = s[i];
    Vec v = field.eval(t, x);
    for (int i = 0; i < d; ++i) ds[i] = v[i];
  };
  auto keep_inside = [&](double t, std::vector<double>& s) {
    Vec x = vec0();
    for (int i = 0; i < d; ++i) x[i] = s[i];
    double depth = domain.inside_depth(x);
    if (depth < -escape_tol)
      throw DomainEscape("trajectory left the closed domain by " + std::to_string(-depth) +
                         " at t=" + std::to_string(t));
    if (depth < 0) {
      Vec c = domain.clamp(x);
      for (int i = 0; i < d; ++i) s[i] = c[i];
    }
  };

  integrate_ode(rhs, y, t_source, t_target, opts, keep_inside);
  Vec out = vec0();
  for (int i = 0; i < d; ++i) out[i] = y[i];
  return domain.clamp(out);
}

double reference_levelset(const VelocityFieldModel& field, const DomainSpec& domain,
                          const std::function<double(const Vec&)>& phi0, double t, const Vec& x,
                          const OdeOptions& opts) {
  if (t == 0.0) return phi0(x);
  return phi0(eval_flow_map(field, domain, 0.0, t, x, opts));
}

std::vector<double> default_h_values() {
  std::vector<double> h;
  for (int k = 4; k <= 26; ++k) h.push_back(std::ldexp(1.0, -k));
  return h;
}

SubtangentialReport check_subtangential(const VelocityFieldModel& field, const DomainSpec& domain,
                                        double t, const Vec& x,
                                        const std::vector<double>& h_values, double ratio_tol) {
  if (!domain.on_boundary(x, 1e-9))
    throw NotOnBoundary("check_subtangential requires a boundary point");
  const int d = field.dim;
  Vec v = field.eval(t, x);
  double speed = norm(v, d);

  SubtangentialReport rep;
  rep.h_values = h_values;
  for (double h : h_values) {
    rep.ratios_plus.push_back(domain.boundary_distance(add(x, scale(h, v, d), d)) / h);
    rep.ratios_minus.push_back(domain.boundary_distance(add(x, scale(-h, v, d), d)) / h);
  }
  if (speed <= 1e-12) {
    rep.verdict = true;
    return rep;
  }
  auto tail_min = [](const std::vector<double>& r) {
    double m = r.back();
    for (std::size_t i = r.size() >= 3 ? r.size() - 3 : 0; i < r.size(); ++i)
      m = std::min(m, r[i]);
    return m;
  };
  rep.verdict = tail_min(rep.ratios_plus) <= ratio_tol * speed &&
                tail_min(rep.ratios_minus) <= ratio_tol * speed;
  return rep;
}

}  // namespace lsl
