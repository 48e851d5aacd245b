#include "lsl/barrier.hpp"

#include <cmath>

#include "lsl/parallel.hpp"
#include "lsl/smoothstep.hpp"

namespace lsl {

namespace {

constexpr double kSignTol = 1e-12;

double collar_factor(const DomainSpec& domain, double eps_collar, const Vec& x) {
  // 0 within eps/2 of the boundary, 1 beyond eps
  return 1.0 - smoothstep(0.5 * eps_collar, eps_collar, domain.boundary_distance(x));
}

}  // namespace

double barrier_S(const VelocityFieldModel& field, const DomainSpec& domain,
                 const std::function<double(const Vec&)>& phi0, double v0, double eps_collar,
                 double t, const Vec& x, const OdeOptions& opts) {
  double f = reference_levelset(field, domain, phi0, t, x, opts);
  if (std::abs(f) <= kSignTol) return 0.0;
  double sign = f > 0 ? 1.0 : -1.0;
  return -sign * v0 * collar_factor(domain, eps_collar, x);
}

BarrierPair barrier_bounds(const VelocityFieldModel& field, const DomainSpec& domain,
                           const std::function<double(const Vec&)>& phi0, double v0,
                           double eps_collar, double t, const Vec& x, const OdeOptions& opts) {
  const int d = field.dim;
  BarrierPair out;
  if (t == 0.0) {
    out.f = phi0(x);
    out.rho = out.rho_tilde = out.f;
    return out;
  }
  // state: trajectory position plus the accumulated collar integral
  std::vector<double> y(d + 1, 0.0);
  for (int i = 0; i < d; ++i) y[i] = x[i];
  auto rhs = [&](double s, const std::vector<double>& yy, std::vector<double>& dy) {
    Vec q = vec0();
    for (int i = 0; i < d; ++i) q[i] = yy[i];
    Vec v = field.eval(s, q);
    for (int i = 0; i < d; ++i) dy[i] = v[i];
    dy[d] = collar_factor(domain, eps_collar, q);
  };
  auto clamp = [&](double, std::vector<double>& yy) {
    Vec q = vec0();
    for (int i = 0; i < d; ++i) q[i] = yy[i];
    if (domain.inside_depth(q) < 0) {
      Vec c = domain.clamp(q);
      for (int i = 0; i < d; ++i) yy[i] = c[i];
    }
  };
  integrate_ode(rhs, y, t, 0.0, opts, clamp);
  Vec x0 = vec0();
  for (int i = 0; i < d; ++i) x0[i] = y[i];
  out.f = phi0(domain.clamp(x0));
  // y[d] = int_t^0 collar ds = -int_0^t collar ds
  double collar_integral = -y[d];
  double sign = std::abs(out.f) <= kSignTol ? 0.0 : (out.f > 0 ? 1.0 : -1.0);
  double s_integral = -sign * v0 * collar_integral;
  out.rho = out.f * std::exp(s_integral);
  out.rho_tilde = out.f * std::exp(-s_integral);
  return out;
}

EnvelopeReport envelope_check(const std::vector<GridField>& snapshots,
                              const VelocityFieldModel& field, const DomainSpec& domain,
                              const std::function<double(const Vec&)>& phi0, double v0,
                              double eps_collar, double tol, int stride, const OdeOptions& opts,
                              int threads) {
  if (stride < 1) stride = 1;
  EnvelopeReport rep;
  for (const GridField& snap : snapshots) {
    const GridSpec& spec = snap.spec;
    const int d = spec.dim();
    std::vector<std::array<int, 3>> nodes;
    int kmax = d == 3 ? spec.n - 1 : 0, kmin = d == 3 ? 1 : 0;
    for (int k = kmin; k <= kmax; k += stride)
      for (int j = 1; j < spec.n; j += stride)
        for (int i = 1; i < spec.n; i += stride) nodes.push_back({i, j, k});
    std::vector<double> excess(nodes.size(), 0.0);
    parallel_for(static_cast<long>(nodes.size()), threads, [&](long m) {
      auto [i, j, k] = nodes[m];
      Vec x = spec.pos(i, j, k);
      BarrierPair b = barrier_bounds(field, domain, phi0, v0, eps_collar, snap.t, x, opts);
      double u = snap.values[spec.index(i, j, k)];
      excess[m] = std::max({b.rho - u, u - b.rho_tilde, 0.0});
    });
    for (double e : excess) {
      ++rep.checked;
      if (e > tol) {
        ++rep.violations;
        rep.worst_excess = std::max(rep.worst_excess, e);
      }
    }
  }
  if (rep.checked > 0)
    rep.violation_fraction = static_cast<double>(rep.violations) / rep.checked;
  return rep;
}

}  // namespace lsl
