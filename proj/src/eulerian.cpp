#include "lsl/eulerian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "lsl/csvfmt.hpp"
#include "lsl/errors.hpp"
#include "lsl/parallel.hpp"

namespace lsl {

namespace {

double sample_pmax(const SourceMode& mode, const CutoffConfig& cut) {
  if (mode.kind == SourceKind::grad_bounding) return 3.5 * (cut.beta + cut.alpha);
  return 2.0;
}

}  // namespace

GridSpec GridSpec::make(const DomainSpec& domain, int n) {
  if (domain.kind != DomainSpec::Kind::box) throw ValidationError("grid needs a box domain");
  if (n < 8) throw ValidationError("grid needs n >= 8");
  GridSpec g;
  g.domain = domain;
  g.n = n;
  g.h = (domain.upper[0] - domain.lower[0]) / n;
  for (int i = 1; i < domain.dim; ++i) {
    double hi = (domain.upper[i] - domain.lower[i]) / n;
    if (std::abs(hi - g.h) > 1e-12 * std::abs(g.h))
      throw ValidationError("grid spacing must be uniform across axes");
  }
  return g;
}

long GridSpec::nodes() const {
  long per = per_axis(), total = per * per;
  return dim() == 3 ? total * per : total;
}

long GridSpec::index(int i, int j, int k) const {
  long per = per_axis();
  return i + per * (j + per * static_cast<long>(k));
}

Vec GridSpec::pos(int i, int j, int k) const {
  Vec x = vec0();
  x[0] = domain.lower[0] + i * h;
  x[1] = domain.lower[1] + j * h;
  if (dim() == 3) x[2] = domain.lower[2] + k * h;
  return x;
}

bool GridSpec::is_boundary(int i, int j, int k) const {
  if (i == 0 || i == n || j == 0 || j == n) return true;
  return dim() == 3 && (k == 0 || k == n);
}

GridField GridField::sample(const GridSpec& spec, const std::function<double(const Vec&)>& f,
                            double t) {
  GridField g;
  g.spec = spec;
  g.t = t;
  g.values.resize(spec.nodes());
  int per = spec.per_axis(), kmax = spec.dim() == 3 ? spec.n : 0;
  for (int k = 0; k <= kmax; ++k)
    for (int j = 0; j < per; ++j)
      for (int i = 0; i < per; ++i) g.values[spec.index(i, j, k)] = f(spec.pos(i, j, k));
  return g;
}

double GridField::max_abs() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <class Fn>
void sample_tx_p(const SourceMode& mode, const VelocityFieldModel& field, const CutoffConfig& cut,
                 const DomainSpec& domain, double t_max, int samples, unsigned seed, Fn&& fn) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = field.dim;
  Vec lo = domain.bounding_lower(), hi = domain.bounding_upper();
  double pmax = sample_pmax(mode, cut);
  int accepted = 0;
  while (accepted < samples) {
    Vec x = vec0();
    for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * uni(rng);
    if (!domain.contains(x)) continue;
    double t = t_max * uni(rng);
    Vec dir = vec0();
    for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
    double dn = norm(dir, d);
    if (dn < 1e-12) continue;
    Vec p = scale(pmax * uni(rng) / dn, dir, d);
    fn(t, x, p);
    ++accepted;
  }
}

}  // namespace

double measure_v0_bound(const SourceMode& mode, const VelocityFieldModel& field,
                        const CutoffConfig& cut, const DomainSpec& domain, double t_max,
                        int samples, unsigned seed) {
  if (mode.kind == SourceKind::linear_transport) return 0.0;
  double worst = 0;
  sample_tx_p(mode, field, cut, domain, t_max, samples, seed, [&](double t, Vec x, Vec p) {
    worst = std::max(worst, std::abs(source_R(mode, field, cut, domain, t, x, p)));
  });
  return 1.1 * worst;
}

double measure_lipschitz_R(const SourceMode& mode, const VelocityFieldModel& field,
                           const CutoffConfig& cut, const DomainSpec& domain, double t_max,
                           int samples, unsigned seed) {
  if (mode.kind == SourceKind::linear_transport) return 0.0;
  const int d = field.dim;
  const double dp = 1e-5;
  double worst = 0;
  sample_tx_p(mode, field, cut, domain, t_max, samples, seed, [&](double t, Vec x, Vec p) {
    for (int i = 0; i < d; ++i) {
      Vec pp = p, pm = p;
      pp[i] += dp;
      pm[i] -= dp;
      double g = (source_R(mode, field, cut, domain, t, x, pp) -
                  source_R(mode, field, cut, domain, t, x, pm)) /
                 (2 * dp);
      worst = std::max(worst, std::abs(g));
    }
  });
  return 1.1 * worst;
}

double boundary_value(const VelocityFieldModel& field, const DomainSpec& domain,
                      const std::function<double(const Vec&)>& phi0, double t, const Vec& x,
                      const OdeOptions& opts) {
  return reference_levelset(field, domain, phi0, t, x, opts);
}

double numerical_hamiltonian(const SourceMode& mode, const VelocityFieldModel& field,
                             const CutoffConfig& cut, const DomainSpec& domain,
                             const SchemeConfig& scheme, double t, const Vec& x, const Vec& p_minus,
                             const Vec& p_plus, double u) {
  const int d = field.dim;
  Vec pbar = scale(0.5, add(p_minus, p_plus, d), d);
  Vec v = field.eval(t, x);
  double g = dot(v, pbar, d) - u * source_R(mode, field, cut, domain, t, x, pbar);
  for (int i = 0; i < d; ++i) {
    double sigma = std::abs(v[i]) + std::abs(u) * scheme.l_r;
    g -= 0.5 * sigma * (p_plus[i] - p_minus[i]);
  }
  return g;
}

double cfl_dt(const GridField& state, const VelocityFieldModel& field, const SchemeConfig& scheme,
              double t) {
  const GridSpec& spec = state.spec;
  const int d = spec.dim();
  double maxs = 0;
  int per = spec.per_axis(), kmax = d == 3 ? spec.n : 0;
  for (int k = 0; k <= kmax; ++k)
    for (int j = 0; j < per; ++j)
      for (int i = 0; i < per; ++i) {
        Vec v = field.eval(t, spec.pos(i, j, k));
        double au = std::abs(state.values[spec.index(i, j, k)]);
        for (int a = 0; a < d; ++a) maxs = std::max(maxs, std::abs(v[a]) + au * scheme.l_r);
      }
  maxs = std::max(maxs, 1e-8);
  return scheme.cfl * spec.h / (d * maxs);
}

// ---------------------------------------------------------------------------

GridSolver::GridSolver(const GridSpec& spec, const SourceMode& mode,
                       const VelocityFieldModel& field, std::function<double(const Vec&)> phi0,
                       const CutoffConfig& cut, const SchemeConfig& scheme,
                       const OdeOptions& boundary_ode, double t_max, int threads)
    : spec_(spec),
      mode_(mode),
      field_(field),
      phi0_(std::move(phi0)),
      cut_(cut),
      scheme_(scheme),
      boundary_ode_(boundary_ode),
      threads_(threads) {
  cut_.validate();
  const int d = spec_.dim();
  const int per = spec_.per_axis(), kmax = d == 3 ? spec_.n : 0;
  v_sp_.resize(spec_.nodes());
  eta1_.resize(spec_.nodes());
  if (mode_.kind == SourceKind::grad_preserving) j_sp_.resize(spec_.nodes());
  for (int k = 0; k <= kmax; ++k)
    for (int j = 0; j < per; ++j)
      for (int i = 0; i < per; ++i) {
        long idx = spec_.index(i, j, k);
        Vec x = spec_.pos(i, j, k);
        v_sp_[idx] = field_.spatial_eval(x);
        eta1_[idx] = eta1(cut_, spec_.domain, x);
        if (mode_.kind == SourceKind::grad_preserving) j_sp_[idx] = field_.spatial_jacobian(x);
        if (spec_.is_boundary(i, j, k)) boundary_nodes_.push_back(idx);
      }

  tf_max_ = 0;
  for (int s = 0; s <= 100; ++s)
    tf_max_ = std::max(tf_max_, std::abs(field_.tf(t_max * s / 100.0)));

  // boundary nodes are stationary iff the spatial field vanishes there
  boundary_stationary_ = true;
  for (long idx : boundary_nodes_)
    if (norm(v_sp_[idx], d) * std::max(tf_max_, 1e-300) > 1e-12) {
      boundary_stationary_ = false;
      break;
    }
  if (boundary_stationary_) {
    boundary_phi0_.reserve(boundary_nodes_.size());
    for (int k = 0; k <= kmax; ++k)
      for (int j = 0; j < per; ++j)
        for (int i = 0; i < per; ++i)
          if (spec_.is_boundary(i, j, k)) boundary_phi0_.push_back(phi0_(spec_.pos(i, j, k)));
  }
}

void GridSolver::apply_boundary(GridField& state, double t) const {
  if (boundary_stationary_) {
    for (std::size_t b = 0; b < boundary_nodes_.size(); ++b)
      state.values[boundary_nodes_[b]] = boundary_phi0_[b];
    return;
  }
  const int d = spec_.dim();
  const int per = spec_.per_axis(), kmax = d == 3 ? spec_.n : 0;
  for (int k = 0; k <= kmax; ++k)
    for (int j = 0; j < per; ++j)
      for (int i = 0; i < per; ++i)
        if (spec_.is_boundary(i, j, k))
          state.values[spec_.index(i, j, k)] =
              reference_levelset(field_, spec_.domain, phi0_, t, spec_.pos(i, j, k),
                                 boundary_ode_);
}

double GridSolver::dt_for(const GridField& state) const {
  const int d = spec_.dim();
  double maxs = 1e-8;
  for (long idx = 0; idx < static_cast<long>(state.values.size()); ++idx) {
    double au = std::abs(state.values[idx]);
    const Vec& v = v_sp_[idx];
    for (int a = 0; a < d; ++a)
      maxs = std::max(maxs, std::abs(v[a]) * tf_max_ + au * scheme_.l_r);
  }
  return scheme_.cfl * spec_.h / (d * maxs);
}

void GridSolver::stage(const std::vector<double>& u, double t, double dt,
                       std::vector<double>& out) const {
  const int d = spec_.dim();
  const int per = spec_.per_axis();
  const double tfv = field_.tf(t);
  const double inv_h = 1.0 / spec_.h;
  const long sx = 1, sy = per, sz = static_cast<long>(per) * per;
  out = u;

  const int kmax = d == 3 ? spec_.n - 1 : 0, kmin = d == 3 ? 1 : 0;
  auto do_slab = [&](long jj) {
    int j = static_cast<int>(jj) + 1;
    for (int k = kmin; k <= kmax; ++k)
      for (int i = 1; i < spec_.n; ++i) {
        long idx = spec_.index(i, j, k);
        Vec pm = vec0(), pp = vec0(), pbar = vec0();
        double uc = u[idx];
        const long strides[3] = {sx, sy, sz};
        for (int a = 0; a < d; ++a) {
          pm[a] = (uc - u[idx - strides[a]]) * inv_h;
          pp[a] = (u[idx + strides[a]] - uc) * inv_h;
          pbar[a] = 0.5 * (pm[a] + pp[a]);
        }
        double r = 0;
        if (mode_.kind != SourceKind::linear_transport && eta1_[idx] > 0) {
          Mat jac = mat0();
          if (mode_.kind == SourceKind::grad_preserving) {
            for (int a = 0; a < d; ++a)
              for (int b = 0; b < d; ++b) jac[a][b] = tfv * j_sp_[idx][a][b];
          }
          r = source_R_core(mode_, cut_, jac, eta1_[idx], pbar, d);
        }
        const Vec& vs = v_sp_[idx];
        double g = -uc * r;
        for (int a = 0; a < d; ++a) {
          double va = tfv * vs[a];
          double sigma = std::abs(va) + std::abs(uc) * scheme_.l_r;
          g += va * pbar[a] - 0.5 * sigma * (pp[a] - pm[a]);
        }
        out[idx] = uc - dt * g;
        if (!std::isfinite(out[idx])) throw NonFiniteState("grid stage produced non-finite value");
      }
  };
  parallel_for(spec_.n - 1, threads_, do_slab);
}

double GridSolver::step(GridField& state) const { return step(state, 1e300); }

double GridSolver::step(GridField& state, double dt_cap) const {
  double dt = std::min(dt_for(state), dt_cap);
  if (!(dt > 0)) throw ValidationError("non-positive time step");
  std::vector<double> u1, u2;
  if (scheme_.integrator == SchemeConfig::Integrator::euler) {
    stage(state.values, state.t, dt, u1);
    state.values.swap(u1);
  } else {
    stage(state.values, state.t, dt, u1);
    GridField mid;
    mid.spec = spec_;
    mid.t = state.t + dt;
    mid.values.swap(u1);
    apply_boundary(mid, mid.t);
    stage(mid.values, mid.t, dt, u2);
    for (std::size_t i = 0; i < state.values.size(); ++i)
      state.values[i] = 0.5 * (state.values[i] + u2[i]);
  }
  state.t += dt;
  apply_boundary(state, state.t);
  return dt;
}

GridRunResult GridSolver::run_to_time(const GridField& state0, double T,
                                      const std::vector<double>& output_times) const {
  if (!(T > 0)) throw ValidationError("run_to_time needs T > 0");
  std::vector<double> outs = output_times;
  std::sort(outs.begin(), outs.end());
  GridRunResult res;
  GridField state = state0;
  const double max0 = state.max_abs();
  const double tol = 1e-12;

  std::size_t next_out = 0;
  while (next_out < outs.size() && outs[next_out] <= state.t + tol) {
    res.snapshots.push_back(state);
    ++next_out;
  }
  while (state.t < T - tol) {
    double cap = T - state.t;
    if (next_out < outs.size()) cap = std::min(cap, outs[next_out] - state.t);
    double dt = step(state, cap);
    ++res.steps;
    double bound = max0 * std::exp(scheme_.v0_bound * (state.t - state0.t)) * (1 + 1e-3) + 1e-12;
    double ma = state.max_abs();
    if (ma > bound)
      throw SanityBoundViolated("max|phi| exceeded the exp(V0 t) growth bound");
    res.series.push_back({state.t, dt, ma});
    while (next_out < outs.size() && outs[next_out] <= state.t + tol) {
      res.snapshots.push_back(state);
      ++next_out;
    }
  }
  return res;
}

GridField step(const GridField& state, const SourceMode& mode, const VelocityFieldModel& field,
               const std::function<double(const Vec&)>& phi0, const CutoffConfig& cut,
               const SchemeConfig& scheme, const OdeOptions& boundary_ode) {
  GridSolver solver(state.spec, mode, field, phi0, cut, scheme, boundary_ode, state.t + 1.0, 1);
  GridField out = state;
  solver.step(out);
  return out;
}

void write_grid_dump(const GridField& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  const GridSpec& s = state.spec;
  out << "dimension " << s.dim() << "\n";
  out << "n " << s.n << "\n";
  out << "lower";
  for (int i = 0; i < s.dim(); ++i) out << ' ' << g17(s.domain.lower[i]);
  out << "\nupper";
  for (int i = 0; i < s.dim(); ++i) out << ' ' << g17(s.domain.upper[i]);
  out << "\ntime " << g17(state.t) << "\n";
  for (double v : state.values) out << g17(v) << '\n';
}

}  // namespace lsl
