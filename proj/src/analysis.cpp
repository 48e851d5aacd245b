#include "lsl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lsl/errors.hpp"

namespace lsl {

namespace {

// Crossing point on an edge with endpoint values of opposite sign (or zero).
bool edge_crossing(const Vec& a, const Vec& b, double fa, double fb, int d, Vec* out) {
  if (fa == 0.0) {
    *out = a;
    return true;
  }
  if (fb == 0.0) {
    *out = b;
    return true;
  }
  if ((fa > 0) == (fb > 0)) return false;
  double s = fa / (fa - fb);
  *out = add(a, scale(s, sub(b, a, d), d), d);
  return true;
}

}  // namespace

InterfaceSet extract_interface(const GridField& grid) {
  const GridSpec& spec = grid.spec;
  const int d = spec.dim();
  InterfaceSet set;
  set.dim = d;
  set.source = InterfaceSet::Source::grid_contour;
  for (double v : grid.values)
    if (!std::isfinite(v)) throw NonFiniteState("extract_interface: non-finite grid value");

  const int kmax = d == 3 ? spec.n : 0;
  Vec pt;
  for (int k = 0; k <= kmax; ++k)
    for (int j = 0; j <= spec.n; ++j)
      for (int i = 0; i <= spec.n; ++i) {
        double f = grid.values[spec.index(i, j, k)];
        Vec x = spec.pos(i, j, k);
        if (i < spec.n &&
            edge_crossing(x, spec.pos(i + 1, j, k), f, grid.values[spec.index(i + 1, j, k)], d,
                          &pt))
          set.points.push_back(pt);
        if (j < spec.n &&
            edge_crossing(x, spec.pos(i, j + 1, k), f, grid.values[spec.index(i, j + 1, k)], d,
                          &pt))
          set.points.push_back(pt);
        if (d == 3 && k < spec.n &&
            edge_crossing(x, spec.pos(i, j, k + 1), f, grid.values[spec.index(i, j, k + 1)], d,
                          &pt))
          set.points.push_back(pt);
      }
  return set;
}

InterfaceSet marker_interface(const TubeSolution& tube, double t) {
  InterfaceSet set;
  set.dim = tube.dim;
  set.source = InterfaceSet::Source::marker_cloud;
  int ti = tube.time_index(t);
  double tt = tube.time_grid[ti];
  double tol = 1e-9 * std::max(1.0, std::abs(tt));
  for (int i : tube.alive_at(ti)) {
    const MarkerTrajectory& tr = tube.trajectories[i];
    if (!tr.on_interface) continue;
    for (std::size_t s = 0; s < tr.times.size(); ++s)
      if (std::abs(tr.times[s] - tt) <= tol) {
        set.points.push_back(tr.states[s].x);
        break;
      }
  }
  return set;
}

InterfaceSet analytic_sphere_interface(int dim, const Vec& center, double radius, int samples) {
  InterfaceSet set;
  set.dim = dim;
  set.source = InterfaceSet::Source::analytic;
  const double pi = 3.14159265358979323846;
  if (dim == 2) {
    for (int i = 0; i < samples; ++i) {
      double a = 2 * pi * i / samples;
      set.points.push_back(add(center, scale(radius, vec2(std::cos(a), std::sin(a)), 2), 2));
    }
  } else {
    int m = std::max(4, static_cast<int>(std::sqrt(static_cast<double>(samples))));
    for (int i = 0; i <= m; ++i) {
      double th = pi * i / m;
      int ring = std::max(1, static_cast<int>(std::round(m * std::sin(th))) * 2);
      for (int j = 0; j < ring; ++j) {
        double ph = 2 * pi * j / ring;
        Vec u = vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        set.points.push_back(add(center, scale(radius, u, 3), 3));
      }
    }
  }
  return set;
}

double hausdorff(const InterfaceSet& a, const InterfaceSet& b) {
  if (a.points.empty() || b.points.empty())
    throw EmptyInterface("hausdorff needs two nonempty point sets");
  const int d = a.dim;
  auto directed = [d](const std::vector<Vec>& p, const std::vector<Vec>& q) {
    double worst = 0;
    for (const Vec& x : p) {
      double best = 1e300;
      for (const Vec& y : q) {
        best = std::min(best, dot(sub(x, y, d), sub(x, y, d), d));
        if (best == 0) break;
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a.points, b.points), directed(b.points, a.points));
}

DriftStats gradient_drift_unmodified(const VelocityFieldModel& field,
                                     const std::vector<MarkerTrajectory>& trajectories, double t) {
  const int d = field.dim;
  DriftStats st;
  double sum = 0;
  long count = 0;
  for (const MarkerTrajectory& tr : trajectories) {
    if (tr.times.size() < 3) continue;
    bool used = false;
    for (std::size_t k = 1; k + 1 < tr.times.size(); ++k) {
      if (tr.times[k] > t + 1e-12) break;
      double dtm = tr.times[k] - tr.times[k - 1];
      double dtp = tr.times[k + 1] - tr.times[k];
      if (!(dtm > 0) || !(dtp > 0)) continue;
      double measured = (norm(tr.states[k + 1].p, d) - norm(tr.states[k - 1].p, d)) / (dtm + dtp);
      const CharacteristicState& s = tr.states[k];
      double pn = norm(s.p, d);
      if (pn < 1e-300) continue;
      Vec nu = scale(1.0 / pn, s.p, d);
      double predicted = -pn * bilinear(field.jacobian(tr.times[k], s.x), nu, nu, d);
      double res = std::abs(measured - predicted);
      st.max_residual = std::max(st.max_residual, res);
      sum += res;
      ++count;
      used = true;
    }
    if (used) ++st.markers;
  }
  if (count > 0) st.mean_residual = sum / count;
  return st;
}

ComparisonReport compare_in_tube(const std::vector<GridField>& snapshots, const TubeSolution& tube,
                                 double m0, const std::vector<double>& times) {
  if (!(m0 > 0)) throw ValidationError("compare_in_tube needs m0 > 0");
  ComparisonReport rep;
  rep.m0 = m0;
  for (double t : times) {
    const GridField* snap = nullptr;
    for (const GridField& s : snapshots)
      if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
        snap = &s;
        break;
      }
    if (!snap) throw ValidationError("compare_in_tube: no snapshot at requested time");
    rep.h = snap->spec.h;
    auto ev = make_tube_evaluator(tube, t);
    const GridSpec& spec = snap->spec;
    const int d = spec.dim();
    const int kmax = d == 3 ? spec.n - 1 : 0, kmin = d == 3 ? 1 : 0;
    double sup = 0;
    long count = 0, mismatches = 0;
    for (int k = kmin; k <= kmax; ++k)
      for (int j = 1; j < spec.n; ++j)
        for (int i = 1; i < spec.n; ++i) {
          auto r = ev->evaluate(spec.pos(i, j, k));
          if (!r || std::abs(r->value) > m0) continue;
          double u = snap->values[spec.index(i, j, k)];
          sup = std::max(sup, std::abs(u - r->value));
          // sign mismatch beyond the discretization scale of either field
          if (u * r->value < 0 && std::min(std::abs(u), std::abs(r->value)) > spec.h)
            ++mismatches;
          ++count;
        }
    if (count == 0) throw BandEmpty("compare_in_tube: empty band at a requested time");
    rep.times.push_back(t);
    rep.sup_error.push_back(sup);
    rep.band_node_counts.push_back(count);
    rep.sign_mismatches.push_back(mismatches);
  }
  return rep;
}

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows) {
  std::string out = "    n  interface_err      order  tube_sup_err       order\n";
  char buf[128];
  for (const ConvergenceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%5d  %13.6e  %9.3f  %13.6e  %9.3f\n", r.n, r.interface_error,
                  r.order_interface, r.tube_sup_error, r.order_tube);
    out += buf;
  }
  return out;
}

}  // namespace lsl
