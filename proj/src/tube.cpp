#include "lsl/tube.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "lsl/csvfmt.hpp"
#include "lsl/errors.hpp"
#include "lsl/parallel.hpp"

namespace lsl {

namespace {

// Newton projection onto {phi0 = 0} along the gradient direction.
bool project_to_zero(const LevelSetModel& phi0, Vec& x, double tol, int max_iter) {
  const int d = phi0.dim;
  for (int it = 0; it < max_iter; ++it) {
    double f = phi0.eval(x);
    if (std::abs(f) <= tol) return true;
    Vec g = phi0.grad(x);
    double g2 = dot(g, g, d);
    if (g2 < 1e-16) return false;
    x = add(x, scale(-f / g2, g, d), d);
  }
  return std::abs(phi0.eval(x)) <= tol;
}

}  // namespace

std::vector<Seed> seed_tube(const LevelSetModel& phi0, const DomainSpec& domain,
                            double band_halfwidth, double spacing) {
  if (!(band_halfwidth > 0)) throw ValidationError("seed_tube needs band_halfwidth > 0");
  if (!(spacing > 0)) throw ValidationError("seed_tube needs spacing > 0");
  const int d = phi0.dim;
  Vec lo = domain.bounding_lower(), hi = domain.bounding_upper();
  int count[3] = {1, 1, 1};
  for (int i = 0; i < d; ++i) count[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / spacing)) + 1;

  std::vector<Seed> seeds;
  std::vector<Vec> near_interface;
  for (int i = 0; i < count[0]; ++i)
    for (int j = 0; j < count[1]; ++j)
      for (int k = 0; k < count[2]; ++k) {
        Vec x = vec0();
        x[0] = lo[0] + i * spacing;
        x[1] = lo[1] + j * spacing;
        if (d == 3) x[2] = lo[2] + k * spacing;
        if (!domain.contains(x)) continue;
        double f = phi0.eval(x);
        if (std::abs(f) > band_halfwidth) continue;
        Vec g = phi0.grad(x);
        if (norm(g, d) < 1e-8)
          throw DegenerateGradient("seed_tube: |grad phi0| < 1e-8 inside the band");
        seeds.push_back({x, g, f, false});
        if (std::abs(f) <= spacing * norm(g, d)) near_interface.push_back(x);
      }
  if (seeds.empty()) throw EmptyInterface("seed_tube: band contains no grid points");

  for (Vec x : near_interface) {
    if (!project_to_zero(phi0, x, 1e-12, 100)) continue;
    if (!domain.contains(x)) continue;
    Vec g = phi0.grad(x);
    if (norm(g, d) < 1e-8)
      throw DegenerateGradient("seed_tube: |grad phi0| < 1e-8 at projected seed");
    seeds.push_back({x, g, phi0.eval(x), true});
  }
  return seeds;
}

// ---------------------------------------------------------------------------
// MLS evaluator

namespace {

long pack_key(int ix, int iy, int iz) {
  return (static_cast<long>(ix + (1 << 20)) << 42) | (static_cast<long>(iy + (1 << 20)) << 21) |
         static_cast<long>(iz + (1 << 20));
}

}  // namespace

TubeEvaluator::TubeEvaluator(int dim, std::vector<Vec> positions, std::vector<double> values)
    : dim_(dim), positions_(std::move(positions)), values_(std::move(values)) {
  const long n = static_cast<long>(positions_.size());
  if (n == 0) throw TubeDegenerate("TubeEvaluator: empty marker slice");
  if (values_.size() != positions_.size())
    throw ValidationError("TubeEvaluator: positions/values size mismatch");

  // median nearest-neighbor spacing (brute force; slices are small)
  std::vector<double> nn(n, 1e300);
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      double r = norm(sub(positions_[i], positions_[j], dim_), dim_);
      nn[i] = std::min(nn[i], r);
      nn[j] = std::min(nn[j], r);
    }
  if (n == 1) nn[0] = 1.0;
  std::vector<double> sorted = nn;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  double median = sorted[n / 2];
  if (!(median > 0)) {
    // coincident markers; fall back to the smallest positive gap
    double best = 1e300;
    for (double r : nn)
      if (r > 0) best = std::min(best, r);
    median = best < 1e300 ? best : 1.0;
  }
  spacing_ = median;
  radius_ = 3.0 * median;
  cell_ = radius_;

  std::vector<std::pair<long, int>> keyed(n);
  for (long i = 0; i < n; ++i) {
    const Vec& x = positions_[i];
    int ix = static_cast<int>(std::floor(x[0] / cell_));
    int iy = static_cast<int>(std::floor(x[1] / cell_));
    int iz = dim_ == 3 ? static_cast<int>(std::floor(x[2] / cell_)) : 0;
    keyed[i] = {pack_key(ix, iy, iz), static_cast<int>(i)};
  }
  std::sort(keyed.begin(), keyed.end());
  order_.resize(n);
  for (long i = 0; i < n; ++i) {
    order_[i] = keyed[i].second;
    if (i == 0 || keyed[i].first != keyed[i - 1].first) {
      cell_keys_.push_back(keyed[i].first);
      cell_starts_.push_back(static_cast<int>(i));
    }
  }
  cell_starts_.push_back(static_cast<int>(n));
}

long TubeEvaluator::key_of(const Vec& x, int dx, int dy, int dz) const {
  int ix = static_cast<int>(std::floor(x[0] / cell_)) + dx;
  int iy = static_cast<int>(std::floor(x[1] / cell_)) + dy;
  int iz = (dim_ == 3 ? static_cast<int>(std::floor(x[2] / cell_)) : 0) + dz;
  return pack_key(ix, iy, iz);
}

void TubeEvaluator::gather(const Vec& x, std::vector<int>& out) const {
  out.clear();
  int zlo = dim_ == 3 ? -1 : 0, zhi = dim_ == 3 ? 1 : 0;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dz = zlo; dz <= zhi; ++dz) {
        long key = key_of(x, dx, dy, dz);
        auto it = std::lower_bound(cell_keys_.begin(), cell_keys_.end(), key);
        if (it == cell_keys_.end() || *it != key) continue;
        int c = static_cast<int>(it - cell_keys_.begin());
        for (int k = cell_starts_[c]; k < cell_starts_[c + 1]; ++k) {
          int i = order_[k];
          if (norm(sub(positions_[i], x, dim_), dim_) <= radius_) out.push_back(i);
        }
      }
}

std::optional<MlsResult> TubeEvaluator::evaluate(const Vec& x) const {
  std::vector<int> idx;
  gather(x, idx);
  const int m = dim_ + 1;
  if (static_cast<int>(idx.size()) < m) return std::nullopt;

  // Only interpolate interior to the cloud: beyond ~1.5 marker gaps the
  // linear fit extrapolates and can produce spurious small values.
  double nearest = 1e300;
  for (int i : idx) nearest = std::min(nearest, norm(sub(positions_[i], x, dim_), dim_));
  if (nearest > 1.5 * spacing_) return std::nullopt;

  double a[4][4] = {};
  double rhs[4] = {};
  for (int i : idx) {
    Vec u = sub(positions_[i], x, dim_);
    double s2 = dot(u, u, dim_) / (radius_ * radius_);
    double w = std::exp(-4.0 * s2) / std::max(s2, 1e-12);
    double b[4] = {1, 0, 0, 0};
    for (int c = 0; c < dim_; ++c) b[c + 1] = u[c] / radius_;
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a[r][c] += w * b[r] * b[c];
      rhs[r] += w * b[r] * values_[i];
    }
  }
  // Gaussian elimination with partial pivoting
  int piv[4] = {0, 1, 2, 3};
  double scale = 0;
  for (int r = 0; r < m; ++r) scale = std::max(scale, std::abs(a[r][r]));
  for (int c = 0; c < m; ++c) {
    int best = c;
    for (int r = c + 1; r < m; ++r)
      if (std::abs(a[piv[r]][c]) > std::abs(a[piv[best]][c])) best = r;
    std::swap(piv[c], piv[best]);
    double p = a[piv[c]][c];
    if (std::abs(p) < 1e-14 * scale) return std::nullopt;  // degenerate neighborhood
    for (int r = c + 1; r < m; ++r) {
      double f = a[piv[r]][c] / p;
      for (int k = c; k < m; ++k) a[piv[r]][k] -= f * a[piv[c]][k];
      rhs[piv[r]] -= f * rhs[piv[c]];
    }
  }
  double coef[4] = {};
  for (int c = m - 1; c >= 0; --c) {
    double s = rhs[piv[c]];
    for (int k = c + 1; k < m; ++k) s -= a[piv[c]][k] * coef[k];
    coef[c] = s / a[piv[c]][c];
  }
  MlsResult res;
  res.value = coef[0];
  for (int c = 0; c < dim_; ++c) res.gradient[c] = coef[c + 1] / radius_;
  return res;
}

// ---------------------------------------------------------------------------
// Tube runner

std::vector<int> TubeSolution::alive_at(int ti) const {
  double t = time_grid.at(ti);
  double tol = 1e-9 * std::max(1.0, std::abs(t));
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(trajectories.size()); ++i) {
    const auto& tr = trajectories[i];
    if (!tr.times.empty() && tr.times.front() <= t + tol && tr.times.back() >= t - tol)
      out.push_back(i);
  }
  return out;
}

int TubeSolution::time_index(double t) const {
  double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (int i = 0; i < static_cast<int>(time_grid.size()); ++i)
    if (std::abs(time_grid[i] - t) <= tol) return i;
  throw ValidationError("time not on the tube time grid");
}

namespace {

int trajectory_time_slot(const MarkerTrajectory& tr, double t) {
  double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (int i = 0; i < static_cast<int>(tr.times.size()); ++i)
    if (std::abs(tr.times[i] - t) <= tol) return i;
  return -1;
}

struct LiveMarker {
  int traj = 0;  // index into TubeSolution::trajectories
  CharacteristicState state;
  VariationalState var;
  double residual = 0;
  bool with_var = false;
  bool on_interface = false;
};

}  // namespace

TubeSolution run_tube(const SourceMode& mode, const VelocityFieldModel& field,
                      const LevelSetModel& phi0, const DomainSpec& domain,
                      const std::vector<double>& time_grid, const TubeConfig& cfg,
                      const OdeOptions& opts, int threads) {
  if (time_grid.size() < 2) throw ValidationError("run_tube needs at least two grid times");
  for (std::size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1]))
      throw ValidationError("run_tube time grid must be strictly increasing");

  // refine the requested grid so that map degeneration is detected (and
  // re-seeded) well before an output time is reached
  std::vector<double> fine;
  for (std::size_t seg = 0; seg + 1 < time_grid.size(); ++seg) {
    double ta = time_grid[seg], tb = time_grid[seg + 1];
    fine.push_back(ta);
    if (cfg.max_segment > 0) {
      int m = static_cast<int>(std::ceil((tb - ta) / cfg.max_segment));
      for (int i = 1; i < m; ++i) fine.push_back(ta + (tb - ta) * i / m);
    }
  }
  fine.push_back(time_grid.back());

  TubeSolution tube;
  tube.mode = mode;
  tube.dim = field.dim;
  tube.band_halfwidth = cfg.band_halfwidth;
  tube.time_grid = fine;

  std::vector<LiveMarker> live;
  auto admit = [&](const Seed& s, double t) {
    LiveMarker m;
    m.traj = static_cast<int>(tube.trajectories.size());
    m.state = {s.xi, s.p0, s.phi0};
    m.on_interface = s.on_interface;
    m.with_var = s.on_interface || cfg.variational_all;
    for (int i = 0; i < field.dim; ++i) m.var.dx_dxi[i][i] = 1.0;
    m.var.dp_dxi = mat0();
    m.var.dphi_dxi = s.p0;
    m.residual = -hamiltonian(mode, field, t, s.xi, s.p0, s.phi0);
    MarkerTrajectory tr;
    tr.id = m.traj;
    tr.xi0 = s.xi;
    tr.on_interface = s.on_interface;
    tr.times.push_back(t);
    tr.states.push_back(m.state);
    tr.residual.push_back(m.residual);
    if (m.with_var) {
      tr.variational.push_back(m.var);
      tr.det_dx_dxi.push_back(det(m.var.dx_dxi, field.dim));
    }
    tube.trajectories.push_back(std::move(tr));
    live.push_back(m);
  };

  for (const Seed& s : seed_tube(phi0, domain, cfg.band_halfwidth, cfg.spacing))
    admit(s, fine.front());

  for (std::size_t seg = 0; seg + 1 < fine.size(); ++seg) {
    double ta = fine[seg], tb = fine[seg + 1];
    std::vector<MarkerTrajectory> results(live.size());
    std::vector<char> ok(live.size(), 1);
    parallel_for(static_cast<long>(live.size()), threads, [&](long i) {
      LiveMarker& m = live[i];
      try {
        results[i] = integrate_characteristic(mode, field, m.state, ta, tb, opts, m.with_var,
                                              {tb}, &m.var, &m.residual);
      } catch (const TubeDegenerate&) {
        ok[i] = 0;  // characteristic left the classical regime; shed it
      } catch (const DegenerateGradient&) {
        ok[i] = 0;
      } catch (const DomainEscape&) {
        ok[i] = 0;
      }
    });
    double min_det = 1e300;
    std::vector<LiveMarker> survivors;
    survivors.reserve(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      LiveMarker& m = live[i];
      if (!ok[i]) continue;
      const MarkerTrajectory& r = results[i];
      m.state = r.states.back();
      m.residual = r.residual.back();
      MarkerTrajectory& tr = tube.trajectories[m.traj];
      tr.times.push_back(tb);
      tr.states.push_back(m.state);
      tr.residual.push_back(m.residual);
      if (m.with_var) {
        m.var = r.variational.back();
        tr.variational.push_back(m.var);
        tr.det_dx_dxi.push_back(r.det_dx_dxi.back());
        min_det = std::min(min_det, r.det_dx_dxi.back());
      }
      survivors.push_back(m);
    }
    live.swap(survivors);
    if (live.empty()) throw TubeDegenerate("all tube markers degenerated at t=" + std::to_string(tb));

    bool last = (seg + 2 == fine.size());
    if (!last && min_det <= cfg.reseed_det) {
      // Re-seed the band at tb. Integrated interface markers are exact
      // solutions of the characteristic system, so they are kept (with a
      // fresh tangent chart). Replacement band markers are NOT assigned
      // interpolated values: each candidate position is pulled back to a
      // t=0 seed through an interpolant of the inverse flow map and then
      // re-integrated exactly from t=0, so marker values stay at ODE
      // accuracy across re-seeds.
      auto ev = make_tube_evaluator(tube, tb);
      tube.reseed_times.push_back(static_cast<int>(seg + 1));

      std::vector<Vec> old_pos(live.size());
      std::vector<std::vector<double>> old_xi(field.dim);
      for (std::size_t i = 0; i < live.size(); ++i) {
        old_pos[i] = live[i].state.x;
        for (int c = 0; c < field.dim; ++c)
          old_xi[c].push_back(tube.trajectories[live[i].traj].xi0[c]);
      }
      std::vector<std::shared_ptr<TubeEvaluator>> inv;
      for (int c = 0; c < field.dim; ++c)
        inv.push_back(std::make_shared<TubeEvaluator>(field.dim, old_pos, old_xi[c]));

      std::vector<LiveMarker> kept;
      std::vector<Vec> if_pos;
      for (LiveMarker& m : live) {
        if (!m.on_interface) continue;
        m.var = VariationalState{};
        for (int i = 0; i < field.dim; ++i) m.var.dx_dxi[i][i] = 1.0;
        m.var.dphi_dxi = m.state.p;
        MarkerTrajectory& tr = tube.trajectories[m.traj];
        tr.variational.back() = m.var;
        tr.det_dx_dxi.back() = 1.0;
        kept.push_back(m);
        if_pos.push_back(m.state.x);
      }
      live.swap(kept);

      auto near_interface = [&](const Vec& y, double lo_d, double hi_d) {
        double best = 1e300;
        for (const Vec& q : if_pos) best = std::min(best, norm(sub(y, q, field.dim), field.dim));
        return best > lo_d && best <= hi_d;
      };

      struct Cand {
        Vec xi = vec0();
        bool iface = false;
      };
      std::vector<Cand> cands;
      Vec lo = domain.bounding_lower(), hi = domain.bounding_upper();
      int count[3] = {1, 1, 1};
      for (int i = 0; i < field.dim; ++i)
        count[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / cfg.spacing)) + 1;
      for (int i = 0; i < count[0]; ++i)
        for (int j = 0; j < count[1]; ++j)
          for (int k = 0; k < count[2]; ++k) {
            Vec x = vec0();
            x[0] = lo[0] + i * cfg.spacing;
            x[1] = lo[1] + j * cfg.spacing;
            if (field.dim == 3) x[2] = lo[2] + k * cfg.spacing;
            if (!domain.contains(x)) continue;
            auto r = ev->evaluate(x);
            if (!r || std::abs(r->value) > cfg.band_halfwidth) continue;
            Vec xi = vec0();
            bool have = true;
            for (int c = 0; c < field.dim; ++c) {
              auto q = inv[c]->evaluate(x);
              if (!q) {
                have = false;
                break;
              }
              xi[c] = q->value;
            }
            if (!have || !domain.contains(xi)) continue;
            cands.push_back({xi, false});
            if (std::abs(r->value) <= cfg.spacing * norm(r->gradient, field.dim)) {
              // interface infill candidate: exact Newton projection on phi0
              Vec y = xi;
              if (project_to_zero(phi0, y, 1e-12, 100) && domain.contains(y))
                cands.push_back({y, true});
            }
          }

      struct CandResult {
        CharacteristicState st;
        double residual = 0;
        char ok = 0;
      };
      std::vector<CandResult> cres(cands.size());
      parallel_for(static_cast<long>(cands.size()), threads, [&](long i) {
        Vec xi = cands[i].xi;
        Vec g = phi0.grad(xi);
        if (norm(g, field.dim) < 1e-8) return;
        CharacteristicState st{xi, g, phi0.eval(xi)};
        try {
          auto tr = integrate_characteristic(mode, field, st, fine.front(), tb, opts, false, {tb});
          cres[i].st = tr.states.back();
          cres[i].residual = tr.residual.back();
          cres[i].ok = 1;
        } catch (const TubeDegenerate&) {
        } catch (const DegenerateGradient&) {
        } catch (const DomainEscape&) {
        }
      });

      auto admit_at = [&](const Vec& xi0, const CandResult& c, bool iface) {
        LiveMarker m;
        m.traj = static_cast<int>(tube.trajectories.size());
        m.state = c.st;
        m.on_interface = iface;
        m.with_var = iface || cfg.variational_all;
        for (int i = 0; i < field.dim; ++i) m.var.dx_dxi[i][i] = 1.0;
        m.var.dp_dxi = mat0();
        m.var.dphi_dxi = c.st.p;
        m.residual = c.residual;
        MarkerTrajectory tr;
        tr.id = m.traj;
        tr.xi0 = xi0;
        tr.on_interface = iface;
        tr.times.push_back(tb);
        tr.states.push_back(c.st);
        tr.residual.push_back(c.residual);
        if (m.with_var) {
          tr.variational.push_back(m.var);
          tr.det_dx_dxi.push_back(1.0);
        }
        tube.trajectories.push_back(std::move(tr));
        live.push_back(m);
      };
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!cres[i].ok) continue;
        if (cands[i].iface) {
          // only accepted as interface infill in a genuine coverage gap
          // next to the kept interface markers
          if (near_interface(cres[i].st.x, 0.5 * cfg.spacing, 2.0 * cfg.spacing)) {
            admit_at(cands[i].xi, cres[i], true);
            if_pos.push_back(cres[i].st.x);
          }
        } else if (std::abs(cres[i].st.phi) <= cfg.band_halfwidth) {
          admit_at(cands[i].xi, cres[i], false);
        }
      }
      if (live.empty()) throw TubeDegenerate("re-seeding produced no markers");
    }
  }
  return tube;
}

std::shared_ptr<TubeEvaluator> make_tube_evaluator(const TubeSolution& tube, double t) {
  int ti = tube.time_index(t);
  double tt = tube.time_grid[ti];
  std::vector<Vec> pos;
  std::vector<double> val;
  for (int i : tube.alive_at(ti)) {
    const MarkerTrajectory& tr = tube.trajectories[i];
    int slot = trajectory_time_slot(tr, tt);
    if (slot < 0) continue;
    pos.push_back(tr.states[slot].x);
    val.push_back(tr.states[slot].phi);
  }
  return std::make_shared<TubeEvaluator>(tube.dim, std::move(pos), std::move(val));
}

std::optional<double> evaluate_tube(const TubeSolution& tube, double t, const Vec& x) {
  auto r = make_tube_evaluator(tube, t)->evaluate(x);
  if (!r) return std::nullopt;
  return r->value;
}

GradNormStats interface_gradnorm_stats(const TubeSolution& tube, double t, double alpha) {
  GradNormStats st;
  int ti = tube.time_index(t);
  double tt = tube.time_grid[ti];
  double sum = 0;
  for (int i : tube.alive_at(ti)) {
    const MarkerTrajectory& tr = tube.trajectories[i];
    if (!tr.on_interface) continue;
    int slot = trajectory_time_slot(tr, tt);
    if (slot < 0) continue;
    double pn = norm(tr.states[slot].p, tube.dim);
    double p0 = norm(tr.states.front().p, tube.dim);
    if (p0 < 1e-300) continue;
    double rel = std::abs(pn - p0) / p0;
    st.max_rel_drift = std::max(st.max_rel_drift, rel);
    sum += rel;
    if (tube.mode.kind == SourceKind::grad_bounding) {
      double lo = tube.mode.beta - alpha, hi = tube.mode.beta + alpha;
      st.max_band_violation =
          std::max({st.max_band_violation, lo - pn, pn - hi, 0.0});
    }
    ++st.markers;
  }
  if (st.markers > 0) st.mean_rel_drift = sum / st.markers;
  return st;
}

void export_tube_csv(const TubeSolution& tube, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << "time,marker_id,on_interface,x0,x1,x2,p0,p1,p2,phi,det_dx_dxi\n";
  for (const MarkerTrajectory& tr : tube.trajectories)
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const CharacteristicState& s = tr.states[k];
      double dd = k < tr.det_dx_dxi.size() ? tr.det_dx_dxi[k] : 0.0;
      out << g17(tr.times[k]) << ',' << tr.id << ',' << (tr.on_interface ? 1 : 0);
      for (int i = 0; i < 3; ++i) out << ',' << g17(s.x[i]);
      for (int i = 0; i < 3; ++i) out << ',' << g17(s.p[i]);
      out << ',' << g17(s.phi) << ',' << g17(dd) << '\n';
    }
}

double measure_v4(const TubeSolution& tube) {
  double v4 = 0;
  for (const MarkerTrajectory& tr : tube.trajectories) {
    if (!tr.on_interface || tr.variational.size() < 2) continue;
    for (std::size_t k = 1; k < tr.variational.size(); ++k) {
      double dt = tr.times[k] - tr.times[k - 1];
      if (!(dt > 0)) continue;
      for (int i = 0; i < tube.dim; ++i)
        for (int j = 0; j < tube.dim; ++j)
          v4 = std::max(v4, std::abs(tr.variational[k].dx_dxi[i][j] -
                                     tr.variational[k - 1].dx_dxi[i][j]) /
                                dt);
    }
  }
  return v4;
}

}  // namespace lsl
