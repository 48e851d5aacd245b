#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lsl/cutoffs.hpp"
#include "lsl/domain.hpp"
#include "lsl/flow.hpp"
#include "lsl/ode.hpp"

namespace lsl {

struct GridSpec {
  DomainSpec domain;  // box only
  int n = 8;
  double h = 0;

  static GridSpec make(const DomainSpec& domain, int n);
  int dim() const { return domain.dim; }
  int per_axis() const { return n + 1; }
  long nodes() const;
  long index(int i, int j, int k = 0) const;
  Vec pos(int i, int j, int k = 0) const;
  bool is_boundary(int i, int j, int k = 0) const;
};

struct GridField {
  GridSpec spec;
  double t = 0;
  std::vector<double> values;

  static GridField sample(const GridSpec& spec, const std::function<double(const Vec&)>& f,
                          double t = 0);
  double max_abs() const;
};

struct SchemeConfig {
  enum class Integrator { euler, rk2_tvd };
  double cfl = 0.4;
  Integrator integrator = Integrator::rk2_tvd;
  double v0_bound = 0;  // measured sup |R|, inflated
  double l_r = 0;       // measured Lipschitz bound of R in each p component, inflated
};

// 1.1 * max sampled |R| over (t,x,p); the scheme's V0.
double measure_v0_bound(const SourceMode& mode, const VelocityFieldModel& field,
                        const CutoffConfig& cut, const DomainSpec& domain, double t_max,
                        int samples, unsigned seed = 9001);

// 1.1 * max sampled |dR/dp_i| (central differences).
double measure_lipschitz_R(const SourceMode& mode, const VelocityFieldModel& field,
                           const CutoffConfig& cut, const DomainSpec& domain, double t_max,
                           int samples, unsigned seed = 9002);

// phi0(X(0,t,x)) for a boundary node; the Dirichlet datum of the grid problem.
double boundary_value(const VelocityFieldModel& field, const DomainSpec& domain,
                      const std::function<double(const Vec&)>& phi0, double t, const Vec& x,
                      const OdeOptions& opts);

// Local Lax-Friedrichs flux for G(t,x,p,u) = v.p - u R(t,x,p):
//   G(t,x,(pm+pp)/2,u) - sum_i sigma_i (pp-pm)_i / 2,
// sigma_i = |v_i(t,x)| + |u| l_r. Nondecreasing in pm, nonincreasing in pp.
double numerical_hamiltonian(const SourceMode& mode, const VelocityFieldModel& field,
                             const CutoffConfig& cut, const DomainSpec& domain,
                             const SchemeConfig& scheme, double t, const Vec& x, const Vec& p_minus,
                             const Vec& p_plus, double u);

// cfl * h / (dim * max sigma) with max sigma over nodes and axes (floor 1e-8).
double cfl_dt(const GridField& state, const VelocityFieldModel& field, const SchemeConfig& scheme,
              double t);

struct StepSeriesRow {
  double t = 0;
  double dt = 0;
  double max_abs = 0;
};

struct GridRunResult {
  std::vector<GridField> snapshots;
  std::vector<StepSeriesRow> series;  // one row per accepted step
  long steps = 0;
};

// Grid marcher with per-node caches of the separable field's spatial parts,
// the boundary collar cut-off, and (when the boundary is stationary for the
// field) the Dirichlet values.
class GridSolver {
 public:
  GridSolver(const GridSpec& spec, const SourceMode& mode, const VelocityFieldModel& field,
             std::function<double(const Vec&)> phi0, const CutoffConfig& cut,
             const SchemeConfig& scheme, const OdeOptions& boundary_ode, double t_max,
             int threads = 1);

  double dt_for(const GridField& state) const;
  double step(GridField& state) const;  // one CFL step; returns the dt taken
  double step(GridField& state, double dt_cap) const;
  GridRunResult run_to_time(const GridField& state0, double T,
                            const std::vector<double>& output_times) const;
  const SchemeConfig& scheme() const { return scheme_; }

 private:
  GridSpec spec_;
  SourceMode mode_;
  VelocityFieldModel field_;
  std::function<double(const Vec&)> phi0_;
  CutoffConfig cut_;
  SchemeConfig scheme_;
  OdeOptions boundary_ode_;
  int threads_ = 1;
  double tf_max_ = 1.0;
  bool boundary_stationary_ = false;
  std::vector<Vec> v_sp_;
  std::vector<Mat> j_sp_;
  std::vector<double> eta1_;
  std::vector<long> boundary_nodes_;
  std::vector<double> boundary_phi0_;  // cached when stationary

  void apply_boundary(GridField& state, double t) const;
  void stage(const std::vector<double>& u, double t, double dt, std::vector<double>& out) const;
};

// Uncached single step (convenience wrapper around GridSolver).
GridField step(const GridField& state, const SourceMode& mode, const VelocityFieldModel& field,
               const std::function<double(const Vec&)>& phi0, const CutoffConfig& cut,
               const SchemeConfig& scheme, const OdeOptions& boundary_ode);

void write_grid_dump(const GridField& state, const std::string& path);

}  // namespace lsl
