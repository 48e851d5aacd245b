#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsl/characteristics.hpp"
#include "lsl/domain.hpp"
#include "lsl/levelset.hpp"

namespace lsl {

struct Seed {
  Vec xi = vec0();
  Vec p0 = vec0();
  double phi0 = 0;
  bool on_interface = false;
};

// Regular-grid seeds restricted to {|phi0| <= band_halfwidth}, plus a family
// Newton-projected onto the zero level-set (|phi0| <= 1e-12 after projection).
std::vector<Seed> seed_tube(const LevelSetModel& phi0, const DomainSpec& domain,
                            double band_halfwidth, double spacing);

struct MlsResult {
  double value = 0;
  Vec gradient = vec0();
};

// Moving-least-squares scalar field over one marker slice: linear basis,
// Gaussian weight with a singular factor so node values are interpolated,
// support radius 3x the median nearest-neighbor spacing. Returns nullopt
// (out of tube) when fewer than dim+1 markers fall inside the radius.
class TubeEvaluator {
 public:
  TubeEvaluator(int dim, std::vector<Vec> positions, std::vector<double> values);
  std::optional<MlsResult> evaluate(const Vec& x) const;
  double radius() const { return radius_; }
  long size() const { return static_cast<long>(values_.size()); }

 private:
  int dim_;
  double radius_ = 0;
  double spacing_ = 0;  // median nearest-neighbor gap
  double cell_ = 0;
  std::vector<Vec> positions_;
  std::vector<double> values_;
  std::vector<long> cell_keys_;    // sorted
  std::vector<int> cell_starts_;   // offsets into order_
  std::vector<int> order_;
  long key_of(const Vec& x, int dx, int dy, int dz) const;
  void gather(const Vec& x, std::vector<int>& out) const;
};

struct TubeConfig {
  double band_halfwidth = 0.05;
  double spacing = 0.01;
  double reseed_det = 0.1;        // re-seed when min det(dx/dxi) drops below
  bool variational_all = false;   // variational system for every marker, not just interface
  double max_segment = 0.05;      // internal subdivision so degeneration is caught early
};

struct TubeSolution {
  SourceMode mode;
  int dim = 2;
  double band_halfwidth = 0;
  std::vector<double> time_grid;
  std::vector<MarkerTrajectory> trajectories;
  std::vector<int> reseed_times;  // indices into time_grid where re-seeding happened

  // Markers alive at time_grid[ti] (trajectory indices, ascending).
  std::vector<int> alive_at(int ti) const;
  int time_index(double t) const;  // exact-ish lookup, ValidationError if absent
};

// Integrates the seeded marker cloud over time_grid (ascending, first entry
// is the start time). Interface markers always carry the variational system.
TubeSolution run_tube(const SourceMode& mode, const VelocityFieldModel& field,
                      const LevelSetModel& phi0, const DomainSpec& domain,
                      const std::vector<double>& time_grid, const TubeConfig& cfg,
                      const OdeOptions& opts, int threads = 1);

std::shared_ptr<TubeEvaluator> make_tube_evaluator(const TubeSolution& tube, double t);

// Convenience single-point evaluation (builds the slice evaluator each call;
// use make_tube_evaluator for loops).
std::optional<double> evaluate_tube(const TubeSolution& tube, double t, const Vec& x);

struct GradNormStats {
  double max_rel_drift = 0;   // grad_preserving / linear_transport: | |p(t)|-|p(0)| | / |p(0)|
  double mean_rel_drift = 0;
  double max_band_violation = 0;  // grad_bounding: distance of |p| outside [beta-alpha, beta+alpha]
  int markers = 0;
};

GradNormStats interface_gradnorm_stats(const TubeSolution& tube, double t, double alpha = 0);

void export_tube_csv(const TubeSolution& tube, const std::string& path);

// Advisory V4: max sampled |d/ds dx_dxi| over the stored interface
// trajectories (finite differences between stored times).
double measure_v4(const TubeSolution& tube);

}  // namespace lsl
