#pragma once

#include <string>
#include <vector>

#include "lsl/eulerian.hpp"
#include "lsl/tube.hpp"

namespace lsl {

struct InterfaceSet {
  enum class Source { grid_contour, marker_cloud, analytic };
  int dim = 2;
  Source source = Source::grid_contour;
  std::vector<Vec> points;
};

// Zero level-set vertices by linear interpolation along sign-changing grid
// edges (marching-squares/cubes vertex set; no connectivity).
InterfaceSet extract_interface(const GridField& grid);

// The on_interface marker positions at a tube time.
InterfaceSet marker_interface(const TubeSolution& tube, double t);

// Dense analytic sampling of a circle/sphere (testing aid).
InterfaceSet analytic_sphere_interface(int dim, const Vec& center, double radius, int samples);

double hausdorff(const InterfaceSet& a, const InterfaceSet& b);

struct DriftStats {
  double max_residual = 0;   // |d|p|/ds + |p| <(grad v) nu, nu>| over stored times
  double mean_residual = 0;
  int markers = 0;
};

// Checks the gradient-drift identity of the unmodified transport equation on
// stored linear_transport trajectories (central differences of |p| in time).
DriftStats gradient_drift_unmodified(const VelocityFieldModel& field,
                                     const std::vector<MarkerTrajectory>& trajectories, double t);

struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> sup_error;       // per time, over band nodes
  std::vector<long> band_node_counts;  // per time
  std::vector<long> sign_mismatches;   // per time, nodes where grid and tube disagree in sign
  double h = 0;
  double m0 = 0;
};

// sup |phi_grid - phi_tube| over grid nodes with |phi_tube| <= m0, per time.
ComparisonReport compare_in_tube(const std::vector<GridField>& snapshots, const TubeSolution& tube,
                                 double m0, const std::vector<double>& times);

struct ConvergenceRow {
  int n = 0;
  double interface_error = 0;
  double tube_sup_error = 0;
  double order_interface = 0;  // log2(previous/current); 0 on the first row
  double order_tube = 0;
};

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows);

}  // namespace lsl
