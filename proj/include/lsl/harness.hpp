#pragma once

#include <string>
#include <vector>

#include "lsl/analysis.hpp"
#include "lsl/barrier.hpp"
#include "lsl/config.hpp"
#include "lsl/eulerian.hpp"
#include "lsl/tube.hpp"

namespace lsl {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0;
  double threshold = 0;
  std::string detail;
};

// Constants resolved at run time (sampled bounds, auto-chosen scales).
struct MeasuredConstants {
  double v0 = 0;     // inflated sup |R|
  double l_r = 0;    // inflated Lipschitz bound of R in p
  double alpha = 0;  // inflated sup spectral radius of the deformation tensor
  double v4 = 0;     // max tangent-matrix rate along interface trajectories
  double tstar = 1;  // advisory horizon derived from v4
  double eps = 0;    // boundary collar scale actually used
  double m0 = 0;     // comparison band half-width actually used
  double h = 0;      // grid spacing
};

struct ExperimentResult {
  RunConfig config;
  TubeSolution tube;
  GridRunResult grid;
  MeasuredConstants measured;
  std::vector<CheckResult> checks;
  bool all_passed = true;
  double wall_seconds = 0;
};

// Runs the marker tube and the grid solver for one configuration and applies
// the cross-validation checks selected by config.checks ("all", "none", or a
// comma list of check names).
ExperimentResult run_experiment(const RunConfig& cfg, int threads);

// Writes config.txt, markers.csv, series.csv, grid snapshots, interface
// point clouds, and manifest.json. The directory is created atomically
// (staged under a temporary name, then renamed); it must not already exist.
// Returns the relative names of the files written.
std::vector<std::string> write_outputs(const ExperimentResult& res, const std::string& out_dir);

std::string manifest_json(const ExperimentResult& res, const std::vector<std::string>& files);

void write_interface_csv(const InterfaceSet& set, const std::string& path);

// Re-runs a configuration over a ladder of grid resolutions and reports the
// tube-band sup error and the marker-vs-grid interface error per resolution,
// with observed orders between consecutive rows.
std::vector<ConvergenceRow> run_convergence(const RunConfig& base, const std::vector<int>& ns,
                                            int threads);

}  // namespace lsl
