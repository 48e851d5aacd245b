#include "lsl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "lsl/csvfmt.hpp"
#include "lsl/errors.hpp"
#include "lsl/flow.hpp"

namespace lsl {

namespace {

namespace fs = std::filesystem;

bool check_enabled(const std::string& checks, const std::string& name) {
  if (checks == "all") return true;
  if (checks == "none") return false;
  std::stringstream ss(checks);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item == name) return true;
  return false;
}

std::vector<double> full_time_grid(const RunConfig& cfg) {
  std::vector<double> grid;
  if (cfg.output_times.front() > 0) grid.push_back(0.0);
  grid.insert(grid.end(), cfg.output_times.begin(), cfg.output_times.end());
  return grid;
}

double min_interface_boundary_distance(const TubeSolution& tube, const DomainSpec& domain) {
  double bd = 1e300;
  for (const MarkerTrajectory& tr : tube.trajectories) {
    if (!tr.on_interface) continue;
    for (const CharacteristicState& s : tr.states)
      bd = std::min(bd, domain.boundary_distance(s.x));
  }
  return bd;
}

// Shared run-time context: everything both run_experiment and the
// convergence ladder need besides the grid resolution.
struct RunContext {
  DomainSpec domain;
  VelocityFieldModel field;
  LevelSetModel phi0;
  std::vector<double> time_grid;
  TubeSolution tube;
  MeasuredConstants measured;  // h left unset
  CutoffConfig cut;
  SchemeConfig scheme;
};

RunContext prepare_context(const RunConfig& cfg, int threads) {
  RunContext ctx;
  ctx.domain = cfg.make_domain();
  ctx.field = cfg.make_field();
  ctx.phi0 = cfg.make_phi0();
  ctx.time_grid = full_time_grid(cfg);

  TubeConfig tcfg;
  tcfg.band_halfwidth = cfg.band;
  tcfg.spacing = cfg.spacing;
  tcfg.reseed_det = cfg.reseed_det;
  tcfg.variational_all = cfg.mode.kind != SourceKind::linear_transport;
  ctx.tube = run_tube(cfg.mode, ctx.field, ctx.phi0, ctx.domain, ctx.time_grid, tcfg, cfg.ode,
                      threads);

  ctx.measured.alpha = estimate_alpha(ctx.field, ctx.domain, cfg.T, 2000);
  ctx.measured.v4 = measure_v4(ctx.tube);
  ctx.measured.tstar = estimate_tstar(ctx.measured.v4);

  double bd = min_interface_boundary_distance(ctx.tube, ctx.domain);
  ctx.measured.eps = cfg.cutoff_eps > 0 ? cfg.cutoff_eps : 0.25 * bd;
  if (!(ctx.measured.eps > 0))
    throw ValidationError("interface markers touch the boundary; no collar scale exists");
  if (bd < 3.0 * ctx.measured.eps)
    throw ValidationError("cutoff.eps too large: the source cut-off is not 1 on the interface");

  ctx.cut.eps = ctx.measured.eps;
  ctx.cut.beta = cfg.mode.beta;
  ctx.cut.alpha = ctx.measured.alpha;
  ctx.cut.validate();

  ctx.measured.v0 =
      measure_v0_bound(cfg.mode, ctx.field, ctx.cut, ctx.domain, cfg.T, 100000);
  ctx.measured.l_r =
      measure_lipschitz_R(cfg.mode, ctx.field, ctx.cut, ctx.domain, cfg.T, 20000);
  ctx.measured.m0 = cfg.m0 > 0 ? cfg.m0 : 0.5 * cfg.band;

  ctx.scheme.cfl = cfg.cfl;
  ctx.scheme.integrator = cfg.integrator;
  ctx.scheme.v0_bound = ctx.measured.v0;
  ctx.scheme.l_r = ctx.measured.l_r;
  return ctx;
}

GridRunResult run_grid(const RunConfig& cfg, const RunContext& ctx, int n, int threads) {
  GridSpec spec = GridSpec::make(ctx.domain, n);
  GridSolver solver(spec, cfg.mode, ctx.field, ctx.phi0.eval, ctx.cut, ctx.scheme, cfg.ode, cfg.T,
                    threads);
  GridField state0 = GridField::sample(spec, ctx.phi0.eval, 0.0);
  return solver.run_to_time(state0, cfg.T, ctx.time_grid);
}

double max_hamiltonian_residual(const RunConfig& cfg, const RunContext& ctx) {
  double worst = 0;
  for (const MarkerTrajectory& tr : ctx.tube.trajectories) {
    if (!tr.on_interface) continue;
    for (std::size_t s = 0; s < tr.times.size(); ++s) {
      const CharacteristicState& st = tr.states[s];
      double H = hamiltonian(cfg.mode, ctx.field, tr.times[s], st.x, st.p, st.phi);
      worst = std::max(worst, std::abs(H + tr.residual[s]));
    }
  }
  return worst;
}

double max_variational_defect(const RunContext& ctx) {
  const int d = ctx.tube.dim;
  double worst = 0;
  for (const MarkerTrajectory& tr : ctx.tube.trajectories) {
    if (!tr.on_interface || tr.variational.empty()) continue;
    for (std::size_t s = 0; s < tr.variational.size(); ++s) {
      const VariationalState& v = tr.variational[s];
      const Vec& p = tr.states[s].p;
      for (int j = 0; j < d; ++j) {
        double lhs = v.dphi_dxi[j];
        double rhs = 0;
        for (int i = 0; i < d; ++i) rhs += p[i] * v.dx_dxi[i][j];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

double max_interface_phi(const RunContext& ctx) {
  double worst = 0;
  for (const MarkerTrajectory& tr : ctx.tube.trajectories) {
    if (!tr.on_interface) continue;
    for (const CharacteristicState& s : tr.states) worst = std::max(worst, std::abs(s.phi));
  }
  return worst;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, int threads) {
  auto t_begin = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = cfg;

  RunContext ctx = prepare_context(cfg, threads);
  res.grid = run_grid(cfg, ctx, cfg.grid_n, threads);
  res.measured = ctx.measured;
  res.measured.h = res.grid.snapshots.front().spec.h;
  const double h = res.measured.h;

  auto add = [&](const std::string& name, double measured, double threshold,
                 const std::string& detail = "") {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    c.threshold = threshold;
    c.passed = measured <= threshold;
    c.detail = detail;
    res.checks.push_back(c);
    res.all_passed = res.all_passed && c.passed;
  };

  if (check_enabled(cfg.checks, "interface_hausdorff")) {
    double worst = 0;
    for (const GridField& snap : res.grid.snapshots) {
      InterfaceSet grid_if = extract_interface(snap);
      InterfaceSet marker_if = marker_interface(ctx.tube, snap.t);
      worst = std::max(worst, hausdorff(grid_if, marker_if));
    }
    add("interface_hausdorff", worst, (cfg.dimension == 2 ? 2.0 : 3.0) * h,
        "max over snapshot times of the grid-contour vs marker-cloud distance");
  }

  if (check_enabled(cfg.checks, "gradnorm") && cfg.mode.kind != SourceKind::linear_transport) {
    GradNormStats st = interface_gradnorm_stats(ctx.tube, cfg.T, ctx.measured.alpha);
    if (cfg.mode.kind == SourceKind::grad_preserving)
      add("gradnorm", st.max_rel_drift, 1e-6, "relative drift of |p| on interface markers");
    else
      add("gradnorm", st.max_band_violation, 1e-6,
          "distance of |p| outside [beta-alpha, beta+alpha] on interface markers");
  }

  if (check_enabled(cfg.checks, "hamiltonian"))
    add("hamiltonian", max_hamiltonian_residual(cfg, ctx), 1e-6,
        "max |H + q| along interface characteristics");

  if (check_enabled(cfg.checks, "variational"))
    add("variational", max_variational_defect(ctx), 1e-5,
        "max |dphi/dxi - p . dx/dxi| along interface characteristics");

  if (check_enabled(cfg.checks, "interface_phi"))
    add("interface_phi", max_interface_phi(ctx), 1e-8, "max |phi| on interface markers");

  if (check_enabled(cfg.checks, "envelope")) {
    int stride = std::max(1, cfg.grid_n / 32);
    EnvelopeReport rep =
        envelope_check(res.grid.snapshots, ctx.field, ctx.domain, ctx.phi0.eval, ctx.measured.v0,
                       ctx.measured.eps, 4.0 * h, stride, cfg.ode, threads);
    add("envelope", static_cast<double>(rep.violations), 0.0,
        "nodes outside the discontinuous-rate envelope (checked " +
            std::to_string(rep.checked) + ", worst excess " + g17(rep.worst_excess) + ")");
  }

  if (check_enabled(cfg.checks, "comparison")) {
    ComparisonReport rep =
        compare_in_tube(res.grid.snapshots, ctx.tube, ctx.measured.m0, ctx.time_grid);
    double sup = 0;
    long mism = 0;
    for (double e : rep.sup_error) sup = std::max(sup, e);
    for (long m : rep.sign_mismatches) mism += m;
    add("comparison", sup, 6.0 * h,
        "sup grid-vs-tube error over band nodes (sign mismatches: " + std::to_string(mism) + ")");
  }

  res.tube = std::move(ctx.tube);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return res;
}

void write_interface_csv(const InterfaceSet& set, const std::string& path) {
  std::string text = "x0,x1,x2\n";
  for (const Vec& p : set.points) {
    text += g17(p[0]);
    text += ',';
    text += g17(set.dim > 1 ? p[1] : 0.0);
    text += ',';
    text += g17(set.dim > 2 ? p[2] : 0.0);
    text += '\n';
  }
  write_text_file(path, text);
}

std::string manifest_json(const ExperimentResult& res, const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["run_id"] = res.config.run_id;
  j["config"] = res.config.echo();
  j["measured"] = {{"v0", res.measured.v0},     {"l_r", res.measured.l_r},
                   {"alpha", res.measured.alpha}, {"v4", res.measured.v4},
                   {"tstar", res.measured.tstar}, {"eps", res.measured.eps},
                   {"m0", res.measured.m0},       {"h", res.measured.h}};
  j["grid"] = {{"n", res.config.grid_n}, {"steps", res.grid.steps}};
  j["tube"] = {{"markers", res.tube.trajectories.size()},
               {"reseeds", res.tube.reseed_times.size()}};
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : res.checks)
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"measured", c.measured},
                           {"threshold", c.threshold},
                           {"detail", c.detail}});
  j["all_passed"] = res.all_passed;
  j["wall_seconds"] = res.wall_seconds;
  j["files"] = files;
  return j.dump(2) + "\n";
}

std::vector<std::string> write_outputs(const ExperimentResult& res, const std::string& out_dir) {
  fs::path target(out_dir);
  if (fs::exists(target)) throw ValidationError("output directory already exists: " + out_dir);
  fs::path stage = target;
  stage += ".tmp." + std::to_string(static_cast<long>(::getpid()));
  fs::remove_all(stage);
  fs::create_directories(stage);

  std::vector<std::string> files;
  auto emit = [&](const std::string& name) {
    files.push_back(name);
    return (stage / name).string();
  };

  std::string cfg_text;
  for (const auto& [k, v] : res.config.echo()) cfg_text += k + " = " + v + "\n";
  write_text_file(stage / "config.txt", cfg_text);
  files.push_back("config.txt");

  export_tube_csv(res.tube, emit("markers.csv"));

  std::string series = "t,dt,max_abs\n";
  for (const StepSeriesRow& r : res.grid.series)
    series += g17(r.t) + "," + g17(r.dt) + "," + g17(r.max_abs) + "\n";
  write_text_file(stage / "series.csv", series);
  files.push_back("series.csv");

  for (std::size_t i = 0; i < res.grid.snapshots.size(); ++i) {
    const GridField& snap = res.grid.snapshots[i];
    write_grid_dump(snap, emit("grid_t" + std::to_string(i) + ".txt"));
    write_interface_csv(extract_interface(snap),
                        emit("interface_grid_t" + std::to_string(i) + ".csv"));
    write_interface_csv(marker_interface(res.tube, snap.t),
                        emit("interface_markers_t" + std::to_string(i) + ".csv"));
  }

  write_text_file(stage / "manifest.json", manifest_json(res, files));
  files.push_back("manifest.json");

  fs::rename(stage, target);
  return files;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& base, const std::vector<int>& ns,
                                            int threads) {
  RunContext ctx = prepare_context(base, threads);
  const double T = base.T;
  std::vector<ConvergenceRow> rows;
  InterfaceSet marker_if = marker_interface(ctx.tube, T);
  for (int n : ns) {
    GridRunResult grid = run_grid(base, ctx, n, threads);
    const GridField& last = grid.snapshots.back();
    ConvergenceRow row;
    row.n = n;
    row.interface_error = hausdorff(extract_interface(last), marker_if);
    ComparisonReport rep = compare_in_tube({last}, ctx.tube, ctx.measured.m0, {T});
    row.tube_sup_error = rep.sup_error.front();
    if (!rows.empty()) {
      row.order_interface = std::log2(rows.back().interface_error / row.interface_error);
      row.order_tube = std::log2(rows.back().tube_sup_error / row.tube_sup_error);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lsl
