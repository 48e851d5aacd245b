// End-to-end acceptance gate. Each numbered criterion prints exactly one
// PASS/FAIL line with its measured value and pinned threshold; the process
// exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lsl/analysis.hpp"
#include "lsl/harness.hpp"

using namespace lsl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, double measured, double threshold,
            const std::string& detail = "") {
  std::printf("criterion %2d %-28s %s  measured %.6e  threshold %.6e%s%s\n", id, name.c_str(),
              pass ? "PASS" : "FAIL", measured, threshold, detail.empty() ? "" : "  ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

int thread_count() { return 8; }

// One experiment per distinct config text, shared across criteria.
std::map<std::string, ExperimentResult>& cache() {
  static std::map<std::string, ExperimentResult> c;
  return c;
}

const ExperimentResult& experiment(const std::string& config_text) {
  auto it = cache().find(config_text);
  if (it == cache().end()) {
    auto cfg = parse_config(config_text);
    it = cache().emplace(config_text, run_experiment(cfg, thread_count())).first;
  }
  return it->second;
}

const GridField& snapshot_at(const GridRunResult& grid, double t) {
  for (const auto& s : grid.snapshots)
    if (std::abs(s.t - t) <= 1e-9) return s;
  throw ValidationError("no snapshot at requested time");
}

const CheckResult* find_check(const ExperimentResult& res, const std::string& name) {
  for (const auto& c : res.checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<CharacteristicState> band_seeds(const RunConfig& cfg, int count, unsigned seed) {
  auto phi0 = cfg.make_phi0();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<CharacteristicState> out;
  while (static_cast<int>(out.size()) < count) {
    Vec x = vec0();
    for (int d = 0; d < cfg.dimension; ++d) x[d] = u(rng);
    double f = phi0.eval(x);
    if (std::abs(f) > cfg.band) continue;
    Vec g = phi0.grad(x);
    if (norm(g, cfg.dimension) < 0.1) continue;  // skip the saturation plateau
    CharacteristicState s;
    s.x = x;
    s.p = g;
    s.phi = f;
    out.push_back(s);
  }
  return out;
}

// --- criteria ---------------------------------------------------------------

void criterion_1_gradient_conservation() {
  double worst = 0;
  std::string detail;
  for (const char* preset : {"rotation2d", "vortex2d", "shear2d"}) {
    const auto& res = experiment(std::string("preset = ") + preset + "\n");
    auto st = interface_gradnorm_stats(res.tube, 1.0);
    worst = std::max(worst, st.max_rel_drift);
    detail += std::string(preset) + "=" + std::to_string(st.max_rel_drift) + " ";
  }
  report(1, "gradient-conservation", worst <= 1e-6, worst, 1e-6);
}

void criterion_2_unmodified_drift() {
  // shear at full strength (gamma = 1) under plain transport; the expected
  // drift was measured once with a step-halved RK4 oracle and frozen here
  auto cfg = parse_config(
      "preset = shear2d\n"
      "field.amplitude = 1\n"
      "mode = linear_transport\n"
      "checks = none\n");
  TubeConfig tc;
  tc.band_halfwidth = cfg.band;
  tc.spacing = cfg.spacing;
  tc.reseed_det = cfg.reseed_det;
  auto tube = run_tube(cfg.mode, cfg.make_field(), cfg.make_phi0(), cfg.make_domain(),
                       {0.0, 0.5, 1.0}, tc, cfg.ode, thread_count());
  double drift = interface_gradnorm_stats(tube, 1.0).max_rel_drift;
  const double frozen = 4.6977329511;
  bool pass = drift >= 0.05 && drift >= 0.8 * frozen && drift <= 1.2 * frozen;
  report(2, "unmodified-drift", pass, drift, 0.8 * frozen, "upper 1.2x frozen oracle");
}

void criterion_3_mode_independence() {
  const char* base = "preset = vortex2d\nchecks = none\n";
  std::vector<InterfaceSet> ifaces;
  double h = 0;
  for (const std::string mode_lines :
       {std::string(""), std::string("mode = linear_transport\n"),
        std::string("mode = grad_bounding\nmode.beta = 1\n")}) {
    const auto& res = experiment(base + mode_lines);
    h = 1.0 / res.config.grid_n;
    ifaces.push_back(extract_interface(snapshot_at(res.grid, 1.0)));
  }
  double worst = 0;
  for (size_t i = 0; i < ifaces.size(); ++i)
    for (size_t j = i + 1; j < ifaces.size(); ++j)
      worst = std::max(worst, hausdorff(ifaces[i], ifaces[j]));
  report(3, "mode-independence", worst <= 2 * h, worst, 2 * h);
}

void criterion_4_levelset_identity() {
  // the harness interface check is exactly the grid-vs-marker Hausdorff
  // over the preset's output times (2h in 2D, 3h for the 3D smoke run)
  bool pass = true;
  double worst_ratio = 0;  // measured / threshold, worst across presets
  for (const char* preset : {"rotation2d", "vortex2d", "vortex2d-reversal", "shear2d",
                             "gradbound2d", "zero-field-smoke", "vortex3d-smoke"}) {
    const auto& res = experiment(std::string("preset = ") + preset + "\n");
    const CheckResult* c = find_check(res, "interface_hausdorff");
    if (!c || !c->passed) pass = false;
    if (c && c->threshold > 0) worst_ratio = std::max(worst_ratio, c->measured / c->threshold);
  }
  report(4, "levelset-identity", pass, worst_ratio, 1.0, "worst measured/threshold ratio");
}

void criterion_5_gradient_band() {
  const auto& res = experiment("preset = gradbound2d\n");
  auto st = interface_gradnorm_stats(res.tube, 1.0, res.measured.alpha);
  report(5, "gradient-band", st.max_band_violation <= 1e-6, st.max_band_violation, 1e-6);
}

void criterion_6_characteristic_identities() {
  double worst_h = 0, worst_strip = 0;
  int checked = 0, degenerate = 0;
  unsigned seed = 60001;
  for (const char* preset :
       {"zero-field-smoke", "rotation2d", "vortex2d", "vortex2d-reversal", "shear2d",
        "gradbound2d", "vortex3d-smoke"}) {
    auto cfg = parse_config(std::string("preset = ") + preset + "\n");
    auto field = cfg.make_field();
    double T = cfg.T;
    for (const auto& s0 : band_seeds(cfg, 100, seed++)) {
      MarkerTrajectory tr;
      try {
        tr = integrate_characteristic(cfg.mode, field, s0, 0.0, T, cfg.ode, true,
                                      {0.0, 0.5 * T, T});
      } catch (const TubeDegenerate&) {
        // a folding tangent map ends the seed's validity; the identities are
        // only asserted while the characteristic chart exists
        ++degenerate;
        continue;
      }
      ++checked;
      for (size_t i = 0; i < tr.states.size(); ++i) {
        double H = hamiltonian(cfg.mode, field, tr.times[i], tr.states[i].x, tr.states[i].p,
                               tr.states[i].phi);
        worst_h = std::max(worst_h, std::abs(H + tr.residual[i]));
        for (int j = 0; j < cfg.dimension; ++j) {
          double pdx = 0;
          for (int k = 0; k < cfg.dimension; ++k)
            pdx += tr.states[i].p[k] * tr.variational[i].dx_dxi[k][j];
          worst_strip = std::max(worst_strip, std::abs(tr.variational[i].dphi_dxi[j] - pdx));
        }
      }
    }
  }
  bool pass = worst_h <= 1e-6 && worst_strip <= 1e-5 && checked >= 600;
  report(6, "characteristic-identities", pass, std::max(worst_h, worst_strip), 1e-5,
         "hamiltonian residual " + std::to_string(worst_h) + ", seeds " +
             std::to_string(checked) + " checked / " + std::to_string(degenerate) +
             " degenerate");
}

void criterion_7_cutoff_bound() {
  auto dom = DomainSpec::unit_box(2);
  CutoffConfig cut;
  cut.eps = 0.05;
  double worst_excess = 0, worst_zero = 0;
  long samples = 100000;
  struct Case {
    SourceMode mode;
    VelocityFieldModel field;
  };
  std::vector<Case> cases;
  cases.push_back({SourceMode::grad_preserving(),
                   parse_config("preset = vortex2d\n").make_field()});
  cases.push_back({parse_config("preset = gradbound2d\n").mode,
                   parse_config("preset = gradbound2d\n").make_field()});
  for (const auto& c : cases) {
    double v0 = measure_v0_bound(c.mode, c.field, cut, dom, 1.0, 20000);
    std::mt19937_64 rng(70001);
    std::uniform_real_distribution<double> ux(0.0, 1.0), up(-2.0, 2.0), ut(0.0, 1.0);
    for (long i = 0; i < samples; ++i) {
      Vec x = vec2(ux(rng), ux(rng));
      Vec p = vec2(up(rng), up(rng));
      double t = ut(rng);
      double r = source_R(c.mode, c.field, cut, dom, t, x, p);
      worst_excess = std::max(worst_excess, std::abs(r) - v0);
      // exact zero inside the boundary collar
      Vec xc = vec2(ux(rng) * 2 * cut.eps, ux(rng));
      worst_zero = std::max(worst_zero, std::abs(source_R(c.mode, c.field, cut, dom, t, xc, p)));
      // exact zero for |p| <= 1/3 in the gradient-preserving window
      if (c.mode.kind == SourceKind::grad_preserving) {
        double pn = ux(rng) / 3.0;
        Vec ps = vec2(pn, 0.0);
        worst_zero = std::max(worst_zero, std::abs(source_R(c.mode, c.field, cut, dom, t, x, ps)));
      }
    }
  }
  bool pass = worst_excess <= 0 && worst_zero == 0;
  report(7, "cutoff-bound", pass, worst_excess, 0.0,
         "collar/low-|p| residual " + std::to_string(worst_zero));
}

void criterion_8_barrier_envelope() {
  const auto& res = experiment("preset = vortex2d\n");
  const CheckResult* c = find_check(res, "envelope");
  bool pass = c && c->passed && c->measured == 0.0;
  report(8, "barrier-envelope", pass, c ? c->measured : 1.0, 0.0, "violation fraction at tol 4h");
}

void criterion_9_band_refinement() {
  // Theorem-level statement: the band sup error vanishes with h. Measured as
  // a first-order refinement ratio between n=128 and n=256 plus a smallness
  // cap at the fine resolution.
  const auto& r128 = experiment("preset = vortex2d\n");
  const auto& r256 = experiment("preset = vortex2d\ngrid.n = 256\nchecks = none\n");
  std::vector<double> times = {0.25, 0.5, 1.0};
  double e128 = 0, e256 = 0;
  {
    auto rep = compare_in_tube(r128.grid.snapshots, r128.tube, r128.measured.m0, times);
    for (double e : rep.sup_error) e128 = std::max(e128, e);
  }
  {
    auto rep = compare_in_tube(r256.grid.snapshots, r256.tube, r256.measured.m0, times);
    for (double e : rep.sup_error) e256 = std::max(e256, e);
  }
  double ratio = e128 / e256;
  double h256 = 1.0 / 256;
  bool pass = ratio >= 1.4 && ratio <= 2.6 && e256 <= 4 * h256;
  report(9, "band-refinement", pass, ratio, 1.4,
         "upper 2.6; e256 " + std::to_string(e256) + " cap " + std::to_string(4 * h256));
}

void criterion_10_convergence_order() {
  // time-symmetric vortex: at t = T the exact interface is the initial circle
  auto circle = analytic_sphere_interface(2, vec2(0.5, 0.7), 0.15, 8000);
  std::vector<double> errs;
  for (int n : {64, 128, 256}) {
    std::ostringstream cfg;
    cfg << "preset = vortex2d-reversal\nchecks = none\ngrid.n = " << n << "\n";
    const auto& res = experiment(cfg.str());
    auto iface = extract_interface(snapshot_at(res.grid, 2.0));
    errs.push_back(hausdorff(iface, circle));
  }
  double o1 = std::log2(errs[0] / errs[1]);
  double o2 = std::log2(errs[1] / errs[2]);
  bool pass = o1 >= 0.5 && o1 <= 1.5 && o2 >= 0.5 && o2 <= 1.5;
  report(10, "convergence-order", pass, o1, 0.5,
         "orders " + std::to_string(o1) + ", " + std::to_string(o2) + " in [0.5, 1.5]");
}

void criterion_11_flow_invariance() {
  std::mt19937_64 rng(110001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool pass = true;
  long checked = 0;
  for (int dim : {2, 3}) {
    auto dom = DomainSpec::unit_box(dim);
    for (const auto& field : builtin_fields(dim)) {
      for (int s = 0; s < 50; ++s) {
        Vec x = vec0();
        for (int d = 0; d < dim; ++d) x[d] = u(rng);
        int face = s % (2 * dim);
        x[face / 2] = (face % 2 == 0) ? 0.0 : 1.0;
        double t = u(rng);
        if (!check_subtangential(field, dom, t, x).verdict) pass = false;
        ++checked;
      }
    }
  }
  // the outward radial field must fail on its ball boundary
  auto bad = broken_radial_field(2, vec2(0.0, 0.0));
  auto ball = DomainSpec::make_ball(2, vec2(0.0, 0.0), 1.0);
  bool bad_fails = !check_subtangential(bad, ball, 0.0, vec2(1.0, 0.0)).verdict;
  pass = pass && bad_fails;
  report(11, "flow-invariance", pass, static_cast<double>(checked), 50.0,
         bad_fails ? "broken field rejected" : "broken field NOT rejected");
}

void criterion_12_determinism() {
  // reduced resolution keeps the double run cheap; the seed and config are
  // identical, the thread counts deliberately differ
  auto cfg = parse_config("preset = vortex2d\ngrid.n = 64\n");
  auto r1 = run_experiment(cfg, 8);
  auto r2 = run_experiment(cfg, 3);
  fs::path d1 = fs::temp_directory_path() / "lsl_acc_det1";
  fs::path d2 = fs::temp_directory_path() / "lsl_acc_det2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  auto f1 = write_outputs(r1, d1.string());
  write_outputs(r2, d2.string());
  bool pass = true;
  long compared = 0;
  for (const auto& name : f1) {
    if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
    std::ifstream a(d1 / name, std::ios::binary), b(d2 / name, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() != sb.str()) pass = false;
    ++compared;
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
  report(12, "determinism", pass && compared > 0, static_cast<double>(compared), 1.0,
         "bitwise-identical CSVs across differing thread counts");
}

}  // namespace

int main() {
  criterion_1_gradient_conservation();
  criterion_2_unmodified_drift();
  criterion_3_mode_independence();
  criterion_4_levelset_identity();
  criterion_5_gradient_band();
  criterion_6_characteristic_identities();
  criterion_7_cutoff_bound();
  criterion_8_barrier_envelope();
  criterion_9_band_refinement();
  criterion_10_convergence_order();
  criterion_11_flow_invariance();
  criterion_12_determinism();
  std::printf("acceptance: %d of 12 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
