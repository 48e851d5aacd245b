// Config parsing, presets, experiment orchestration, output artifacts, and
// determinism of the emitted files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "lsl/harness.hpp"

using namespace lsl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("lsl_test_" + tag);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("parse_config: presets, overrides, and rejection of bad input") {
  auto cfg = parse_config("preset = vortex2d\n");
  CHECK(cfg.preset_name == "vortex2d");
  CHECK(cfg.field_id == "vortex");
  CHECK(cfg.grid_n == 128);
  CHECK(cfg.mode.kind == SourceKind::grad_preserving);
  CHECK(cfg.T == doctest::Approx(1.0));
  REQUIRE(cfg.output_times.size() == 3);
  CHECK(cfg.output_times.back() == doctest::Approx(1.0));

  // keys after the preset override it
  auto over = parse_config("preset = vortex2d\ngrid.n = 64\nchecks = none\n");
  CHECK(over.grid_n == 64);
  CHECK(over.checks == "none");

  CHECK_THROWS_AS(
      [] {
        auto c = parse_config("preset = zero-field-smoke\ngrid.n = 4\n");
        c.validate();
      }(),
      ValidationError);
  CHECK_THROWS_AS(parse_config("grd.n = 8\n"), UnknownKey);
  CHECK_THROWS_AS(parse_config("grid.n 8\n"), ParseError);
  CHECK_THROWS_AS(parse_config("grid.n = eight\n"), ParseError);

  // echo round-trips the resolved values
  auto e = cfg.echo();
  CHECK(e.at("grid.n") == "128");
  CHECK(e.at("field.id") == "vortex");
}

TEST_CASE("preset registry: complete, parseable, valid") {
  auto presets = list_presets();
  std::vector<std::string> expected = {"zero-field-smoke", "rotation2d",   "vortex2d",
                                       "vortex2d-reversal", "shear2d",     "gradbound2d",
                                       "vortex3d-smoke"};
  for (const auto& name : expected) {
    bool found = false;
    for (const auto& p : presets)
      if (p.name == name) found = true;
    CHECK_MESSAGE(found, name);
    auto cfg = parse_config("preset = " + name + "\n");
    CHECK_NOTHROW(cfg.validate());
    CHECK_NOTHROW(cfg.make_field());
    CHECK_NOTHROW(cfg.make_phi0());
  }
  CHECK_THROWS_AS(preset_text("no-such-preset"), UnknownKey);
}

TEST_CASE("gradbound2d: beta/alpha hypothesis holds for its own data") {
  auto cfg = parse_config("preset = gradbound2d\n");
  REQUIRE(cfg.mode.kind == SourceKind::grad_bounding);
  auto dom = cfg.make_domain();
  auto field = cfg.make_field();
  auto phi0 = cfg.make_phi0();
  double beta = cfg.mode.beta;
  double alpha = estimate_alpha(field, dom, cfg.T, 2000);
  CHECK(alpha < beta);  // otherwise the band is empty
  auto seeds = seed_tube(phi0, dom, cfg.band, cfg.spacing);
  int checked = 0;
  for (const auto& s : seeds) {
    if (!s.on_interface) continue;
    double g = norm(phi0.grad(s.xi), 2);
    CHECK(g >= beta - alpha - 1e-9);
    CHECK(g <= beta + alpha + 1e-9);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("run_experiment: smoke preset passes every requested check") {
  auto cfg = parse_config("preset = zero-field-smoke\n");
  auto res = run_experiment(cfg, 2);
  CHECK(res.all_passed);
  CHECK(res.wall_seconds < 10.0);
  REQUIRE_FALSE(res.checks.empty());
  for (const auto& c : res.checks) {
    CHECK_FALSE(c.name.empty());
    CHECK_MESSAGE(c.passed, c.name << " measured " << c.measured);
  }
  CHECK(res.measured.h == doctest::Approx(1.0 / 32));
  CHECK(res.measured.eps > 0);
  CHECK(res.measured.m0 > 0);
  CHECK(res.measured.tstar > 0);
  // one snapshot per output time plus the initial slice
  CHECK(res.grid.snapshots.size() == cfg.output_times.size() + 1);
  CHECK_FALSE(res.tube.trajectories.empty());

  // checks = none still runs both solvers
  auto quiet = parse_config("preset = zero-field-smoke\nchecks = none\n");
  auto qres = run_experiment(quiet, 2);
  CHECK(qres.checks.empty());
  CHECK(qres.all_passed);
  CHECK(qres.grid.steps > 0);
}

TEST_CASE("write_outputs: complete artifact set, manifest, no clobbering") {
  auto cfg = parse_config("preset = zero-field-smoke\n");
  auto res = run_experiment(cfg, 2);
  auto dir = fresh_dir("outputs");
  auto files = write_outputs(res, dir.string());
  REQUIRE_FALSE(files.empty());
  bool has_manifest = false, has_markers = false, has_config = false;
  for (const auto& f : files) {
    fs::path p = dir / f;
    CHECK_MESSAGE(fs::exists(p), f);
    CHECK_MESSAGE(fs::file_size(p) > 0, f);
    if (f == "manifest.json") has_manifest = true;
    if (f == "markers.csv") has_markers = true;
    if (f == "config.txt") has_config = true;
  }
  CHECK(has_manifest);
  CHECK(has_markers);
  CHECK(has_config);

  // manifest is valid json and carries a verdict for every check
  auto man = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(man.contains("checks"));
  CHECK(man["checks"].size() == res.checks.size());
  for (const auto& c : man["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("passed"));
    CHECK(c.contains("measured"));
    CHECK(c.contains("threshold"));
  }
  CHECK(man.contains("measured"));
  CHECK(man.contains("files"));
  CHECK(man.contains("config"));
  CHECK(man["all_passed"].get<bool>());

  // the output directory must not already exist
  CHECK_THROWS(write_outputs(res, dir.string()));
  fs::remove_all(dir);
}

TEST_CASE("determinism: identical config and seed give identical artifacts") {
  auto cfg = parse_config("preset = zero-field-smoke\n");
  auto r1 = run_experiment(cfg, 2);
  auto r2 = run_experiment(cfg, 2);

  REQUIRE(r1.grid.snapshots.size() == r2.grid.snapshots.size());
  for (size_t s = 0; s < r1.grid.snapshots.size(); ++s)
    for (size_t i = 0; i < r1.grid.snapshots[s].values.size(); ++i)
      CHECK(r1.grid.snapshots[s].values[i] == r2.grid.snapshots[s].values[i]);

  auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  write_outputs(r1, d1.string());
  write_outputs(r2, d2.string());
  for (const char* f : {"markers.csv", "series.csv"})
    CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("run_convergence: stationary data refine cleanly") {
  auto cfg = parse_config("preset = zero-field-smoke\nchecks = none\n");
  auto rows = run_convergence(cfg, {16, 32}, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 16);
  CHECK(rows[1].n == 32);
  for (const auto& r : rows) {
    // zero field: the grid solution is exactly stationary, so the only error
    // sources are contour extraction and marker sampling resolution
    CHECK(r.tube_sup_error <= 1e-3);
    CHECK(r.interface_error <= 1.0 / r.n);
  }
  auto table = format_convergence_table(rows);
  CHECK(table.find("16") != std::string::npos);
  CHECK(table.find("32") != std::string::npos);
}
