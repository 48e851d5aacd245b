// Interface extraction, Hausdorff metrics, gradient-drift diagnostics, and
// the band comparison between the grid and marker solutions.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lsl/analysis.hpp"
#include "lsl/levelset.hpp"
#include "lsl/tube.hpp"
#include "lsl/velocity.hpp"

using namespace lsl;

namespace {

OdeOptions fixed_rk4(double step = 1e-3) {
  OdeOptions o;
  o.method = OdeOptions::Method::rk4_fixed;
  o.step = step;
  return o;
}

VelocityFieldModel pure_shear_field(double gamma) {
  VelocityFieldModel m;
  m.id = "pure-shear";
  m.dim = 2;
  m.lipschitz_bound = std::abs(gamma);
  m.spatial_eval = [gamma](const Vec& x) { return vec2(gamma * (x[1] - 0.5), 0.0); };
  m.spatial_jacobian = [gamma](const Vec&) {
    Mat j = mat0();
    j[0][1] = gamma;
    return j;
  };
  m.spatial_second = [](const Vec&) { return ten0(); };
  return m;
}

// Interface-normal seeds around a circle, integrated densely in time so the
// drift diagnostic's finite differences are well resolved.
std::vector<MarkerTrajectory> transported_circle_markers(const VelocityFieldModel& field,
                                                         int count, double t_end, double dt_out) {
  auto phi0 = circle_levelset(2, vec2(0.5, 0.5), 0.2);
  std::vector<double> out_times;
  int steps = static_cast<int>(std::round(t_end / dt_out));
  for (int k = 0; k <= steps; ++k) out_times.push_back(std::min(k * dt_out, t_end));
  std::vector<MarkerTrajectory> trs;
  for (int k = 0; k < count; ++k) {
    double th = 2 * M_PI * k / count;
    Vec xi = vec2(0.5 + 0.2 * std::cos(th), 0.5 + 0.2 * std::sin(th));
    CharacteristicState s0;
    s0.x = xi;
    s0.p = phi0.grad(xi);
    s0.phi = 0.0;
    auto tr = integrate_characteristic(SourceMode::linear_transport(), field, s0, 0.0, t_end,
                                       fixed_rk4(1e-3), false, out_times);
    tr.on_interface = true;
    trs.push_back(std::move(tr));
  }
  return trs;
}

}  // namespace

TEST_CASE("extract_interface: linear field is reproduced exactly") {
  auto dom = DomainSpec::unit_box(2);
  auto spec = GridSpec::make(dom, 32);
  auto g = GridField::sample(spec, [](const Vec& x) { return x[0] - 0.5; });
  auto iface = extract_interface(g);
  REQUIRE(iface.points.size() > 10);
  for (const Vec& p : iface.points) {
    CHECK(std::abs(p[0] - 0.5) <= 1e-12);
    CHECK(p[1] >= -1e-12);
    CHECK(p[1] <= 1 + 1e-12);
  }
}

TEST_CASE("extract_interface: circle within the curvature interpolation bound") {
  auto dom = DomainSpec::unit_box(2);
  for (int n : {64, 128}) {
    auto spec = GridSpec::make(dom, n);
    auto phi0 = circle_levelset(2, vec2(0.5, 0.5), 0.25);
    auto g = GridField::sample(spec, phi0.eval);
    auto iface = extract_interface(g);
    REQUIRE(iface.points.size() > 20);
    double bound = spec.h * spec.h / (2 * 0.25) + 1e-12;
    for (const Vec& p : iface.points) CHECK(std::abs(phi0.eval(p)) <= bound);
  }
}

TEST_CASE("extract_interface: sign-definite field yields the empty set") {
  auto dom = DomainSpec::unit_box(2);
  auto spec = GridSpec::make(dom, 16);
  auto g = GridField::sample(spec, [](const Vec&) { return 0.3; });
  CHECK(extract_interface(g).points.empty());
}

TEST_CASE("hausdorff: identical, offset circles, single points, empty") {
  auto a = analytic_sphere_interface(2, vec2(0.5, 0.5), 0.2, 2000);
  CHECK(hausdorff(a, a) == doctest::Approx(0.0));

  double delta = 0.03;
  auto b = analytic_sphere_interface(2, vec2(0.5 + delta, 0.5), 0.2, 2000);
  double gap = 2 * M_PI * 0.2 / 2000;  // sampling resolution
  CHECK(std::abs(hausdorff(a, b) - delta) <= gap);

  InterfaceSet p, q;
  p.points = {vec2(0.1, 0.2)};
  q.points = {vec2(0.4, 0.6)};
  CHECK(hausdorff(p, q) == doctest::Approx(0.5));

  InterfaceSet empty;
  CHECK_THROWS_AS(hausdorff(a, empty), EmptyInterface);
}

TEST_CASE("analytic_sphere_interface: samples lie on the sphere") {
  for (int dim : {2, 3}) {
    Vec c = dim == 2 ? vec2(0.4, 0.6) : vec3(0.4, 0.6, 0.5);
    auto s = analytic_sphere_interface(dim, c, 0.15, 500);
    REQUIRE(s.points.size() >= 500);
    for (const Vec& p : s.points)
      CHECK(norm(sub(p, c, dim), dim) == doctest::Approx(0.15).epsilon(1e-12));
  }
}

TEST_CASE("gradient_drift_unmodified: identity residual on closed-form fields") {
  // rigid rotation and zero field: both sides of the identity vanish
  auto rot = rotation_field(2, vec2(0.5, 0.5), 1.0);
  auto trs_rot = transported_circle_markers(rot, 16, 0.2, 1e-3);
  auto st_rot = gradient_drift_unmodified(rot, trs_rot, 0.2);
  CHECK(st_rot.markers == 16);
  CHECK(st_rot.max_residual <= 1e-5);

  auto zf = zero_field(2);
  auto trs_zero = transported_circle_markers(zf, 8, 0.2, 1e-3);
  CHECK(gradient_drift_unmodified(zf, trs_zero, 0.2).max_residual <= 1e-12);

  // shear: |p| genuinely drifts, but the measured d|p|/ds still matches
  // -|p| <(grad v) nu, nu> along the trajectory
  auto shear = pure_shear_field(1.0);
  auto trs_sh = transported_circle_markers(shear, 32, 0.2, 1e-3);
  auto st_sh = gradient_drift_unmodified(shear, trs_sh, 0.2);
  CHECK(st_sh.max_residual <= 1e-5);
  CHECK(st_sh.mean_residual <= st_sh.max_residual);
}

TEST_CASE("compare_in_tube: stationary affine data agree to MLS tolerance") {
  auto dom = DomainSpec::unit_box(2);
  auto phi0 = affine_levelset(2, vec2(0.0, 1.0), -0.5);
  TubeConfig cfg;
  cfg.band_halfwidth = 0.04;
  cfg.spacing = 0.01;
  auto tube = run_tube(SourceMode::linear_transport(), zero_field(2), phi0, dom, {0.0, 0.5, 1.0},
                       cfg, fixed_rk4(1e-3), 4);
  auto spec = GridSpec::make(dom, 32);
  std::vector<GridField> snaps;
  for (double t : {0.0, 0.5, 1.0}) snaps.push_back(GridField::sample(spec, phi0.eval, t));

  auto rep = compare_in_tube(snaps, tube, 0.02, {0.0, 0.5, 1.0});
  REQUIRE(rep.times.size() == 3);
  CHECK(rep.m0 == doctest::Approx(0.02));
  CHECK(rep.h == doctest::Approx(spec.h));
  for (size_t i = 0; i < rep.times.size(); ++i) {
    CHECK(rep.band_node_counts[i] > 0);
    CHECK(rep.sup_error[i] <= 1e-6);
    CHECK(rep.sign_mismatches[i] == 0);
  }
  // a band level below every nonzero nodal value leaves no nodes to compare
  CHECK_THROWS_AS(compare_in_tube(snaps, tube, 1e-300, {0.5}), BandEmpty);
}

TEST_CASE("convergence table formatting") {
  std::vector<ConvergenceRow> rows(2);
  rows[0].n = 64;
  rows[0].interface_error = 2.0e-2;
  rows[0].tube_sup_error = 1.6e-2;
  rows[1].n = 128;
  rows[1].interface_error = 1.0e-2;
  rows[1].tube_sup_error = 8.0e-3;
  rows[1].order_interface = 1.0;
  rows[1].order_tube = 1.0;
  std::string txt = format_convergence_table(rows);
  CHECK(txt.find("64") != std::string::npos);
  CHECK(txt.find("128") != std::string::npos);
  CHECK(txt.find("order") != std::string::npos);
}

TEST_CASE("marker_interface tracks the analytic circle on a tube run") {
  auto dom = DomainSpec::unit_box(2);
  auto phi0 = circle_levelset(2, vec2(0.5, 0.5), 0.2);
  TubeConfig cfg;
  cfg.band_halfwidth = 0.04;
  cfg.spacing = 0.02;
  auto tube = run_tube(SourceMode::grad_preserving(), zero_field(2), phi0, dom, {0.0, 0.5}, cfg,
                       fixed_rk4(1e-3), 4);
  auto mi = marker_interface(tube, 0.5);
  REQUIRE(mi.points.size() > 20);
  auto circle = analytic_sphere_interface(2, vec2(0.5, 0.5), 0.2, 4000);
  CHECK(hausdorff(mi, circle) <= cfg.spacing);
}
