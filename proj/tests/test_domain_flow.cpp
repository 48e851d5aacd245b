// Domains, flow maps, the reference transport solution, and the
// subtangentiality check for the builtin velocity fields.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lsl/flow.hpp"
#include "lsl/levelset.hpp"
#include "lsl/velocity.hpp"

using namespace lsl;

namespace {

OdeOptions fixed_rk4(double step = 1e-3) {
  OdeOptions o;
  o.method = OdeOptions::Method::rk4_fixed;
  o.step = step;
  return o;
}

OdeOptions adaptive(double tol = 1e-9) {
  OdeOptions o;
  o.method = OdeOptions::Method::rk45_adaptive;
  o.abs_tol = tol;
  o.rel_tol = tol;
  return o;
}

// Independent central-difference oracle for the field jacobian.
Mat fd_jacobian(const VelocityFieldModel& f, double t, const Vec& x, double h) {
  Mat j = mat0();
  for (int c = 0; c < f.dim; ++c) {
    Vec xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    Vec vp = f.eval(t, xp), vm = f.eval(t, xm);
    for (int r = 0; r < f.dim; ++r) j[r][c] = (vp[r] - vm[r]) / (2 * h);
  }
  return j;
}

Ten fd_second(const VelocityFieldModel& f, double t, const Vec& x, double h) {
  Ten s = ten0();
  for (int c = 0; c < f.dim; ++c) {
    Vec xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    Mat jp = f.jacobian(t, xp), jm = f.jacobian(t, xm);
    for (int i = 0; i < f.dim; ++i)
      for (int j = 0; j < f.dim; ++j) s[i][j][c] = (jp[i][j] - jm[i][j]) / (2 * h);
  }
  return s;
}

// Deterministic interior samples of the unit box.
std::vector<Vec> interior_samples(int dim, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec x = vec0();
    for (int d = 0; d < dim; ++d) x[d] = u(rng);
    out.push_back(x);
  }
  return out;
}

// Points on the unit-box boundary, cycling faces.
std::vector<Vec> boundary_samples(int dim, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec x = vec0();
    for (int d = 0; d < dim; ++d) x[d] = u(rng);
    int face = i % (2 * dim);
    x[face / 2] = (face % 2 == 0) ? 0.0 : 1.0;
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("domain geometry: box depth, distance, clamp") {
  auto box = DomainSpec::unit_box(2);
  CHECK(box.inside_depth(vec2(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(box.inside_depth(vec2(0.1, 0.5)) == doctest::Approx(0.1));
  CHECK(box.inside_depth(vec2(-0.3, 0.5)) == doctest::Approx(-0.3));
  CHECK(box.boundary_distance(vec2(0.2, 0.6)) == doctest::Approx(0.2));
  CHECK(box.contains(vec2(0.0, 0.7)));
  CHECK_FALSE(box.contains(vec2(1.2, 0.5)));
  Vec c = box.clamp(vec2(1.3, -0.2));
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(DomainSpec::make_box(2, vec2(1, 0), vec2(0, 1)), ValidationError);
}

TEST_CASE("domain geometry: ball depth and clamp") {
  auto ball = DomainSpec::make_ball(2, vec2(0.5, 0.5), 0.4);
  CHECK(ball.inside_depth(vec2(0.5, 0.5)) == doctest::Approx(0.4));
  CHECK(ball.inside_depth(vec2(0.9, 0.5)) == doctest::Approx(0.0));
  CHECK(ball.inside_depth(vec2(1.1, 0.5)) == doctest::Approx(-0.2));
  Vec c = ball.clamp(vec2(1.5, 0.5));
  CHECK(norm(sub(c, vec2(0.5, 0.5), 2), 2) == doctest::Approx(0.4));
  CHECK_THROWS_AS(DomainSpec::make_ball(2, vec2(0, 0), -1.0), ValidationError);
}

TEST_CASE("flow map: zero field is the identity") {
  auto field = zero_field(2);
  auto dom = DomainSpec::unit_box(2);
  for (const Vec& xi : interior_samples(2, 10, 11)) {
    Vec x = eval_flow_map(field, dom, 0.7, 0.0, xi, fixed_rk4());
    CHECK(norm(sub(x, xi, 2), 2) <= 1e-14);
  }
}

TEST_CASE("flow map: rigid rotation quarter turn is exact") {
  Vec c = vec2(0.0, 0.0);
  auto field = rotation_field(2, c, 1.0);
  auto ball = DomainSpec::make_ball(2, c, 1.0);
  double r = 0.6;
  Vec x = eval_flow_map(field, ball, M_PI / 2, 0.0, vec2(r, 0.0), fixed_rk4());
  CHECK(std::abs(x[0] - 0.0) <= 1e-8);
  CHECK(std::abs(x[1] - r) <= 1e-8);
}

TEST_CASE("flow map: time-symmetric vortex reversal returns the seed") {
  double T = 1.0;
  auto field = vortex_field_2d(1.0, T);  // cos(pi t / T) factor
  auto dom = DomainSpec::unit_box(2);
  for (const Vec& xi : interior_samples(2, 10, 23)) {
    Vec x = eval_flow_map(field, dom, T, 0.0, xi, fixed_rk4(1e-4));
    CHECK(norm(sub(x, xi, 2), 2) <= 1e-6);
  }
}

TEST_CASE("flow map: group property and forward-backward inversion") {
  auto opts = adaptive(1e-9);
  auto dom = DomainSpec::unit_box(2);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (const auto& field : {vortex_field_2d(0.8, 0.0), shear_field(2, 0.5)}) {
    for (const Vec& xi : interior_samples(2, 5, 41)) {
      double sigma = ut(rng), tau = ut(rng), t = ut(rng);
      Vec direct = eval_flow_map(field, dom, t, sigma, xi, opts);
      Vec mid = eval_flow_map(field, dom, tau, sigma, xi, opts);
      Vec chained = eval_flow_map(field, dom, t, tau, mid, opts);
      CHECK(norm(sub(direct, chained, 2), 2) <= 1e-8);

      Vec fwd = eval_flow_map(field, dom, t, tau, xi, opts);
      Vec back = eval_flow_map(field, dom, tau, t, fwd, opts);
      CHECK(norm(sub(back, xi, 2), 2) <= 1e-8);
    }
  }
}

TEST_CASE("flow map: escaping trajectory raises DomainEscape") {
  Vec c = vec2(0.0, 0.0);
  auto field = broken_radial_field(2, c);
  auto ball = DomainSpec::make_ball(2, c, 0.5);
  CHECK_THROWS_AS(eval_flow_map(field, ball, 1.0, 0.0, vec2(0.3, 0.0), fixed_rk4()), DomainEscape);
}

TEST_CASE("reference_levelset: t=0 and zero field return phi0") {
  auto phi0 = circle_levelset(2, vec2(0.5, 0.5), 0.2);
  auto dom = DomainSpec::unit_box(2);
  auto vortex = vortex_field_2d(1.0, 0.0);
  auto zero = zero_field(2);
  for (const Vec& x : interior_samples(2, 8, 53)) {
    CHECK(reference_levelset(vortex, dom, phi0.eval, 0.0, x, fixed_rk4()) ==
          doctest::Approx(phi0.eval(x)).epsilon(1e-12));
    CHECK(reference_levelset(zero, dom, phi0.eval, 0.8, x, fixed_rk4()) ==
          doctest::Approx(phi0.eval(x)).epsilon(1e-12));
  }
}

TEST_CASE("reference_levelset: rigid rotation matches analytic back-rotation") {
  Vec c = vec2(0.0, 0.0);
  double a = 0.5, r0 = 0.2;
  auto field = rotation_field(2, c, 1.0);
  auto ball = DomainSpec::make_ball(2, c, 1.0);
  auto phi0 = circle_levelset(2, vec2(a, 0.0), r0);
  // at t=pi the point (-a, 0) back-rotates onto (a, 0), the circle center
  double val = reference_levelset(field, ball, phi0.eval, M_PI, vec2(-a, 0.0), fixed_rk4());
  CHECK(val == doctest::Approx(phi0.eval(vec2(a, 0.0))).epsilon(1e-8));
  CHECK(val == doctest::Approx(-r0).epsilon(1e-8));
}

TEST_CASE("check_subtangential: vortex box field has zero boundary velocity") {
  auto field = vortex_field_2d(1.0, 0.0);
  auto dom = DomainSpec::unit_box(2);
  auto rep = check_subtangential(field, dom, 0.3, vec2(0.0, 0.4));
  CHECK(rep.verdict);
  for (double r : rep.ratios_plus) CHECK(r == 0.0);
}

TEST_CASE("check_subtangential: rotation tangent to its ball, radial field fails") {
  Vec c = vec2(0.0, 0.0);
  auto ball = DomainSpec::make_ball(2, c, 1.0);
  auto rot = rotation_field(2, c, 1.0);
  Vec x = vec2(std::cos(0.7), std::sin(0.7));
  auto rep = check_subtangential(rot, ball, 0.0, x);
  CHECK(rep.verdict);

  auto rad = broken_radial_field(2, c);
  auto bad = check_subtangential(rad, ball, 0.0, x);
  CHECK_FALSE(bad.verdict);

  CHECK_THROWS_AS(check_subtangential(rot, ball, 0.0, vec2(0.2, 0.2)), NotOnBoundary);
}

TEST_CASE("builtin fields: registry basics") {
  for (int dim : {2, 3}) {
    auto fields = builtin_fields(dim);
    CHECK(fields.size() >= 4);
    bool has_zero = false, has_vortex = false;
    for (const auto& f : fields) {
      if (f.id == "zero") {
        has_zero = true;
        CHECK(f.lipschitz_bound == 0.0);
      }
      if (f.id.rfind("vortex", 0) == 0) has_vortex = true;
    }
    CHECK(has_zero);
    CHECK(has_vortex);
  }
  auto vortex = vortex_field_2d(1.0, 0.0);
  Vec corner = vec2(0.0, 0.0);
  CHECK(norm(vortex.eval(0.0, corner), 2) == 0.0);
}

TEST_CASE("builtin fields: analytic derivatives match finite differences") {
  for (int dim : {2, 3}) {
    for (const auto& field : builtin_fields(dim)) {
      for (const Vec& x : interior_samples(dim, 100, 71)) {
        Mat ja = field.jacobian(0.4, x);
        Mat jf = fd_jacobian(field, 0.4, x, 1e-5);
        Ten sa = field.second_derivs(0.4, x);
        // smaller step: the bump field's third derivatives are large in the collar
        Ten sf = fd_second(field, 0.4, x, 1e-6);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) {
            CHECK(std::abs(ja[i][j] - jf[i][j]) <= 1e-5);
            for (int k = 0; k < dim; ++k) CHECK(std::abs(sa[i][j][k] - sf[i][j][k]) <= 1e-5);
          }
      }
    }
  }
}

TEST_CASE("builtin fields: vortex jacobian spot check at (0.25, 0.25)") {
  auto field = vortex_field_2d(1.0, 0.0);
  Vec x = vec2(0.25, 0.25);
  Mat ja = field.jacobian(0.0, x);
  Mat jf = fd_jacobian(field, 0.0, x, 1e-4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(ja[i][j] - jf[i][j]) <= 1e-5);
}

TEST_CASE("builtin fields: subtangential at 50 boundary samples, t in {0, 0.5, 1}") {
  for (int dim : {2, 3}) {
    auto dom = DomainSpec::unit_box(dim);
    for (const auto& field : builtin_fields(dim)) {
      for (const Vec& x : boundary_samples(dim, 50, 97)) {
        for (double t : {0.0, 0.5, 1.0}) {
          auto rep = check_subtangential(field, dom, t, x);
          CHECK(rep.verdict);
        }
      }
    }
  }
}

TEST_CASE("lipschitz_bound dominates sampled jacobian entries") {
  for (const auto& field : builtin_fields(2)) {
    double worst = 0;
    for (const Vec& x : interior_samples(2, 200, 113)) {
      Mat j = field.jacobian(0.25, x);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(j[r][c]));
    }
    CHECK(worst <= field.lipschitz_bound + 1e-12);
  }
}
