#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "lightray/contact.hpp"
#include "lightray/redshift.hpp"
#include "lightray/rng.hpp"

using namespace lightray;

namespace {

Event ev(std::initializer_list<double> xs) { return Event{Vec::of(xs)}; }

std::shared_ptr<const NullGeodesic> make_ray(const SpacetimeMetric& g,
                                             std::initializer_list<double> coords,
                                             std::initializer_list<double> spatial_dir,
                                             double lo, double hi) {
  Event e = ev(coords);
  GeodesicState init{e, null_project(g, e, Vec::of(spatial_dir))};
  return std::make_shared<NullGeodesic>(integrate_null(g, init, 0.0, lo, hi));
}

RayVariation random_variation(const SpacetimeMetric& g,
                              std::shared_ptr<const NullGeodesic> base, RandomStream& rng) {
  Vec dx(base->dim()), dk(base->dim());
  for (int i = 0; i < base->dim(); ++i) {
    dx[i] = rng.uniform(-1.0, 1.0);
    dk[i] = rng.uniform(-1.0, 1.0);
  }
  return make_variation(g, std::move(base), dx, dk);
}

}  // namespace

TEST_CASE("momentum restriction on a level slice") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface slice(g, parse_expression("1"), Domain::torus(Vec::of({2.0, 2.0})));
  auto geo = make_ray(g, {0, 0.3, 0.7}, {-1.0, 0.0}, 0.0, 2.0);

  UnitCovector u = restrict_momentum(slice, *geo);
  CHECK(u.covector[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(u.covector[1]) < 1e-12);
  CHECK(u.base.spatial[0] == doctest::Approx(0.3 - 1.0 + 2.0).epsilon(1e-9));
  CHECK(u.base.spatial[1] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("momentum restriction on a tilted slice") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface tilted(g, parse_expression("1 + 0.5*x"),
                       Domain::box(Vec::of({-4.0, -4.0}), Vec::of({4.0, 4.0})));
  auto geo = make_ray(g, {0, 0, 0}, {1.0, 0.0}, 0.0, 4.0);

  UnitCovector u = restrict_momentum(tilted, *geo);
  // <k, e_1> = 0.5 - 1 and <k, n> = 0.5 / sqrt(0.75) give p_1 = sqrt(0.75).
  CHECK(u.covector[0] == doctest::Approx(std::sqrt(0.75)).epsilon(1e-10));
  CHECK(std::abs(u.covector[1]) < 1e-12);
  CHECK(u.base.spatial[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("drifting null data is rejected at restriction") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface slice(g, parse_expression("1"), Domain::torus(Vec::of({2.0, 2.0})));

  Intersection fake;
  fake.lambda = 0.0;
  fake.point = slice.embed(Vec::of({0.5, 0.5}));
  fake.state.event = fake.point.event;
  fake.state.tangent = Vec::of({1.0 + 1e-4, 1.0, 0.0});  // visibly off the cone
  CHECK_THROWS_AS(restrict_momentum(slice, fake), ConsistencyError);
}

TEST_CASE("restriction inverts the covector lift") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface slice(g, parse_expression("0.3 + 0.1*sin(pi*x)*cos(pi*y)"),
                      Domain::torus(Vec::of({2.0, 2.0})));
  for (uint64_t i = 0; i < 6; ++i) {
    UnitCovector u = slice.sample_covector(314, i);
    LightRay ray = ray_from_covector(slice, u, -0.4, 0.4);
    UnitCovector v = restrict_momentum(slice, ray.trajectory());
    CHECK(max_abs(v.base.spatial - u.base.spatial) < 1e-9);
    CHECK(max_abs(v.covector - u.covector) < 1e-9);
  }
}

TEST_CASE("transfer between slices and back") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface lower(g, parse_expression("0"), Domain::torus(Vec::of({2.0, 2.0})), "lower");
  CauchySurface upper(g, parse_expression("log(2)"), Domain::torus(Vec::of({2.0, 2.0})),
                      "upper");

  for (uint64_t i = 0; i < 4; ++i) {
    UnitCovector u = lower.sample_covector(55, i);

    // Same-surface push is the identity.
    UnitCovector same = transfer(lower, lower, u, -0.3, 1.6);
    CHECK(max_abs(same.base.spatial - u.base.spatial) < 1e-9);
    CHECK(max_abs(same.covector - u.covector) < 1e-9);

    UnitCovector up = transfer(lower, upper, u, -0.3, 1.6);
    UnitCovector back = transfer(upper, lower, up, -1.6, 0.3);
    CHECK(max_abs(back.base.spatial - u.base.spatial) < 1e-8);
    CHECK(max_abs(back.covector - u.covector) < 1e-8);
  }

  CauchySurface far(g, parse_expression("3"), Domain::torus(Vec::of({2.0, 2.0})), "far");
  CHECK_THROWS_AS(transfer(lower, far, lower.sample_covector(55, 9), -0.3, 1.6),
                  NoIntersectionError);
}

TEST_CASE("one-form between parallel flat slices has unit ratio") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface lower(g, parse_expression("0.25"), Domain::torus(Vec::of({2.0, 2.0})));
  CauchySurface upper(g, parse_expression("1.75"), Domain::torus(Vec::of({2.0, 2.0})));
  auto base = make_ray(g, {0, 0.4, 1.1}, {0.8, -0.6}, -0.5, 2.5);

  RandomStream rng(7, 0);
  for (int c = 0; c < 10; ++c) {
    TheoremCheck check = theorem_ratio(lower, upper, variation_field(g, random_variation(g, base, rng)));
    CHECK(check.one_plus_z == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(check.ratio - 1.0) < 1e-8);
    CHECK(check.residual < 1e-8);
  }
}

TEST_CASE("one-form ratio doubles across a doubling of the scale factor") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface lower(g, parse_expression("0"), Domain::torus(Vec::of({2.0, 2.0})));
  CauchySurface upper(g, parse_expression("log(2)"), Domain::torus(Vec::of({2.0, 2.0})));
  auto base = make_ray(g, {-0.05, 0.3, 0.7}, {0.6, 0.4}, -0.4, 2.2);

  RandomStream rng(11, 0);
  for (int c = 0; c < 10; ++c) {
    VariationField field = variation_field(g, random_variation(g, base, rng));
    TheoremCheck check = theorem_ratio(lower, upper, field);
    CHECK(check.one_plus_z == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::abs(check.ratio - 2.0) < 2e-6);
    CHECK(check.residual < 1e-6);

    // The ratio of pairings agrees with the observer-based redshift.
    RedshiftResult r = surface_redshift(lower, upper, *base);
    CHECK(check.one_plus_z == doctest::Approx(r.one_plus_z).epsilon(1e-9));
  }
}

TEST_CASE("one-form ratio against a tilted receiver") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface level(g, parse_expression("0"),
                      Domain::box(Vec::of({-4.0, -4.0}), Vec::of({4.0, 4.0})));
  CauchySurface tilted(g, parse_expression("1 + 0.5*x"),
                       Domain::box(Vec::of({-4.0, -4.0}), Vec::of({4.0, 4.0})));
  auto base = make_ray(g, {0, 0, 0}, {1.0, 0.0}, -0.5, 4.0);

  RandomStream rng(13, 0);
  for (int c = 0; c < 5; ++c) {
    TheoremCheck check =
        theorem_ratio(level, tilted, variation_field(g, random_variation(g, base, rng)));
    CHECK(check.one_plus_z == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
    CHECK(std::abs(check.ratio - std::sqrt(3.0)) < 1e-6);
  }
}

TEST_CASE("the one-form only sees the slice's first-order data") {
  auto g = SpacetimeMetric::minkowski(3);
  Domain dom = Domain::torus(Vec::of({2.0, 2.0}));
  CauchySurface flat(g, parse_expression("0.25"), dom);
  // Same value and gradient at (1, 1), curvature differs.
  CauchySurface bumped(
      g, parse_expression("0.25 + 0.1*sin(pi*(x-1))^2*sin(pi*(y-1))^2"), dom);
  auto base = make_ray(g, {0.25, 1.0, 1.0}, {0.28, -0.96}, -0.8, 0.8);

  RandomStream rng(17, 0);
  for (int c = 0; c < 8; ++c) {
    VariationField field = variation_field(g, random_variation(g, base, rng));
    ContactEvaluation a = contact_value(flat, field);
    ContactEvaluation b = contact_value(bumped, field);
    const double scale = std::max(a.diagnostics.scale, b.diagnostics.scale);
    CHECK(std::abs(a.alpha - b.alpha) < 1e-7 * scale);
  }
}

TEST_CASE("families sliding along the ray sit in the kernel") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface lower(g, parse_expression("0.25"), Domain::torus(Vec::of({2.0, 2.0})));
  CauchySurface upper(g, parse_expression("1.25"), Domain::torus(Vec::of({2.0, 2.0})));
  auto base = make_ray(g, {0, 0.4, 1.1}, {0.8, -0.6}, -0.5, 2.5);

  // Perturbing the anchor along the tangent reparameterises the same line:
  // every member crosses at the same point, so the one-form vanishes.
  GeodesicState anchor = base->state_at(0.0);
  RayVariation slide = make_variation(g, base, anchor.tangent, Vec::of({0, 0, 0}));
  CHECK_THROWS_AS(theorem_ratio(lower, upper, variation_field(g, slide)), ContactKernelError);
}

TEST_CASE("kernel and co-orientation agree across slices") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface lower(g, parse_expression("0"), Domain::torus(Vec::of({2.0, 2.0})));
  CauchySurface upper(g, parse_expression("log(2)"), Domain::torus(Vec::of({2.0, 2.0})));
  auto base = make_ray(g, {-0.05, 0.3, 0.7}, {0.6, 0.4}, -0.4, 2.2);

  KernelReport report = kernel_consistency(lower, upper, base, 4242, 25);
  CHECK(report.cases == 25);
  CHECK(report.worst_kernel_alpha < 1e-7);
  CHECK(report.orientation_checks > 0);
  CHECK(report.orientation_violations == 0);
}
