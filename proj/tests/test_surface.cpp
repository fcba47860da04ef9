#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lightray/surface.hpp"

using namespace lightray;

namespace {

Domain unit_torus2() { return Domain::torus(Vec::of({1.0, 1.0})); }

}  // namespace

TEST_CASE("domain construction and canonical wrapping") {
  Domain t = Domain::torus(Vec::of({1.0, 2.0}));
  Vec w = t.canonical(Vec::of({1.25, -0.5}));
  CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(t.contains(Vec::of({100.0, -3.0})));
  CHECK(t.extent(1) == 2.0);

  Domain b = Domain::box(Vec::of({-1.0, 0.0}), Vec::of({1.0, 2.0}));
  CHECK(b.contains(Vec::of({0.0, 1.0})));
  CHECK_FALSE(b.contains(Vec::of({1.5, 1.0})));
  CHECK(b.canonical(Vec::of({0.7, 0.1}))[0] == 0.7);
  CHECK(b.extent(0) == 2.0);

  CHECK_THROWS_AS(Domain::torus(Vec::of({1.0, 0.0})), ConfigError);
  CHECK_THROWS_AS(Domain::box(Vec::of({0.0, 0.0}), Vec::of({1.0, 0.0})), ConfigError);
}

TEST_CASE("region membership, including wrapped torus intervals") {
  Domain t = unit_torus2();
  Region r = Region::interval(0, 0.75, 0.25);  // wraps across the seam
  CHECK(r.contains(t, Vec::of({0.8, 0.5})));
  CHECK(r.contains(t, Vec::of({0.1, 0.5})));
  CHECK(r.contains(t, Vec::of({1.1, 0.5})));  // canonical 0.1
  CHECK_FALSE(r.contains(t, Vec::of({0.5, 0.5})));

  Region q = Region::interval(0, 0.2, 0.4).with(1, 0.0, 0.5);
  CHECK(q.contains(t, Vec::of({0.3, 0.2})));
  CHECK_FALSE(q.contains(t, Vec::of({0.3, 0.7})));
  CHECK(Region::whole().contains(t, Vec::of({0.9, 0.9})));

  Domain b = Domain::box(Vec::of({-2.0, -2.0}), Vec::of({2.0, 2.0}));
  const double inf = std::numeric_limits<double>::infinity();
  Region half = Region::interval(1, 0.5, inf);  // half-space
  CHECK(half.contains(b, Vec::of({0.0, 1.0})));
  CHECK_FALSE(half.contains(b, Vec::of({0.0, 0.0})));
}

TEST_CASE("tilted plane in flat spacetime: frame, metric, normal") {
  auto g = SpacetimeMetric::minkowski(3);
  Domain box = Domain::box(Vec::of({-1.0, -1.0}), Vec::of({1.0, 1.0}));
  CauchySurface s(g, parse_expression("0.5*x"), box);

  SurfacePoint p = s.embed(Vec::of({0.4, -0.2}));
  CHECK(p.event.t() == doctest::Approx(0.2).epsilon(1e-14));

  Vec e1 = s.frame_vector(p, 0);
  CHECK(e1[0] == 0.5);
  CHECK(e1[1] == 1.0);
  CHECK(e1[2] == 0.0);

  Mat h = s.induced_metric(p);
  CHECK(h(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(h(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(h(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  Mat hinv = s.inverse_induced_metric(p);
  CHECK(hinv(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  SpacetimeVector n = s.future_normal(p);
  CHECK(n.components[0] == doctest::Approx(1.1547005383792515).epsilon(1e-14));
  CHECK(n.components[1] == doctest::Approx(0.57735026918962573).epsilon(1e-14));
  CHECK(n.components[2] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(g.inner(p.event, n.components, n.components) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(g.inner(p.event, n.components, s.frame_vector(p, 0))) < 1e-14);
  CHECK(std::abs(g.inner(p.event, n.components, s.frame_vector(p, 1))) < 1e-14);

  CHECK_THROWS_AS(s.embed(Vec::of({1.5, 0.0})), DomainError);
}

TEST_CASE("normal stays unit and orthogonal in curved charts") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  Domain box = Domain::box(Vec::of({-1.0, -1.0}), Vec::of({1.0, 1.0}));
  CauchySurface s(g, parse_expression("0.5 + 0.1*x - 0.05*y"), box);
  for (double x : {-0.9, 0.0, 0.7}) {
    for (double y : {-0.5, 0.3}) {
      SurfacePoint p = s.embed(Vec::of({x, y}));
      SpacetimeVector n = s.future_normal(p);
      CHECK(n.components[0] > 0.0);
      CHECK(g.inner(p.event, n.components, n.components) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(g.inner(p.event, n.components, s.frame_vector(p, 0))) < 1e-12);
      CHECK(std::abs(g.inner(p.event, n.components, s.frame_vector(p, 1))) < 1e-12);
    }
  }
}

TEST_CASE("graphs that are too steep are rejected up front") {
  auto g = SpacetimeMetric::minkowski(3);
  Domain box = Domain::box(Vec::of({-1.0, -1.0}), Vec::of({1.0, 1.0}));
  CHECK_THROWS_AS(CauchySurface(g, parse_expression("1.2*x"), box), NotSpacelikeError);
  CHECK_THROWS_AS(CauchySurface(g, parse_expression("x"), box), NotSpacelikeError);  // marginal
  CHECK_THROWS_AS(CauchySurface(g, parse_expression("t"), box), ConfigError);
  CHECK_THROWS_AS(CauchySurface(g, parse_expression("0"), Domain::torus(Vec::of({1.0, 1.0, 1.0}))),
                  ConfigError);
}

TEST_CASE("graph bounds come from the constructor scan") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface s(g, parse_expression("0.25 + 0.1*sin(2*pi*x)"), unit_torus2());
  CHECK(s.graph_min() == doctest::Approx(0.15).epsilon(1e-3));
  CHECK(s.graph_max() == doctest::Approx(0.35).epsilon(1e-3));
  CHECK(s.graph(Vec::of({0.25, 0.9})) == doctest::Approx(0.35).epsilon(1e-14));
}

TEST_CASE("riemannian volume by midpoint quadrature") {
  // Constant-slope plane: density sqrt(3)/2 everywhere, quadrature is exact.
  auto g = SpacetimeMetric::minkowski(3);
  Domain box = Domain::box(Vec::of({0.0, 0.0}), Vec::of({1.0, 1.0}));
  CauchySurface s(g, parse_expression("0.5*x"), box);
  CHECK(s.riemannian_volume() == doctest::Approx(0.8660254037844386).epsilon(1e-13));
  CHECK(s.riemannian_volume(Region::interval(0, 0.0, 0.5)) ==
        doctest::Approx(0.4330127018922193).epsilon(1e-13));

  // Constant-time slice of the expanding chart: area scales with a^2.
  auto f = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface flat(f, parse_expression("1"), unit_torus2());
  CHECK(flat.riemannian_volume() == doctest::Approx(7.3890560989306495).epsilon(1e-13));
  // A wrapped interval of measure 1/2 gets exactly half of it.
  CHECK(flat.riemannian_volume(Region::interval(0, 0.75, 0.25)) ==
        doctest::Approx(7.3890560989306495 / 2).epsilon(1e-13));

  // Explicit resolution override still integrates a constant exactly.
  QuadratureSpec spec;
  spec.points_per_axis = 17;
  CHECK(flat.riemannian_volume(Region::whole(), spec) ==
        doctest::Approx(7.3890560989306495).epsilon(1e-13));
}

TEST_CASE("cosphere samples are deterministic and unit length") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface s(g, parse_expression("0.5 + 0.05*sin(2*pi*x)*cos(2*pi*y)"), unit_torus2());

  UnitCovector a = s.sample_covector(7, 3);
  UnitCovector b = s.sample_covector(7, 3);
  CHECK(a.base.spatial[0] == b.base.spatial[0]);
  CHECK(a.covector[0] == b.covector[0]);
  CHECK(a.covector[1] == b.covector[1]);

  UnitCovector c = s.sample_covector(7, 4);
  UnitCovector d = s.sample_covector(8, 3);
  CHECK(a.base.spatial[0] != c.base.spatial[0]);
  CHECK(a.base.spatial[0] != d.base.spatial[0]);

  auto batch = s.sample_cosphere(7, 5);
  CHECK(batch[3].covector[1] == a.covector[1]);

  for (const auto& u : batch) {
    const Mat hinv = s.inverse_induced_metric(u.base);
    CHECK(std::abs(bilinear(hinv, u.covector, u.covector) - 1.0) < 1e-10);
    CHECK(std::abs(norm(s.frame_components(u)) - 1.0) < 1e-12);
  }
}

TEST_CASE("frame components invert the frame lift") {
  auto g = SpacetimeMetric::minkowski(3);
  Domain box = Domain::box(Vec::of({-1.0, -1.0}), Vec::of({1.0, 1.0}));
  CauchySurface s(g, parse_expression("0.3*x + 0.2*y"), box);
  SurfacePoint p = s.embed(Vec::of({0.1, 0.2}));
  Vec w = Vec::of({0.6, -0.8});
  UnitCovector u = s.covector_from_frame(p, w);
  Vec back = s.frame_components(u);
  CHECK(back[0] == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(back[1] == doctest::Approx(-0.8).epsilon(1e-13));
  const Mat hinv = s.inverse_induced_metric(p);
  CHECK(bilinear(hinv, u.covector, u.covector) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("base points follow the area density") {
  // A rippled graph in flat spacetime has area density sqrt(1 - f_x^2),
  // which dips to ~0.48 where the slope peaks.  The sampled occupancy of a
  // slab must match the quadrature area fraction, not the naive coordinate
  // fraction.
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface s(g, parse_expression("0.14*sin(2*pi*x)"), unit_torus2());

  const Region slab = Region::interval(0, 0.4, 0.6);
  const double whole = s.riemannian_volume();
  const double part = s.riemannian_volume(slab);
  const double expected = part / whole;
  CHECK(std::abs(expected - 0.2) > 0.02);  // the density dip is visible

  const int count = 8192;
  auto samples = s.sample_cosphere(11, count);
  int inside = 0;
  for (const auto& u : samples)
    if (slab.contains(s.domain(), u.base.spatial)) ++inside;
  const double fraction = static_cast<double>(inside) / count;
  const double sigma = std::sqrt(expected * (1.0 - expected) / count);
  CHECK(std::abs(fraction - expected) < 4.0 * sigma);
}

TEST_CASE("base points are uniform when the density is constant") {
  auto g = SpacetimeMetric::minkowski(3);
  CauchySurface s(g, parse_expression("0"), unit_torus2());
  const int count = 4096, bins = 16;
  std::array<int, 16> hist{};
  auto samples = s.sample_cosphere(3, count);
  for (const auto& u : samples) {
    int b = static_cast<int>(u.base.spatial[0] * bins);
    hist[static_cast<size_t>(std::min(b, bins - 1))]++;
  }
  double chi2 = 0;
  const double e = static_cast<double>(count) / bins;
  for (int b = 0; b < bins; ++b) chi2 += (hist[static_cast<size_t>(b)] - e) * (hist[static_cast<size_t>(b)] - e) / e;
  // 15 degrees of freedom; generous two-sided band for a fixed seed.
  CHECK(chi2 > 3.0);
  CHECK(chi2 < 40.0);
}

TEST_CASE("fibre directions are isotropic in the orthonormal frame") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CauchySurface s(g, parse_expression("0.5 + 0.05*sin(2*pi*x)"), unit_torus2());
  const int count = 4096;
  auto samples = s.sample_cosphere(5, count);
  Vec mean = Vec(2);
  double xx = 0, xy = 0, yy = 0;
  for (const auto& u : samples) {
    Vec w = s.frame_components(u);
    mean += w;
    xx += w[0] * w[0];
    xy += w[0] * w[1];
    yy += w[1] * w[1];
  }
  mean *= 1.0 / count;
  // Mean direction of a uniform circle distribution concentrates at
  // O(1/sqrt(count)); second moments converge to I/2.
  CHECK(norm(mean) < 4.0 / std::sqrt(static_cast<double>(count)));
  CHECK(xx / count == doctest::Approx(0.5).epsilon(0.05));
  CHECK(yy / count == doctest::Approx(0.5).epsilon(0.05));
  CHECK(std::abs(xy / count) < 0.03);
}

TEST_CASE("three-dimensional slices integrate and sample too") {
  auto g = SpacetimeMetric::flrw(4, parse_expression("exp(t)"));
  Domain t3 = Domain::torus(Vec::of({1.0, 1.0, 1.0}));
  CauchySurface s(g, parse_expression("0.5"), t3);
  const double a3 = std::exp(1.5);  // sqrt(det h) = a^3
  CHECK(s.riemannian_volume() == doctest::Approx(a3).epsilon(1e-12));
  auto samples = s.sample_cosphere(9, 32);
  for (const auto& u : samples) {
    CHECK(std::abs(norm(s.frame_components(u)) - 1.0) < 1e-12);
    CHECK(u.base.event.t() == 0.5);
  }
}
