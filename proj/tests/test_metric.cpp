#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lightray/metric.hpp"

using namespace lightray;

namespace {

Event ev(std::initializer_list<double> xs) { return Event{Vec::of(xs)}; }

SpacetimeVector sv(std::initializer_list<double> base, std::initializer_list<double> comps) {
  return SpacetimeVector{ev(base), Vec::of(comps)};
}

double max_gamma_diff(const Christoffel& a, const Christoffel& b) {
  double m = 0;
  for (int mu = 0; mu < a.n; ++mu)
    for (int al = 0; al < a.n; ++al)
      for (int be = 0; be < a.n; ++be)
        m = std::max(m, std::abs(a(mu, al, be) - b(mu, al, be)));
  return m;
}

}  // namespace

TEST_CASE("minkowski metric is the constant diagonal") {
  auto g = SpacetimeMetric::minkowski(3);
  Mat m = g.metric_at(ev({0.3, -2.0, 7.0}));
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == -1.0);
  CHECK(m(2, 2) == -1.0);
  CHECK(m(0, 1) == 0.0);
  Christoffel gamma = g.christoffel_at(ev({0, 0, 0}));
  CHECK(max_gamma_diff(gamma, Christoffel(3)) == 0.0);
  CHECK_THROWS_AS(SpacetimeMetric::minkowski(2), DomainError);
  CHECK_THROWS_AS(SpacetimeMetric::minkowski(5), DomainError);
}

TEST_CASE("expanding metric with exponential scale factor") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  const double e2 = 7.3890560989306495;  // e^2
  Mat m = g.metric_at(ev({1.0, 0.5, -0.5}));
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == doctest::Approx(-e2).epsilon(1e-14));
  CHECK(m(2, 2) == doctest::Approx(-e2).epsilon(1e-14));
  Mat inv = g.inverse_metric_at(ev({1.0, 0.5, -0.5}));
  CHECK(inv(1, 1) == doctest::Approx(-1.0 / e2).epsilon(1e-14));

  // a = a' = 1 at t = 0, so the only nonzero symbols are all exactly 1.
  Christoffel gamma = g.christoffel_at(ev({0.0, 0.2, 0.3}));
  CHECK(gamma(0, 1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(0, 2, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(1, 0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(2, 0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(0, 1, 2) == 0.0);
  CHECK(gamma(0, 0, 0) == 0.0);
  CHECK(gamma(1, 2, 2) == 0.0);
}

TEST_CASE("power-law scale factor and its chart boundary") {
  auto g = SpacetimeMetric::flrw(3, parse_expression("t^(2/3)"));
  // At t = 8: a = 4, a' = 1/3.
  CHECK(g.scale_factor(8.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(g.scale_factor_deriv(8.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  Christoffel gamma = g.christoffel_at(ev({8.0, 0.0, 0.0}));
  CHECK(gamma(0, 1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(gamma(1, 0, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));

  CHECK(g.in_chart(ev({0.5, 0, 0})));
  CHECK_FALSE(g.in_chart(ev({0.0, 0, 0})));
  CHECK_FALSE(g.in_chart(ev({-1.0, 0, 0})));
  CHECK_THROWS_AS(g.metric_at(ev({-1.0, 0, 0})), DomainError);
}

TEST_CASE("scale factor must not depend on space") {
  CHECK_THROWS_AS(SpacetimeMetric::flrw(3, parse_expression("t + x")), ConfigError);
}

TEST_CASE("conformal factor symbols match the closed form") {
  // Omega = exp(x/10), so d(log Omega) = (0, 1/10, 0).
  auto g = SpacetimeMetric::conformal(3, parse_expression("exp(0.1*x)"));
  Event e = ev({0.4, 1.1, -2.0});
  const double w2 = std::exp(0.2 * 1.1);
  Mat m = g.metric_at(e);
  CHECK(m(0, 0) == doctest::Approx(w2).epsilon(1e-14));
  CHECK(m(1, 1) == doctest::Approx(-w2).epsilon(1e-14));

  Christoffel gamma = g.christoffel_at(e);
  CHECK(gamma(0, 0, 1) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(gamma(0, 1, 0) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(gamma(1, 0, 0) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(gamma(1, 1, 1) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(gamma(2, 1, 2) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(gamma(1, 2, 2) == doctest::Approx(-0.1).epsilon(1e-13));
  CHECK(gamma(0, 1, 1) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(gamma(2, 0, 0) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("finite-difference symbols agree with the analytic ones") {
  Event e = ev({1.0, 0.7, -0.4});
  {
    auto g = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
    CHECK(max_gamma_diff(g.christoffel_at(e), g.christoffel_fd(e, 1e-5)) < 1e-8);
  }
  {
    auto g = SpacetimeMetric::conformal(3, parse_expression("1 + 0.1*sin(t)*cos(x)"));
    CHECK(max_gamma_diff(g.christoffel_at(e), g.christoffel_fd(e, 1e-5)) < 1e-8);
  }
  {
    // Selecting the finite-difference mode reroutes christoffel_at itself.
    MetricOptions opts;
    opts.christoffel = ChristoffelMode::kFiniteDifference;
    auto fd = SpacetimeMetric::flrw(3, parse_expression("t^(2/3)"), opts);
    auto an = SpacetimeMetric::flrw(3, parse_expression("t^(2/3)"));
    CHECK(max_gamma_diff(fd.christoffel_at(ev({2.0, 0, 0})), an.christoffel_at(ev({2.0, 0, 0}))) < 1e-8);
  }
}

TEST_CASE("finite-difference stencil must stay inside the chart") {
  MetricOptions opts;
  opts.t_min = 0.0;
  auto g = SpacetimeMetric::flrw(3, parse_expression("t^(2/3)"), opts);
  CHECK_THROWS_AS(g.christoffel_fd(ev({5e-7, 0, 0}), 1e-5), DomainError);
}

TEST_CASE("causal classification") {
  auto g = SpacetimeMetric::minkowski(3);
  CHECK(g.classify(sv({0, 0, 0}, {1, 0, 0})) == CausalClass::kTimelikeFuture);
  CHECK(g.classify(sv({0, 0, 0}, {-1, 0.1, 0})) == CausalClass::kTimelikePast);
  CHECK(g.classify(sv({0, 0, 0}, {2, 2, 0})) == CausalClass::kNullFuture);
  CHECK(g.classify(sv({0, 0, 0}, {-3, 0, 3})) == CausalClass::kNullPast);
  CHECK(g.classify(sv({0, 0, 0}, {0.5, 1, 0})) == CausalClass::kSpacelike);
  CHECK(g.classify(sv({0, 0, 0}, {0, 1, 1})) == CausalClass::kSpacelike);
  CHECK(g.classify(sv({0, 0, 0}, {0, 0, 0})) == CausalClass::kZero);

  // The null band is relative to (v^0)^2: residual 5e-11 is inside the
  // default 1e-10 band, 4e-10 is outside it.
  CHECK(g.classify(sv({0, 0, 0}, {1, std::sqrt(1.0 - 5e-11), 0})) == CausalClass::kNullFuture);
  CHECK(g.classify(sv({0, 0, 0}, {1, std::sqrt(1.0 - 4e-10), 0})) == CausalClass::kTimelikeFuture);
  CHECK(g.classify(sv({0, 0, 0}, {1, std::sqrt(1.0 + 4e-10), 0})) == CausalClass::kSpacelike);

  // Classification reads the metric at the base event.
  auto h = SpacetimeMetric::flrw(3, parse_expression("exp(t)"));
  CHECK(h.classify(sv({1, 0, 0}, {1, std::exp(-1.0), 0})) == CausalClass::kNullFuture);
  CHECK(h.classify(sv({0, 0, 0}, {1, std::exp(-1.0), 0})) == CausalClass::kTimelikeFuture);
}

TEST_CASE("observer normalization") {
  auto g = SpacetimeMetric::minkowski(3);
  SpacetimeVector u = g.normalize_observer(sv({0, 0, 0}, {1, 0.5, 0}));
  CHECK(u.components[0] == doctest::Approx(1.1547005383792515).epsilon(1e-15));
  CHECK(u.components[1] == doctest::Approx(0.57735026918962573).epsilon(1e-15));
  CHECK(g.inner(u.base, u.components, u.components) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(g.normalize_observer(sv({0, 0, 0}, {1, 1, 0})), NotTimelikeError);
  CHECK_THROWS_AS(g.normalize_observer(sv({0, 0, 0}, {-1, 0, 0})), NotTimelikeError);
  CHECK_THROWS_AS(g.normalize_observer(sv({0, 0, 0}, {0.2, 1, 0})), NotTimelikeError);
}

TEST_CASE("chart limits from options") {
  MetricOptions opts;
  opts.t_min = -1.0;
  opts.t_max = 5.0;
  auto g = SpacetimeMetric::minkowski(4, opts);
  CHECK(g.in_chart(ev({0, 0, 0, 0})));
  CHECK_FALSE(g.in_chart(ev({5.0, 0, 0, 0})));
  CHECK_FALSE(g.in_chart(ev({6.0, 0, 0, 0})));
  CHECK_FALSE(g.in_chart(ev({-1.5, 0, 0, 0})));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_FALSE(g.in_chart(ev({0, inf, 0, 0})));
  CHECK_FALSE(g.in_chart(ev({0, std::nan(""), 0, 0})));
}

TEST_CASE("four-dimensional charts work the same way") {
  auto g = SpacetimeMetric::flrw(4, parse_expression("exp(t)"));
  Mat m = g.metric_at(ev({0.0, 1, 2, 3}));
  CHECK(m(3, 3) == -1.0);
  Christoffel gamma = g.christoffel_at(ev({0.0, 1, 2, 3}));
  CHECK(gamma(3, 0, 3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_gamma_diff(gamma, g.christoffel_fd(ev({0.0, 1, 2, 3}), 1e-5)) < 1e-8);
}
