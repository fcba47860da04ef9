#include "lightray/geodesic.hpp"

#include <algorithm>
#include <cmath>

namespace lightray {

namespace {

struct GeodesicRhs {
  const SpacetimeMetric* metric;
  int dim;

  void operator()(double, const double* y, double* dy) const {
    Event e;
    e.coords = Vec(dim);
    for (int i = 0; i < dim; ++i) e.coords[i] = y[i];
    const Christoffel gamma = metric->christoffel_at(e);  // chart-checked
    for (int i = 0; i < dim; ++i) dy[i] = y[dim + i];
    for (int mu = 0; mu < dim; ++mu) {
      double s = 0;
      for (int al = 0; al < dim; ++al) {
        const double va = y[dim + al];
        for (int be = 0; be < dim; ++be) s += gamma(mu, al, be) * va * y[dim + be];
      }
      dy[dim + mu] = -s;
    }
  }
};

OdeState pack_state(const GeodesicState& s, int dim) {
  OdeState y{};
  for (int i = 0; i < dim; ++i) {
    y[static_cast<size_t>(i)] = s.event.coords[i];
    y[static_cast<size_t>(dim + i)] = s.tangent[i];
  }
  return y;
}

GeodesicState unpack_state(const double* y, int dim) {
  GeodesicState s;
  s.event.coords = Vec(dim);
  s.tangent = Vec(dim);
  for (int i = 0; i < dim; ++i) {
    s.event.coords[i] = y[i];
    s.tangent[i] = y[dim + i];
  }
  return s;
}

void check_initial_tangent(const SpacetimeMetric& metric, const GeodesicState& initial) {
  const CausalClass cls = metric.classify(SpacetimeVector{initial.event, initial.tangent});
  if (cls != CausalClass::kNullFuture)
    throw NoNullSolutionError("initial tangent is not future null");
}

}  // namespace

Vec null_project(const SpacetimeMetric& metric, const Event& e, const Vec& spatial_dir) {
  const int dim = metric.dim();
  if (max_abs(spatial_dir) == 0.0)
    throw NoNullSolutionError("cannot project the zero spatial direction");
  const Mat g = metric.metric_at(e);
  double a = g(0, 0), b = 0, c = 0;
  for (int i = 1; i < dim; ++i) {
    b += 2.0 * g(0, i) * spatial_dir[i - 1];
    for (int j = 1; j < dim; ++j) c += g(i, j) * spatial_dir[i - 1] * spatial_dir[j - 1];
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) throw NoNullSolutionError("no real future null solution here");
  const double k0 = (-b + std::sqrt(disc)) / (2.0 * a);
  if (k0 <= 0.0) throw NoNullSolutionError("null solution is not future-directed");
  Vec k(dim);
  k[0] = k0;
  for (int i = 1; i < dim; ++i) k[i] = spatial_dir[i - 1];
  return k;
}

double NullGeodesic::lambda_min() const {
  return backward_.dim == 0 ? lambda0_ : std::min(lambda0_, backward_.t_end);
}

double NullGeodesic::lambda_max() const {
  return forward_.dim == 0 ? lambda0_ : std::max(lambda0_, forward_.t_end);
}

GeodesicState NullGeodesic::state_at(double lambda) const {
  const OdeSolution* leg = nullptr;
  if (forward_.dim != 0 && forward_.covers(lambda))
    leg = &forward_;
  else if (backward_.dim != 0 && backward_.covers(lambda))
    leg = &backward_;
  if (!leg) throw DomainError("affine parameter outside the stored trajectory range");
  OdeState y{};
  leg->eval(lambda, y.data());
  return unpack_state(y.data(), dim_);
}

std::vector<double> NullGeodesic::nodes() const {
  std::vector<double> ts;
  if (backward_.dim != 0) {
    ts = backward_.node_times();
    std::reverse(ts.begin(), ts.end());
  }
  if (forward_.dim != 0) {
    auto fw = forward_.node_times();
    if (!ts.empty() && !fw.empty() && fw.front() == ts.back()) fw.erase(fw.begin());
    ts.insert(ts.end(), fw.begin(), fw.end());
  }
  if (ts.empty()) ts.push_back(lambda0_);
  return ts;
}

void NullGeodesic::finalize(const RayOptions& opts) {
  // Null-constraint drift over nodes and step midpoints, relative to the
  // squared time component, plus the reached time range.
  double drift = 0;
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  auto scan = [&](const OdeSolution& leg) {
    if (leg.dim == 0) return;
    auto probe = [&](double lam) {
      OdeState y{};
      leg.eval(lam, y.data());
      const GeodesicState s = unpack_state(y.data(), dim_);
      const double q = metric_->inner(s.event, s.tangent, s.tangent);
      const double t0 = s.tangent[0];
      drift = std::max(drift, std::abs(q) / (t0 * t0));
      tmin = std::min(tmin, s.event.t());
      tmax = std::max(tmax, s.event.t());
    };
    for (const auto& st : leg.steps) {
      probe(st.t0);
      probe(st.t0 + 0.5 * st.h);
    }
    probe(leg.t_end);
  };
  scan(forward_);
  scan(backward_);
  null_drift_ = drift;
  t_min_ = tmin;
  t_max_ = tmax;
  if (drift > opts.null_drift_bound)
    throw StepFailureError("null constraint drift " + std::to_string(drift) +
                           " exceeds bound; tighten integrator tolerances");
}

NullGeodesic integrate_null(const SpacetimeMetric& metric, const GeodesicState& initial,
                            double lambda0, double lambda_lo, double lambda_hi,
                            const RayOptions& opts) {
  if (!(lambda_lo <= lambda0 && lambda0 <= lambda_hi))
    throw DomainError("anchor parameter must lie inside the affine range");
  check_initial_tangent(metric, initial);
  NullGeodesic geo;
  geo.metric_ = &metric;
  geo.dim_ = metric.dim();
  geo.lambda0_ = lambda0;
  const GeodesicRhs rhs{&metric, geo.dim_};
  const OdeState y0 = pack_state(initial, geo.dim_);
  if (lambda_hi > lambda0) {
    geo.forward_ = dopri5(rhs, 2 * geo.dim_, lambda0, y0.data(), lambda_hi, opts.ode);
    geo.fwd_status_ = geo.forward_.status == OdeStatus::kComplete ? LegStatus::kComplete
                                                                  : LegStatus::kChartExit;
  } else {
    geo.forward_ = dopri5(rhs, 2 * geo.dim_, lambda0, y0.data(), lambda0, opts.ode);
  }
  if (lambda_lo < lambda0) {
    geo.backward_ = dopri5(rhs, 2 * geo.dim_, lambda0, y0.data(), lambda_lo, opts.ode);
    geo.bwd_status_ = geo.backward_.status == OdeStatus::kComplete ? LegStatus::kComplete
                                                                   : LegStatus::kChartExit;
  }
  geo.finalize(opts);
  return geo;
}

NullGeodesic integrate_replay(const SpacetimeMetric& metric, const GeodesicState& initial,
                              double lambda0, const std::vector<double>& forward_steps,
                              const std::vector<double>& backward_steps, const RayOptions& opts) {
  // No null check here: replay is the machinery behind variation families,
  // whose equal-speed negative control deliberately integrates members with
  // an unprojected (non-null) tangent.  The drift guard in opts still
  // applies unless the caller widens it.
  NullGeodesic geo;
  geo.metric_ = &metric;
  geo.dim_ = metric.dim();
  geo.lambda0_ = lambda0;
  const GeodesicRhs rhs{&metric, geo.dim_};
  const OdeState y0 = pack_state(initial, geo.dim_);
  geo.forward_ = dopri5_replay(rhs, 2 * geo.dim_, lambda0, y0.data(), forward_steps);
  if (!backward_steps.empty())
    geo.backward_ = dopri5_replay(rhs, 2 * geo.dim_, lambda0, y0.data(), backward_steps);
  geo.finalize(opts);
  return geo;
}

namespace {

double surface_gap(const NullGeodesic& geo, const CauchySurface& surface, double lambda) {
  const GeodesicState s = geo.state_at(lambda);
  Vec spatial(geo.dim() - 1);
  for (int i = 0; i < spatial.n; ++i) spatial[i] = s.event.coords[i + 1];
  return s.event.t() - surface.graph(spatial);
}

double refine_root(const NullGeodesic& geo, const CauchySurface& surface, double lo, double hi,
                   double glo, double ghi) {
  // Bisection with a secant polish; the gap function is smooth per dense
  // step, so this converges fast and we stop at |g| < 1e-12.
  double a = lo, b = hi, ga = glo, gb = ghi;
  double mid = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    // secant proposal, clamped into the bracket
    double cand = (std::abs(gb - ga) > 1e-300) ? b - gb * (b - a) / (gb - ga) : mid;
    if (!(cand > a && cand < b)) cand = 0.5 * (a + b);
    const double gc = surface_gap(geo, surface, cand);
    if (std::abs(gc) < 1e-12) return cand;
    if ((ga < 0) != (gc < 0)) {
      b = cand;
      gb = gc;
    } else {
      a = cand;
      ga = gc;
    }
    mid = 0.5 * (a + b);
    if (b - a < 1e-15 * std::max(1.0, std::abs(mid))) return mid;
  }
  return mid;
}

}  // namespace

std::optional<Intersection> intersect_surface(const NullGeodesic& geo,
                                              const CauchySurface& surface) {
  const std::vector<double> nodes = geo.nodes();
  const double span = std::max(geo.lambda_max() - geo.lambda_min(), 1e-30);
  std::vector<double> roots;
  auto push_root = [&](double lam) {
    for (double r : roots)
      if (std::abs(r - lam) < 1e-9 * span) return;
    roots.push_back(lam);
  };
  std::vector<double> gaps(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) gaps[i] = surface_gap(geo, surface, nodes[i]);
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (std::abs(gaps[i]) < 1e-12) {
      push_root(nodes[i]);
      continue;
    }
    if (i + 1 < nodes.size() && std::abs(gaps[i + 1]) >= 1e-12 &&
        (gaps[i] < 0) != (gaps[i + 1] < 0)) {
      push_root(refine_root(geo, surface, nodes[i], nodes[i + 1], gaps[i], gaps[i + 1]));
    }
  }
  if (roots.empty()) return std::nullopt;
  if (roots.size() > 1)
    throw MultipleIntersectionError("ray meets surface " + surface.name() + " " +
                                    std::to_string(roots.size()) + " times in the stored range");
  Intersection hit;
  hit.lambda = roots.front();
  hit.state = geo.state_at(hit.lambda);
  Vec spatial(geo.dim() - 1);
  for (int i = 0; i < spatial.n; ++i) spatial[i] = hit.state.event.coords[i + 1];
  hit.point = surface.embed(spatial);
  return hit;
}

bool resolves_surface(const NullGeodesic& geo, const CauchySurface& surface) {
  return geo.t_reached_min() < surface.graph_min() && geo.t_reached_max() > surface.graph_max();
}

LightRay ray_from_covector(const CauchySurface& surface, const UnitCovector& u,
                           double lambda_lo, double lambda_hi, const RayOptions& opts) {
  const SpacetimeMetric& metric = surface.metric();
  const int dim = metric.dim();
  const int n = dim - 1;
  const Mat hinv = surface.inverse_induced_metric(u.base);
  const double unit = bilinear(hinv, u.covector, u.covector);
  if (std::abs(unit - 1.0) > 1e-10)
    throw NotUnitError("covector is not unit under the inverse induced metric");

  // k = n_M + w with w^i = h^{ij} p_j lifted to the graph frame; this gives
  // <k, e_i> = -p_i and <k, n_M> = 1 with k null.
  const SpacetimeVector normal = surface.future_normal(u.base);
  Vec w_frame = mul(hinv, u.covector);
  Vec k(dim);
  for (int mu = 0; mu < dim; ++mu) k[mu] = normal.components[mu];
  const Vec grad = surface.gradient(u.base.spatial);
  for (int i = 0; i < n; ++i) {
    k[0] += w_frame[i] * grad[i];
    k[i + 1] += w_frame[i];
  }
  // hygiene: re-solve the time component, then renormalize the pairing
  Vec spatial(n);
  for (int i = 0; i < n; ++i) spatial[i] = k[i + 1];
  k = null_project(metric, u.base.event, spatial);
  const double pairing = metric.inner(u.base.event, k, normal.components);
  k *= 1.0 / pairing;

  auto geo = std::make_shared<NullGeodesic>(
      integrate_null(metric, GeodesicState{u.base.event, k}, 0.0, lambda_lo, lambda_hi, opts));
  return LightRay{std::move(geo), &surface, u};
}

}  // namespace lightray
