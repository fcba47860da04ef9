#include "lightray/surface.hpp"

#include <cmath>
#include <sstream>

namespace lightray {

Domain Domain::torus(const Vec& periods) {
  Domain d;
  d.kind = Kind::kTorus;
  d.periods = periods;
  d.n = periods.n;
  for (int i = 0; i < d.n; ++i)
    if (!(periods[i] > 0)) throw ConfigError("torus periods must be positive");
  return d;
}

Domain Domain::box(const Vec& lo, const Vec& hi) {
  Domain d;
  d.kind = Kind::kBox;
  d.lo = lo;
  d.hi = hi;
  d.n = lo.n;
  for (int i = 0; i < d.n; ++i)
    if (!(hi[i] > lo[i])) throw ConfigError("box needs hi > lo on every axis");
  return d;
}

Vec Domain::canonical(const Vec& spatial) const {
  if (kind == Kind::kBox) return spatial;
  Vec w = spatial;
  for (int i = 0; i < n; ++i) {
    const double p = periods[i];
    w[i] = spatial[i] - p * std::floor(spatial[i] / p);
    if (w[i] >= p) w[i] -= p;  // guard against floor rounding at the seam
  }
  return w;
}

bool Domain::contains(const Vec& spatial) const {
  if (kind == Kind::kTorus) return true;
  for (int i = 0; i < n; ++i)
    if (spatial[i] < lo[i] || spatial[i] > hi[i]) return false;
  return true;
}

double Domain::extent(int axis) const {
  return kind == Kind::kTorus ? periods[axis] : hi[axis] - lo[axis];
}

double Domain::origin(int axis) const { return kind == Kind::kTorus ? 0.0 : lo[axis]; }

Vec Domain::difference(const Vec& a, const Vec& b) const {
  Vec d = a - b;
  if (kind == Kind::kTorus)
    for (int i = 0; i < n; ++i) d[i] -= periods[i] * std::round(d[i] / periods[i]);
  return d;
}

bool Region::contains(const Domain& d, const Vec& spatial) const {
  const Vec w = d.canonical(spatial);
  for (int i = 0; i < d.n; ++i) {
    const auto& iv = axes[static_cast<size_t>(i)];
    if (!iv) continue;
    if (d.kind == Domain::Kind::kTorus && iv->lo > iv->hi) {
      // wrapped interval across the seam
      if (!(w[i] >= iv->lo || w[i] < iv->hi)) return false;
    } else {
      if (!(w[i] >= iv->lo && w[i] < iv->hi)) return false;
    }
  }
  return true;
}

CauchySurface::CauchySurface(const SpacetimeMetric& metric, Expr f, Domain domain,
                             std::string name)
    : metric_(&metric), f_(std::move(f)), domain_(domain), name_(std::move(name)) {
  if (domain_.n != metric.spatial_dim())
    throw ConfigError("domain dimension does not match the metric");
  if (f_.uses_variable(0))
    throw ConfigError("graph function may depend on spatial variables only: " + f_.str());
  for (int i = 0; i < 3; ++i) df_[static_cast<size_t>(i)] = f_.derivative(i + 1);
  scan_grid();
}

double CauchySurface::graph(const Vec& spatial) const {
  const Vec w = domain_.canonical(spatial);
  std::array<double, 4> vars{};
  for (int i = 0; i < domain_.n; ++i) vars[static_cast<size_t>(i + 1)] = w[i];
  return f_(vars);
}

Vec CauchySurface::gradient(const Vec& spatial) const {
  const Vec w = domain_.canonical(spatial);
  std::array<double, 4> vars{};
  for (int i = 0; i < domain_.n; ++i) vars[static_cast<size_t>(i + 1)] = w[i];
  Vec g(domain_.n);
  for (int i = 0; i < domain_.n; ++i) g[i] = df_[static_cast<size_t>(i)](vars);
  return g;
}

SurfacePoint CauchySurface::embed(const Vec& spatial) const {
  if (!domain_.contains(spatial)) {
    std::ostringstream os;
    os << "point outside surface domain of " << name_;
    throw DomainError(os.str());
  }
  SurfacePoint p;
  p.spatial = domain_.canonical(spatial);
  p.event.coords = Vec(domain_.n + 1);
  p.event.coords[0] = graph(p.spatial);
  for (int i = 0; i < domain_.n; ++i) p.event.coords[i + 1] = p.spatial[i];
  return p;
}

Vec CauchySurface::frame_vector(const SurfacePoint& p, int i) const {
  Vec e(domain_.n + 1);
  e[0] = gradient(p.spatial)[i];
  e[i + 1] = 1.0;
  return e;
}

Mat CauchySurface::induced_metric(const SurfacePoint& p) const {
  const Mat g = metric_->metric_at(p.event);
  const Vec grad = gradient(p.spatial);
  const int n = domain_.n;
  Mat h(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // -<e_i, e_j> with e_i = (f_i, delta_i); metric is diagonal here but
      // keep the general contraction so future families stay correct.
      Vec ei(n + 1), ej(n + 1);
      ei[0] = grad[i];
      ei[i + 1] = 1.0;
      ej[0] = grad[j];
      ej[j + 1] = 1.0;
      h(i, j) = -bilinear(g, ei, ej);
    }
  if (smallest_eigenvalue(h) <= 1e-10)
    throw NotSpacelikeError("surface " + name_ + " is not spacelike at a queried point");
  return h;
}

Mat CauchySurface::inverse_induced_metric(const SurfacePoint& p) const {
  return inverse(induced_metric(p));
}

SpacetimeVector CauchySurface::future_normal(const SurfacePoint& p) const {
  const int dim = domain_.n + 1;
  const Mat ginv = metric_->inverse_metric_at(p.event);
  const Vec grad = gradient(p.spatial);
  // Conormal N = dt - f_i dx^i annihilates every frame vector; raise the
  // index and normalize to unit proper time.
  Vec nco(dim);
  nco[0] = 1.0;
  for (int i = 1; i < dim; ++i) nco[i] = -grad[i - 1];
  Vec n = mul(ginv, nco);
  const double q = bilinear(metric_->metric_at(p.event), n, n);
  if (q <= 0.0)
    throw NotSpacelikeError("surface " + name_ + " has no timelike normal at a queried point");
  n *= 1.0 / std::sqrt(q);
  if (n[0] < 0.0) n *= -1.0;
  return SpacetimeVector{p.event, n};
}

void CauchySurface::scan_grid() {
  // One coarse pass: verify spacelikeness, record the graph's time range,
  // and bound sqrt(det h) for rejection sampling.
  const int n = domain_.n;
  const int res = n == 2 ? 96 : 32;
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = -fmin;
  double dmax = 0.0;
  std::array<int, 3> idx{};
  const long total = static_cast<long>(std::pow(res, n));
  for (long c = 0; c < total; ++c) {
    long rem = c;
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      idx[static_cast<size_t>(i)] = static_cast<int>(rem % res);
      rem /= res;
      const double frac = (idx[static_cast<size_t>(i)] + 0.5) / res;
      x[i] = domain_.kind == Domain::Kind::kTorus ? frac * domain_.periods[i]
                                                  : domain_.lo[i] + frac * (domain_.hi[i] - domain_.lo[i]);
    }
    const SurfacePoint p = embed(x);
    fmin = std::min(fmin, p.event.t());
    fmax = std::max(fmax, p.event.t());
    const Mat h = induced_metric(p);  // throws NotSpacelikeError when unsafe
    dmax = std::max(dmax, std::sqrt(determinant(h)));
  }
  f_min_ = fmin;
  f_max_ = fmax;
  density_bound_ = 1.5 * dmax;
}

double CauchySurface::riemannian_volume(const Region& region, QuadratureSpec quad) const {
  const int n = domain_.n;
  const int res = quad.resolve(n);
  double cell = 1.0;
  for (int i = 0; i < n; ++i) cell *= domain_.extent(i) / res;
  const long total = static_cast<long>(std::pow(res, n));
  double sum = 0.0, comp = 0.0;
  for (long c = 0; c < total; ++c) {
    long rem = c;
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(rem % res);
      rem /= res;
      const double frac = (k + 0.5) / res;
      x[i] = domain_.kind == Domain::Kind::kTorus ? frac * domain_.periods[i]
                                                  : domain_.lo[i] + frac * (domain_.hi[i] - domain_.lo[i]);
    }
    if (!region.contains(domain_, x)) continue;
    const double v = std::sqrt(determinant(induced_metric(embed(x))));
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum * cell;
}

UnitCovector CauchySurface::covector_from_frame(const SurfacePoint& p, const Vec& unit_frame) const {
  // p = L u with h = L L^T maps the round sphere isometrically onto the
  // unit covector sphere of h^{-1}.
  const Mat h = induced_metric(p);
  const Mat l = cholesky(h);
  const int n = domain_.n;
  Vec cov(n);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j <= i; ++j) s += l(i, j) * unit_frame[j];
    cov[i] = s;
  }
  return UnitCovector{p, cov};
}

Vec CauchySurface::frame_components(const UnitCovector& u) const {
  const Mat h = induced_metric(u.base);
  const Mat l = cholesky(h);
  // forward substitution: solve L w = covector
  Vec w(domain_.n);
  for (int i = 0; i < domain_.n; ++i) {
    double s = u.covector[i];
    for (int j = 0; j < i; ++j) s -= l(i, j) * w[j];
    w[i] = s / l(i, i);
  }
  return w;
}

UnitCovector CauchySurface::sample_covector(uint64_t seed, uint64_t index) const {
  RandomStream rng(seed, index);
  const int n = domain_.n;
  // Base point: rejection against the scanned envelope of sqrt(det h).
  SurfacePoint p;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000)
      throw ConsistencyError("cosphere sampling rejection loop failed to terminate");
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = domain_.kind == Domain::Kind::kTorus
                 ? rng.uniform(0.0, domain_.periods[i])
                 : rng.uniform(domain_.lo[i], domain_.hi[i]);
    }
    p = embed(x);
    const double density = std::sqrt(determinant(induced_metric(p)));
    if (density > density_bound_)
      throw ConsistencyError("surface density exceeds its sampling envelope; refine the scan");
    if (rng.uniform() * density_bound_ <= density) break;
  }
  // Fibre: gaussian direction in the orthonormal frame, normalized.
  Vec u(n);
  double r;
  do {
    for (int i = 0; i < n; ++i) u[i] = rng.gaussian();
    r = norm(u);
  } while (r < 1e-12);
  u *= 1.0 / r;
  return covector_from_frame(p, u);
}

std::vector<UnitCovector> CauchySurface::sample_cosphere(uint64_t seed, int count) const {
  std::vector<UnitCovector> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_covector(seed, static_cast<uint64_t>(i)));
  return out;
}

}  // namespace lightray
