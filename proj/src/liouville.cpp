#include "lightray/liouville.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "lightray/errors.hpp"
#include "lightray/rng.hpp"
#include "lightray/util.hpp"

namespace lightray {

double sphere_area(int spatial_dim) {
  if (spatial_dim < 1) throw DomainError("sphere dimension must be positive");
  const double half = 0.5 * spatial_dim;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

SelectorOutcome evaluate_selector(const RaySelector& sel, const NullGeodesic& geo) {
  bool unresolved = false;
  for (const RayCondition& cond : sel.conditions) {
    auto hit = intersect_surface(geo, *cond.surface);
    if (hit) {
      if (!cond.region.contains(cond.surface->domain(), hit->point.spatial))
        return {false, true};
    } else if (resolves_surface(geo, *cond.surface)) {
      return {false, true};
    } else {
      // Cannot tell a miss from a trajectory that ran out of parameter.
      unresolved = true;
    }
  }
  if (unresolved) return {false, false};
  return {true, true};
}

namespace {

int effective_workers(const MeasureOptions& opts) {
  return opts.workers > 0 ? opts.workers : worker_count();
}

MeasureEstimate assemble_estimate(std::span<const double> vals, long escapes, double factor,
                                  std::uint64_t seed) {
  const MeanVar mv = mean_variance(vals);
  MeasureEstimate est;
  est.value = mv.mean * factor;
  est.std_error =
      vals.size() > 1 ? std::sqrt(mv.variance / static_cast<double>(vals.size())) * factor : 0.0;
  est.samples = static_cast<long>(vals.size());
  est.escapes = escapes;
  est.seed = seed;
  return est;
}

// Uniform direction on the unit sphere of orthonormal-frame components.
Vec fibre_direction(RandomStream& rng, int n) {
  while (true) {
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = rng.gaussian();
    const double len = norm(c);
    if (len > 1e-12) return (1.0 / len) * c;
  }
}

// Fibre Monte Carlo at a fixed base point.  Sample i uses the stream
// stream_base + i, so callers can hand out disjoint stream ranges.
MeasureEstimate fibre_integral(const CauchySurface& at, const SurfacePoint& p,
                               const RaySelector& sel,
                               const std::function<double(const LightRay&)>& integrand,
                               const MeasureOptions& opts, std::uint64_t stream_base) {
  const int n = at.spatial_dim();
  std::vector<double> vals(static_cast<size_t>(opts.samples));
  std::vector<char> escaped(static_cast<size_t>(opts.samples), 0);
  parallel_for(opts.samples, effective_workers(opts), [&](std::int64_t i) {
    RandomStream rng(opts.seed, stream_base + static_cast<std::uint64_t>(i));
    const UnitCovector u = at.covector_from_frame(p, fibre_direction(rng, n));
    const LightRay ray = ray_from_covector(at, u, opts.lambda_lo, opts.lambda_hi, opts.ray);
    const SelectorOutcome oc = evaluate_selector(sel, ray.trajectory());
    const size_t ii = static_cast<size_t>(i);
    if (!oc.resolved)
      escaped[ii] = 1;
    else
      vals[ii] = oc.selected ? integrand(ray) : 0.0;
  });
  const long escapes = std::count(escaped.begin(), escaped.end(), char(1));
  return assemble_estimate(vals, escapes, sphere_area(n), opts.seed);
}

// Midpoint angular quadrature over the direction circle (two spatial
// dimensions).  The reported error is the angular resolution bound for a
// selector whose boundary cuts the circle in a handful of arcs.
MeasureEstimate angular_quadrature(const CauchySurface& at, const SurfacePoint& p,
                                   const RaySelector& sel,
                                   const std::function<double(const LightRay&)>& integrand,
                                   const MeasureOptions& opts) {
  const long q = opts.quadrature_nodes;
  std::vector<double> vals(static_cast<size_t>(q));
  std::vector<char> escaped(static_cast<size_t>(q), 0);
  parallel_for(q, effective_workers(opts), [&](std::int64_t j) {
    const double theta =
        2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(q);
    const UnitCovector u =
        at.covector_from_frame(p, Vec::of({std::cos(theta), std::sin(theta)}));
    const LightRay ray = ray_from_covector(at, u, opts.lambda_lo, opts.lambda_hi, opts.ray);
    const SelectorOutcome oc = evaluate_selector(sel, ray.trajectory());
    const size_t jj = static_cast<size_t>(j);
    if (!oc.resolved)
      escaped[jj] = 1;
    else
      vals[jj] = oc.selected ? integrand(ray) : 0.0;
  });
  const double two_pi = 2.0 * std::numbers::pi;
  MeasureEstimate est;
  est.value = pairwise_sum(vals) / static_cast<double>(q) * two_pi;
  est.std_error = 2.0 * two_pi / static_cast<double>(q);
  est.samples = q;
  est.escapes = std::count(escaped.begin(), escaped.end(), char(1));
  est.seed = opts.seed;
  return est;
}

const std::function<double(const LightRay&)> kUnitIntegrand = [](const LightRay&) {
  return 1.0;
};

}  // namespace

MeasureEstimate liouville_integral(const CauchySurface& from, const RaySelector& sel,
                                   const std::function<double(const LightRay&)>& integrand,
                                   const MeasureOptions& opts) {
  if (opts.samples < 1) throw ConfigError("sample count must be positive");
  std::vector<double> vals(static_cast<size_t>(opts.samples));
  std::vector<char> escaped(static_cast<size_t>(opts.samples), 0);
  parallel_for(opts.samples, effective_workers(opts), [&](std::int64_t i) {
    const UnitCovector u = from.sample_covector(opts.seed, static_cast<std::uint64_t>(i));
    const LightRay ray = ray_from_covector(from, u, opts.lambda_lo, opts.lambda_hi, opts.ray);
    const SelectorOutcome oc = evaluate_selector(sel, ray.trajectory());
    const size_t ii = static_cast<size_t>(i);
    if (!oc.resolved)
      escaped[ii] = 1;
    else
      vals[ii] = oc.selected ? integrand(ray) : 0.0;
  });
  const long escapes = std::count(escaped.begin(), escaped.end(), char(1));
  const double factor = sphere_area(from.spatial_dim()) * from.riemannian_volume();
  return assemble_estimate(vals, escapes, factor, opts.seed);
}

MeasureEstimate solid_angle(const CauchySurface& at, const SurfacePoint& p,
                            const RaySelector& sel, const MeasureOptions& opts) {
  if (opts.quadrature_nodes > 0) {
    if (at.spatial_dim() != 2)
      throw ConfigError("angular quadrature needs a two-dimensional slice");
    return angular_quadrature(at, p, sel, kUnitIntegrand, opts);
  }
  if (opts.samples < 1) throw ConfigError("sample count must be positive");
  return fibre_integral(at, p, sel, kUnitIntegrand, opts, 0);
}

namespace {

// Orthonormal basis of the hyperplane perpendicular to the unit vector c.
std::array<Vec, kMaxDim> perp_basis(const Vec& c) {
  std::array<Vec, kMaxDim> basis;
  int found = 0;
  for (int axis = 0; axis < c.n && found < c.n - 1; ++axis) {
    Vec v(c.n);
    v[axis] = 1.0;
    v -= dot(v, c) * c;
    for (int j = 0; j < found; ++j) v -= dot(v, basis[static_cast<size_t>(j)]) * basis[static_cast<size_t>(j)];
    const double len = norm(v);
    if (len < 1e-6) continue;  // axis nearly parallel to c; skip it
    basis[static_cast<size_t>(found++)] = (1.0 / len) * v;
  }
  return basis;
}

// Determinant by Gaussian elimination with partial pivoting, for the
// (2n - 1)-dimensional transfer Jacobians that outgrow the fixed-size Mat.
double dense_determinant(std::vector<double>& a, int m) {
  double det = 1.0;
  for (int k = 0; k < m; ++k) {
    int pivot = k;
    for (int r = k + 1; r < m; ++r)
      if (std::abs(a[static_cast<size_t>(r * m + k)]) >
          std::abs(a[static_cast<size_t>(pivot * m + k)]))
        pivot = r;
    if (pivot != k) {
      for (int col = 0; col < m; ++col)
        std::swap(a[static_cast<size_t>(k * m + col)], a[static_cast<size_t>(pivot * m + col)]);
      det = -det;
    }
    const double d = a[static_cast<size_t>(k * m + k)];
    if (d == 0.0) return 0.0;
    det *= d;
    for (int r = k + 1; r < m; ++r) {
      const double f = a[static_cast<size_t>(r * m + k)] / d;
      for (int col = k; col < m; ++col)
        a[static_cast<size_t>(r * m + col)] -= f * a[static_cast<size_t>(k * m + col)];
    }
  }
  return det;
}

}  // namespace

DensityCheck verify_pointwise_density(const CauchySurface& from, const CauchySurface& to,
                                      const UnitCovector& u, double lambda_lo, double lambda_hi,
                                      double fd_step, const RayOptions& ray) {
  const int n = from.spatial_dim();
  const int m = 2 * n - 1;

  // Unit-density chart around the input covector: orthonormal base steps
  // (inverse square root of the induced metric) and a tangent chart on the
  // fibre sphere in orthonormal components.
  const SurfacePoint p0 = u.base;
  const Mat base_in = sym_sqrt(from.induced_metric(p0), /*invert=*/true);
  const Vec c0 = from.frame_components(u);
  const auto fibre_in = perp_basis(c0);

  // Center image and the matching chart on the target side.
  const UnitCovector v0 = transfer(from, to, u, lambda_lo, lambda_hi, ray);
  const Mat base_out = sym_sqrt(to.induced_metric(v0.base), /*invert=*/false);
  const Vec c1 = to.frame_components(v0);
  const auto fibre_out = perp_basis(c1);

  auto forward = [&](const std::vector<double>& xi) {
    Vec step(n);
    for (int i = 0; i < n; ++i) step[i] = xi[static_cast<size_t>(i)];
    const Vec x = p0.spatial + mul(base_in, step);
    const SurfacePoint p = from.embed(from.domain().canonical(x));

    Vec c = c0;
    for (int a = 0; a < n - 1; ++a) c += xi[static_cast<size_t>(n + a)] * fibre_in[static_cast<size_t>(a)];
    c *= 1.0 / norm(c);

    const UnitCovector vv = transfer(from, to, from.covector_from_frame(p, c), lambda_lo,
                                     lambda_hi, ray);
    const Vec b_out = mul(base_out, to.domain().difference(vv.base.spatial, v0.base.spatial));
    const Vec cc = to.frame_components(vv);
    const double denom = dot(cc, c1);

    std::vector<double> out(static_cast<size_t>(m));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = b_out[i];
    for (int a = 0; a < n - 1; ++a)
      out[static_cast<size_t>(n + a)] = dot(cc, fibre_out[static_cast<size_t>(a)]) / denom;
    return out;
  };

  std::vector<double> jac(static_cast<size_t>(m * m));
  for (int col = 0; col < m; ++col) {
    std::vector<double> plus(static_cast<size_t>(m), 0.0), minus(static_cast<size_t>(m), 0.0);
    plus[static_cast<size_t>(col)] = fd_step;
    minus[static_cast<size_t>(col)] = -fd_step;
    const auto fp = forward(plus);
    const auto fm = forward(minus);
    for (int row = 0; row < m; ++row)
      jac[static_cast<size_t>(row * m + col)] =
          (fp[static_cast<size_t>(row)] - fm[static_cast<size_t>(row)]) / (2.0 * fd_step);
  }

  DensityCheck check;
  check.jacobian = dense_determinant(jac, m);
  if (check.jacobian == 0.0) throw ConsistencyError("transfer map is numerically singular");
  check.density = 1.0 / std::abs(check.jacobian);

  const LightRay center = ray_from_covector(from, u, lambda_lo, lambda_hi, ray);
  check.one_plus_z = surface_redshift(from, to, center.trajectory()).one_plus_z;
  check.expected = std::pow(check.one_plus_z, -n);
  check.relative_error = std::abs(check.density - check.expected) / check.expected;
  return check;
}

MeasureEstimate volume_from_redshift(const CauchySurface& target, const Region& region,
                                     const CauchySurface& from, const MeasureOptions& opts) {
  const int n = target.spatial_dim();
  auto weight = [&](const LightRay& ray) {
    const RedshiftResult r = surface_redshift(target, from, ray.trajectory());
    return std::pow(r.one_plus_z, -n);
  };
  MeasureEstimate est =
      liouville_integral(from, RaySelector::through(target, region), weight, opts);
  const double fibre = sphere_area(from.spatial_dim());
  est.value /= fibre;
  est.std_error /= fibre;
  return est;
}

VolumeBounds volume_bounds_check(const CauchySurface& target, const Region& region,
                                 const CauchySurface& from, const MeasureOptions& opts) {
  const int n = target.spatial_dim();
  std::atomic<long> selected{0};
  std::mutex z_mutex;
  double z_min = std::numeric_limits<double>::infinity();
  double z_max = -z_min;

  auto weight = [&](const LightRay& ray) {
    const RedshiftResult r = surface_redshift(target, from, ray.trajectory());
    selected.fetch_add(1, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> lock(z_mutex);
      z_min = std::min(z_min, r.one_plus_z - 1.0);
      z_max = std::max(z_max, r.one_plus_z - 1.0);
    }
    return std::pow(r.one_plus_z, -n);
  };

  MeasureEstimate est =
      liouville_integral(from, RaySelector::through(target, region), weight, opts);
  const double fibre = sphere_area(from.spatial_dim());

  VolumeBounds out;
  out.volume = est;
  out.volume.value /= fibre;
  out.volume.std_error /= fibre;
  out.ray_volume = from.riemannian_volume() * static_cast<double>(selected.load()) /
                   static_cast<double>(est.samples);
  if (selected.load() == 0) {
    out.z_min = out.z_max = 0.0;
    out.lower = out.upper = 0.0;
    out.within = out.volume.value == 0.0;
    return out;
  }
  out.z_min = z_min;
  out.z_max = z_max;
  out.lower = out.ray_volume * std::pow(1.0 + z_max, -n);
  out.upper = out.ray_volume * std::pow(1.0 + z_min, -n);
  const double slack = 1e-12 * std::max(1.0, out.upper);
  out.within = (out.volume.value >= out.lower - slack) && (out.volume.value <= out.upper + slack);
  return out;
}

ExchangeCheck exchange_identity_check(const CauchySurface& m, const Region& d,
                                      const CauchySurface& mp, const Region& dp, int outer_res,
                                      long inner_samples, const MeasureOptions& opts) {
  if (outer_res < 1 || inner_samples < 1)
    throw ConfigError("exchange check needs positive resolutions");
  const int n = m.spatial_dim();
  if (mp.spatial_dim() != n) throw ConfigError("slices have different spatial dimensions");

  MeasureOptions inner = opts;
  inner.samples = inner_samples;
  inner.workers = 1;  // the outer loop owns the parallelism

  // One side of the identity: midpoint quadrature of a fibre integral over
  // the grid cells whose centers land in the region.
  auto side = [&](const CauchySurface& at, const Region& reg, const RaySelector& sel,
                  const std::function<double(const LightRay&)>& integrand,
                  std::uint64_t seed) {
    long cells = 1;
    for (int a = 0; a < n; ++a) cells *= outer_res;
    double cell_vol = 1.0;
    for (int a = 0; a < n; ++a) cell_vol *= at.domain().extent(a) / outer_res;

    std::vector<double> terms(static_cast<size_t>(cells), 0.0);
    std::vector<double> variances(static_cast<size_t>(cells), 0.0);
    std::vector<long> escapes(static_cast<size_t>(cells), 0);

    MeasureOptions point_opts = inner;
    point_opts.seed = seed;
    parallel_for(cells, effective_workers(opts), [&](std::int64_t idx) {
      Vec x(n);
      long rem = idx;
      for (int a = 0; a < n; ++a) {
        const long j = rem % outer_res;
        rem /= outer_res;
        x[a] = at.domain().origin(a) +
               (static_cast<double>(j) + 0.5) * at.domain().extent(a) / outer_res;
      }
      if (!reg.contains(at.domain(), x)) return;
      const SurfacePoint p = at.embed(x);
      const double weight = cell_vol * std::sqrt(determinant(at.induced_metric(p)));
      const MeasureEstimate omega =
          fibre_integral(at, p, sel, integrand, point_opts,
                         static_cast<std::uint64_t>(idx) * static_cast<std::uint64_t>(inner_samples));
      const size_t ii = static_cast<size_t>(idx);
      terms[ii] = weight * omega.value;
      variances[ii] = weight * weight * omega.std_error * omega.std_error;
      escapes[ii] = omega.escapes;
    });

    struct SideResult {
      double value, error;
      long escapes;
    } r{};
    r.value = pairwise_sum(terms);
    r.error = std::sqrt(pairwise_sum(variances));
    for (long e : escapes) r.escapes += e;
    return r;
  };

  const auto lhs = side(m, d, RaySelector::through(mp, dp), kUnitIntegrand, opts.seed);

  auto weighted = [&](const LightRay& ray) {
    const RedshiftResult r = surface_redshift(m, mp, ray.trajectory());
    return std::pow(r.one_plus_z, -n);
  };
  const auto rhs = side(mp, dp, RaySelector::through(m, d), weighted, opts.seed + 1);

  ExchangeCheck check;
  check.lhs = lhs.value;
  check.lhs_error = lhs.error;
  check.rhs = rhs.value;
  check.rhs_error = rhs.error;
  check.lhs_escapes = lhs.escapes;
  check.rhs_escapes = rhs.escapes;
  check.residual = std::abs(lhs.value - rhs.value);
  check.combined_error = std::sqrt(lhs.error * lhs.error + rhs.error * rhs.error);
  check.residual_sigma = check.residual / std::max(check.combined_error, 1e-300);
  return check;
}

}  // namespace lightray
