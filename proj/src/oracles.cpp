#include "lightray/oracles.hpp"

#include <cmath>

#include "lightray/errors.hpp"

namespace lightray::oracles {

double expanding_ratio(const Expr& scale_factor, double t_emit, double t_receive) {
  const double a_e = scale_factor({t_emit, 0, 0, 0});
  const double a_r = scale_factor({t_receive, 0, 0, 0});
  if (!(a_e > 0.0) || !(a_r > 0.0))
    throw DomainError("scale factor must be positive at both times");
  return a_r / a_e;
}

double doppler_aligned(double beta) {
  if (!(std::abs(beta) < 1.0)) throw DomainError("speed must satisfy |beta| < 1");
  return std::sqrt((1.0 + beta) / (1.0 - beta));
}

double doppler_at_angle(double beta, double cos_theta) {
  if (!(std::abs(beta) < 1.0)) throw DomainError("speed must satisfy |beta| < 1");
  if (!(std::abs(cos_theta) <= 1.0)) throw DomainError("cos_theta must lie in [-1, 1]");
  const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
  return 1.0 / (gamma * (1.0 - beta * cos_theta));
}

namespace {

void check_ray(const ComovingRay& ray) {
  if (ray.x0.n != ray.q.n || ray.x0.n < 1) throw DomainError("inconsistent ray data");
  if (norm(ray.q) == 0.0) throw DomainError("comoving momentum must be nonzero");
}

GeodesicState assemble(double t, const Vec& x, double k0, const Vec& kx) {
  const int n = x.n;
  Vec coords(n + 1), tangent(n + 1);
  coords[0] = t;
  tangent[0] = k0;
  for (int i = 0; i < n; ++i) {
    coords[i + 1] = x[i];
    tangent[i + 1] = kx[i];
  }
  return GeodesicState{Event{coords}, tangent};
}

}  // namespace

GeodesicState exp_cosmology_state(const ComovingRay& ray, double lambda) {
  check_ray(ray);
  const double qn = norm(ray.q);
  const double u = std::exp(ray.t0) + qn * lambda;
  if (!(u > 0.0)) throw DomainError("affine parameter is past the horizon");
  const Vec qhat = (1.0 / qn) * ray.q;
  const Vec x = ray.x0 + (std::exp(-ray.t0) - 1.0 / u) * qhat;
  return assemble(std::log(u), x, qn / u, (1.0 / (u * u)) * ray.q);
}

GeodesicState dust_cosmology_state(const ComovingRay& ray, double lambda) {
  check_ray(ray);
  if (!(ray.t0 > 0.0)) throw DomainError("the dust chart needs t > 0");
  const double qn = norm(ray.q);
  const double u = std::pow(ray.t0, 5.0 / 3.0) + (5.0 / 3.0) * qn * lambda;
  if (!(u > 0.0)) throw DomainError("affine parameter is past the horizon");
  const double t = std::pow(u, 0.6);
  const Vec qhat = (1.0 / qn) * ray.q;
  const Vec x = ray.x0 + 3.0 * (std::pow(u, 0.2) - std::cbrt(ray.t0)) * qhat;
  return assemble(t, x, qn * std::pow(u, -0.4), std::pow(u, -0.8) * ray.q);
}

}  // namespace lightray::oracles
