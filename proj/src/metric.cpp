#include "lightray/metric.hpp"

#include <cmath>
#include <sstream>

namespace lightray {

namespace {

std::array<double, 4> to_vars(const Event& e) {
  std::array<double, 4> vars{};
  for (int i = 0; i < e.dim(); ++i) vars[static_cast<size_t>(i)] = e.coords[i];
  return vars;
}

}  // namespace

SpacetimeMetric::SpacetimeMetric(Family family, int dim, MetricOptions opts)
    : family_(family), dim_(dim), opts_(opts) {
  if (dim < 3 || dim > kMaxDim)
    throw DomainError("spacetime dimension must be 3 or 4, got " + std::to_string(dim));
}

SpacetimeMetric SpacetimeMetric::minkowski(int dim, MetricOptions opts) {
  return SpacetimeMetric(Family::kMinkowski, dim, opts);
}

SpacetimeMetric SpacetimeMetric::flrw(int dim, Expr scale_factor, MetricOptions opts) {
  SpacetimeMetric m(Family::kFlrw, dim, opts);
  for (int v = 1; v < 4; ++v)
    if (scale_factor.uses_variable(v))
      throw ConfigError("scale factor may depend on t only: " + scale_factor.str());
  m.a_ = scale_factor;
  m.da_ = scale_factor.derivative(0);
  return m;
}

SpacetimeMetric SpacetimeMetric::conformal(int dim, Expr factor, MetricOptions opts) {
  SpacetimeMetric m(Family::kConformal, dim, opts);
  m.omega_ = factor;
  for (int v = 0; v < 4; ++v) m.domega_[static_cast<size_t>(v)] = factor.derivative(v);
  return m;
}

std::string SpacetimeMetric::describe() const {
  std::ostringstream os;
  switch (family_) {
    case Family::kMinkowski: os << "minkowski"; break;
    case Family::kFlrw: os << "flrw a(t)=" << a_.str(); break;
    case Family::kConformal: os << "conformal omega=" << omega_.str(); break;
  }
  os << " dim=" << dim_;
  return os.str();
}

double SpacetimeMetric::scale_factor(double t) const {
  return a_({t, 0, 0, 0});
}

double SpacetimeMetric::scale_factor_deriv(double t) const {
  return da_({t, 0, 0, 0});
}

bool SpacetimeMetric::in_chart(const Event& e) const {
  for (int i = 0; i < e.dim(); ++i)
    if (!std::isfinite(e.coords[i])) return false;
  const double t = e.t();
  if (!(t > opts_.t_min && t < opts_.t_max)) return false;
  if (family_ == Family::kFlrw) {
    const double a = scale_factor(t);
    if (!std::isfinite(a) || a <= 0.0) return false;
  } else if (family_ == Family::kConformal) {
    const double w = omega_(to_vars(e));
    if (!std::isfinite(w) || w <= 0.0) return false;
  }
  return true;
}

void SpacetimeMetric::require_chart(const Event& e) const {
  if (!in_chart(e)) {
    std::ostringstream os;
    os << "event outside chart: (";
    for (int i = 0; i < e.dim(); ++i) os << (i ? ", " : "") << e.coords[i];
    os << ") for " << describe();
    throw DomainError(os.str());
  }
}

Mat SpacetimeMetric::metric_at(const Event& e) const {
  require_chart(e);
  Mat g(dim_);
  switch (family_) {
    case Family::kMinkowski:
      g(0, 0) = 1.0;
      for (int i = 1; i < dim_; ++i) g(i, i) = -1.0;
      break;
    case Family::kFlrw: {
      const double a = scale_factor(e.t());
      g(0, 0) = 1.0;
      for (int i = 1; i < dim_; ++i) g(i, i) = -a * a;
      break;
    }
    case Family::kConformal: {
      const double w = omega_(to_vars(e));
      const double w2 = w * w;
      g(0, 0) = w2;
      for (int i = 1; i < dim_; ++i) g(i, i) = -w2;
      break;
    }
  }
  return g;
}

Mat SpacetimeMetric::inverse_metric_at(const Event& e) const {
  // All families are diagonal, so invert entrywise.
  Mat g = metric_at(e);
  Mat inv(dim_);
  for (int i = 0; i < dim_; ++i) inv(i, i) = 1.0 / g(i, i);
  return inv;
}

Christoffel SpacetimeMetric::christoffel_at(const Event& e) const {
  if (opts_.christoffel == ChristoffelMode::kFiniteDifference)
    return christoffel_fd(e, opts_.fd_step);
  require_chart(e);
  Christoffel gamma(dim_);
  switch (family_) {
    case Family::kMinkowski:
      break;
    case Family::kFlrw: {
      // Gamma^0_{ij} = a a' delta_ij, Gamma^i_{0j} = (a'/a) delta_ij.
      const double a = scale_factor(e.t());
      const double da = scale_factor_deriv(e.t());
      for (int i = 1; i < dim_; ++i) {
        gamma(0, i, i) = a * da;
        gamma(i, 0, i) = da / a;
        gamma(i, i, 0) = da / a;
      }
      break;
    }
    case Family::kConformal: {
      // For g = Omega^2 eta with phi = log Omega:
      // Gamma^mu_{ab} = d^mu_a phi_b + d^mu_b phi_a - eta^{mu nu} phi_nu eta_ab.
      const auto vars = to_vars(e);
      const double w = omega_(vars);
      Vec phi(dim_);
      for (int mu = 0; mu < dim_; ++mu) phi[mu] = domega_[static_cast<size_t>(mu)](vars) / w;
      for (int mu = 0; mu < dim_; ++mu) {
        const double eta_mu = (mu == 0) ? 1.0 : -1.0;
        for (int al = 0; al < dim_; ++al)
          for (int be = 0; be < dim_; ++be) {
            double v = 0.0;
            if (mu == al) v += phi[be];
            if (mu == be) v += phi[al];
            if (al == be) {
              const double eta_ab = (al == 0) ? 1.0 : -1.0;
              v -= eta_mu * phi[mu] * eta_ab;
            }
            gamma(mu, al, be) = v;
          }
      }
      break;
    }
  }
  return gamma;
}

Christoffel SpacetimeMetric::christoffel_fd(const Event& e, double step) const {
  require_chart(e);
  // Gamma^mu_{ab} = (1/2) g^{mu nu} (d_a g_{nb} + d_b g_{na} - d_nu g_{ab})
  // with second-order central differences for the metric derivatives.
  std::array<Mat, kMaxDim> dg;
  for (int c = 0; c < dim_; ++c) {
    Event plus = e, minus = e;
    plus.coords[c] += step;
    minus.coords[c] -= step;
    if (!in_chart(plus) || !in_chart(minus))
      throw DomainError("finite-difference stencil leaves the chart");
    Mat gp = metric_at(plus), gm = metric_at(minus);
    Mat d(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) d(i, j) = (gp(i, j) - gm(i, j)) / (2.0 * step);
    dg[static_cast<size_t>(c)] = d;
  }
  const Mat ginv = inverse_metric_at(e);
  Christoffel gamma(dim_);
  for (int mu = 0; mu < dim_; ++mu)
    for (int al = 0; al < dim_; ++al)
      for (int be = al; be < dim_; ++be) {
        double s = 0.0;
        for (int nu = 0; nu < dim_; ++nu) {
          s += ginv(mu, nu) * (dg[static_cast<size_t>(al)](nu, be) +
                               dg[static_cast<size_t>(be)](nu, al) -
                               dg[static_cast<size_t>(nu)](al, be));
        }
        gamma(mu, al, be) = 0.5 * s;
        gamma(mu, be, al) = 0.5 * s;
      }
  return gamma;
}

double SpacetimeMetric::inner(const Event& e, const Vec& u, const Vec& v) const {
  return bilinear(metric_at(e), u, v);
}

CausalClass SpacetimeMetric::classify(const SpacetimeVector& v) const {
  if (max_abs(v.components) == 0.0) return CausalClass::kZero;
  const double q = inner(v.base, v.components, v.components);
  const double t0 = v.components[0];
  const double scale = t0 * t0;
  if (std::abs(q) <= opts_.eps_null * scale && scale > 0.0)
    return t0 > 0 ? CausalClass::kNullFuture : CausalClass::kNullPast;
  if (q > 0.0) return t0 > 0 ? CausalClass::kTimelikeFuture : CausalClass::kTimelikePast;
  return CausalClass::kSpacelike;
}

SpacetimeVector SpacetimeMetric::normalize_observer(const SpacetimeVector& v) const {
  const double q = inner(v.base, v.components, v.components);
  if (q <= 0.0 || v.components[0] <= 0.0)
    throw NotTimelikeError("normalize_observer needs a timelike future vector");
  SpacetimeVector out = v;
  out.components *= 1.0 / std::sqrt(q);
  return out;
}

}  // namespace lightray
