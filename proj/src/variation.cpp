#include "lightray/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "lightray/errors.hpp"

namespace lightray {

namespace {

Vec spatial_part(const Vec& v) {
  Vec s(v.n - 1);
  for (int i = 1; i < v.n; ++i) s[i - 1] = v[i];
  return s;
}

// Largest coordinate magnitude seen along the stored trajectory; sets the
// scale that the default perturbation size is relative to.
double trajectory_scale(const NullGeodesic& geo) {
  double scale = 1.0;
  for (double lam : geo.nodes()) {
    const GeodesicState st = geo.state_at(lam);
    scale = std::max(scale, max_abs(st.event.coords));
  }
  return scale;
}

GeodesicState member_initial_state(const SpacetimeMetric& metric, const RayVariation& var,
                                   double s) {
  GeodesicState init = var.base->state_at(var.base->lambda_anchor());
  if (s == 0.0) return init;  // keep the base data bitwise untouched
  GeodesicState out;
  out.event = Event{init.event.coords + s * var.delta_event};
  const Vec raw = init.tangent + s * var.delta_tangent;
  out.tangent = var.renull ? null_project(metric, out.event, spatial_part(raw)) : raw;
  return out;
}

}  // namespace

RayVariation make_variation(const SpacetimeMetric& metric,
                            std::shared_ptr<const NullGeodesic> base, const Vec& delta_event,
                            const Vec& delta_tangent, VariationMode mode, double s_step) {
  if (!base) throw ConfigError("variation requires a base ray");
  const int dim = base->dim();
  if (metric.dim() != dim) throw ConfigError("metric dimension does not match the base ray");
  if (delta_event.n != dim || delta_tangent.n != dim)
    throw ConfigError("perturbation vectors must have " + std::to_string(dim) + " components");
  if (max_abs(delta_event) == 0.0 && max_abs(delta_tangent) == 0.0)
    throw ConfigError("variation requires a nonzero event or tangent perturbation");
  if (s_step < 0.0) throw ConfigError("variation step must be positive");

  RayVariation var;
  var.base = std::move(base);
  var.delta_event = delta_event;
  var.delta_tangent = delta_tangent;
  var.mode = mode;
  var.s_step = (s_step > 0.0) ? s_step : 1e-4 * trajectory_scale(*var.base);
  return var;
}

NullGeodesic perturbed_ray(const SpacetimeMetric& metric, const RayVariation& var, double s) {
  if (std::abs(s) > 4.0 * var.s_step * (1.0 + 1e-12))
    throw DomainError("family parameter " + std::to_string(s) +
                      " outside the linearisation window");
  RayOptions opts = var.ray_options;
  if (!var.renull) opts.null_drift_bound = std::numeric_limits<double>::infinity();
  return integrate_replay(metric, member_initial_state(metric, var, s),
                          var.base->lambda_anchor(), var.base->forward_steps(),
                          var.base->backward_steps(), opts);
}

VariationValue VariationField::eval_central(double lambda) const {
  const int dim = var_.base->dim();
  const double s = var_.s_step;
  const GeodesicState p = plus_->state_at(lambda);
  const GeodesicState m = minus_->state_at(lambda);
  const GeodesicState ph = plus_half_->state_at(lambda);
  const GeodesicState mh = minus_half_->state_at(lambda);

  VariationValue out;
  out.j = Vec(dim);
  out.j_dot = Vec(dim);
  for (int i = 0; i < dim; ++i) {
    const double d_full = (p.event.coords[i] - m.event.coords[i]) / (2.0 * s);
    const double d_half = (ph.event.coords[i] - mh.event.coords[i]) / s;
    out.j[i] = (4.0 * d_half - d_full) / 3.0;
    const double v_full = (p.tangent[i] - m.tangent[i]) / (2.0 * s);
    const double v_half = (ph.tangent[i] - mh.tangent[i]) / s;
    out.j_dot[i] = (4.0 * v_half - v_full) / 3.0;
  }
  return out;
}

VariationValue VariationField::eval(double lambda) const {
  if (var_.mode == VariationMode::kCentralDifference) return eval_central(lambda);

  const int dim = var_.base->dim();
  const OdeSolution& leg = (lambda >= var_.base->lambda_anchor()) ? *dev_forward_ : *dev_backward_;
  const double lo = std::min(leg.t_begin, leg.t_end);
  const double hi = std::max(leg.t_begin, leg.t_end);
  const double slack = 1e-9 * (lambda_max() - lambda_min());
  if (lambda < lo - slack || lambda > hi + slack)
    throw DomainError("deviation solution does not reach affine parameter " +
                      std::to_string(lambda));
  OdeState y{};
  if (leg.steps.empty())
    y = leg.y_end;  // zero-length leg: the anchor data itself
  else
    leg.eval(std::clamp(lambda, lo, hi), y.data());

  VariationValue out;
  out.j = Vec(dim);
  out.j_dot = Vec(dim);
  for (int i = 0; i < dim; ++i) {
    out.j[i] = y[static_cast<size_t>(i)];
    out.j_dot[i] = y[static_cast<size_t>(dim + i)];
  }
  return out;
}

double VariationField::momentum_pairing(double lambda) const {
  const GeodesicState st = var_.base->state_at(lambda);
  return metric_->inner(st.event, st.tangent, eval(lambda).j);
}

VariationField::PairingScan VariationField::pairing_scan() const {
  PairingScan scan;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double motion = 0.0;
  for (double lam : var_.base->nodes()) {
    const GeodesicState st = var_.base->state_at(lam);
    const VariationValue v = eval(lam);
    const double p = metric_->inner(st.event, st.tangent, v.j);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    motion = std::max(motion, max_abs(st.tangent) * max_abs(v.j));
  }
  scan.value = momentum_pairing(var_.base->lambda_anchor());
  scan.scale = std::max({std::abs(lo), std::abs(hi), motion, 1e-300});
  scan.drift = (hi - lo) / scan.scale;
  return scan;
}

VariationField variation_field(const SpacetimeMetric& metric, const RayVariation& var) {
  if (!var.base) throw ConfigError("variation field requires a base ray");
  const int dim = var.base->dim();
  const double s = var.s_step;

  VariationField field;
  field.metric_ = &metric;
  field.var_ = var;

  if (var.mode == VariationMode::kCentralDifference) {
    field.plus_ = std::make_shared<NullGeodesic>(perturbed_ray(metric, var, s));
    field.minus_ = std::make_shared<NullGeodesic>(perturbed_ray(metric, var, -s));
    field.plus_half_ = std::make_shared<NullGeodesic>(perturbed_ray(metric, var, 0.5 * s));
    field.minus_half_ = std::make_shared<NullGeodesic>(perturbed_ray(metric, var, -0.5 * s));

    // The s and s/2 quotients agree to O(s^2) when differencing is healthy;
    // their disagreement, relative to the field itself, is the noise gate.
    double worst = 0.0;
    double magnitude = 0.0;
    for (double lam : var.base->nodes()) {
      const GeodesicState p = field.plus_->state_at(lam);
      const GeodesicState m = field.minus_->state_at(lam);
      const GeodesicState ph = field.plus_half_->state_at(lam);
      const GeodesicState mh = field.minus_half_->state_at(lam);
      for (int i = 0; i < dim; ++i) {
        const double d_full = (p.event.coords[i] - m.event.coords[i]) / (2.0 * s);
        const double d_half = (ph.event.coords[i] - mh.event.coords[i]) / s;
        worst = std::max(worst, std::abs(d_half - d_full));
        magnitude = std::max(magnitude, std::abs((4.0 * d_half - d_full) / 3.0));
      }
    }
    field.noise_ = worst / std::max(magnitude, 1e-300);
    if (field.noise_ > 1e-6) {
      std::ostringstream msg;
      msg << "variation step " << s << " leaves relative difference noise " << field.noise_
          << "; pick a larger step";
      throw StepTooSmallError(msg.str());
    }
    return field;
  }

  // Deviation mode: seed (J, J_dot) at the anchor from exact initial data and
  // Richardson-differenced member tangents (the members' initial states cost
  // no integration), then propagate with the linearised geodesic equation
  //   Jddot^mu = -dGamma^mu_{ab,nu} J^nu v^a v^b - 2 Gamma^mu_{ab} v^a Jdot^b
  // along the base ray.
  const double lam0 = var.base->lambda_anchor();
  const GeodesicState sp = member_initial_state(metric, var, s);
  const GeodesicState sm = member_initial_state(metric, var, -s);
  const GeodesicState sph = member_initial_state(metric, var, 0.5 * s);
  const GeodesicState smh = member_initial_state(metric, var, -0.5 * s);

  std::array<double, 2 * kMaxDim> y0{};
  for (int i = 0; i < dim; ++i) {
    y0[static_cast<size_t>(i)] = var.delta_event[i];
    const double v_full = (sp.tangent[i] - sm.tangent[i]) / (2.0 * s);
    const double v_half = (sph.tangent[i] - smh.tangent[i]) / s;
    y0[static_cast<size_t>(dim + i)] = (4.0 * v_half - v_full) / 3.0;
  }

  const NullGeodesic* base = var.base.get();
  const double h = metric.options().fd_step;
  const double lam_lo = base->lambda_min();
  const double lam_hi = base->lambda_max();
  auto rhs = [&metric, base, dim, h, lam_lo, lam_hi](double lam, const double* y, double* dy) {
    const GeodesicState st = base->state_at(std::clamp(lam, lam_lo, lam_hi));
    const Christoffel gamma = metric.christoffel_at(st.event);
    const Vec& v = st.tangent;
    for (int i = 0; i < dim; ++i) dy[i] = y[dim + i];
    for (int mu = 0; mu < dim; ++mu) {
      double acc = 0.0;
      for (int nu = 0; nu < dim; ++nu) {
        Event fwd = st.event, bwd = st.event;
        fwd.coords[nu] += h;
        bwd.coords[nu] -= h;
        const Christoffel gf = metric.christoffel_at(fwd);
        const Christoffel gb = metric.christoffel_at(bwd);
        for (int al = 0; al < dim; ++al)
          for (int be = 0; be < dim; ++be)
            acc -= (gf(mu, al, be) - gb(mu, al, be)) / (2.0 * h) * y[nu] * v[al] * v[be];
      }
      for (int al = 0; al < dim; ++al)
        for (int be = 0; be < dim; ++be) acc -= 2.0 * gamma(mu, al, be) * v[al] * y[dim + be];
      dy[dim + mu] = acc;
    }
  };

  OdeOptions dev_opts;  // stock tolerances: the gate downstream is far looser
  field.dev_forward_ = std::make_shared<OdeSolution>(
      dopri5(rhs, 2 * dim, lam0, y0.data(), lam_hi, dev_opts));
  field.dev_backward_ = std::make_shared<OdeSolution>(
      dopri5(rhs, 2 * dim, lam0, y0.data(), lam_lo, dev_opts));
  return field;
}

}  // namespace lightray
