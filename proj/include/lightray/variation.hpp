#pragma once

#include <array>
#include <memory>
#include <vector>

#include "lightray/geodesic.hpp"
#include "lightray/metric.hpp"

namespace lightray {

// One-parameter families of light rays gamma_s around a base ray, and the
// variation field J = d gamma_s / ds at s = 0.
//
// Members of the family are *not* re-integrated adaptively.  They replay the
// base ray's accepted step sequence (integrate_replay), so the map
// s -> gamma_s is smooth in the initial data and central differences through
// it converge at the analytic rate instead of being limited by step-control
// noise.

enum class VariationMode {
  kCentralDifference,  // Richardson-extrapolated differences of replayed rays
  kDeviationOde,       // integrate the linearised geodesic equation directly
};

struct RayVariation {
  std::shared_ptr<const NullGeodesic> base;
  Vec delta_event;    // dx: shift of the initial event (dim components)
  Vec delta_tangent;  // dk: shift of the initial tangent (dim components)
  double s_step = 0.0;
  VariationMode mode = VariationMode::kCentralDifference;
  // When false, members keep the raw tangent k + s*dk instead of re-solving
  // the time component for a null one.  Only useful as a negative control:
  // the pairing conservation below fails without the projection.
  bool renull = true;
  RayOptions ray_options{};
};

// Validates the perturbation data and fills in a default s_step of
// 1e-4 * (coordinate scale of the base trajectory).  Throws ConfigError if
// both perturbations vanish or the dimensions disagree.
RayVariation make_variation(const SpacetimeMetric& metric,
                            std::shared_ptr<const NullGeodesic> base, const Vec& delta_event,
                            const Vec& delta_tangent,
                            VariationMode mode = VariationMode::kCentralDifference,
                            double s_step = 0.0);

// The family member at parameter s: initial event x0 + s*dx, initial tangent
// obtained by null-projecting the spatial part of k0 + s*dk (so members stay
// null and future-directed), integrated by replaying the base step sequence.
// s = 0 reproduces the base ray bitwise.  |s| may not exceed 4 * s_step.
NullGeodesic perturbed_ray(const SpacetimeMetric& metric, const RayVariation& var, double s);

// J(lambda) and its lambda-derivative along the base ray.
struct VariationValue {
  Vec j;      // dim components
  Vec j_dot;  // dim components
};

class VariationField {
 public:
  const RayVariation& variation() const { return var_; }
  double lambda_min() const { return var_.base->lambda_min(); }
  double lambda_max() const { return var_.base->lambda_max(); }

  // Relative size of the numerical noise in J, estimated from the
  // disagreement between the s and s/2 difference quotients.
  double noise_estimate() const { return noise_; }

  // The replayed family members at s, -s, s/2, -s/2.  Empty pointers in
  // deviation mode, which integrates J directly instead of tracking members.
  std::array<std::shared_ptr<const NullGeodesic>, 4> member_rays() const {
    return {plus_, minus_, plus_half_, minus_half_};
  }

  VariationValue eval(double lambda) const;

  // <gamma_dot(lambda), J(lambda)> in the spacetime metric.  For re-nulled
  // families this is constant in lambda up to integration error.
  double momentum_pairing(double lambda) const;

  // Scan of momentum_pairing over the base ray's step nodes.
  struct PairingScan {
    double value = 0.0;  // pairing at the anchor point
    double drift = 0.0;  // (max - min) over the scan, relative to scale
    double scale = 1.0;  // max(|pairing|, |gamma_dot|_inf * |J|_inf)
  };
  PairingScan pairing_scan() const;

 private:
  friend VariationField variation_field(const SpacetimeMetric& metric, const RayVariation& var);

  VariationValue eval_central(double lambda) const;

  const SpacetimeMetric* metric_ = nullptr;
  RayVariation var_;
  double noise_ = 0.0;
  // Central-difference mode: the four replayed family members.
  std::shared_ptr<const NullGeodesic> plus_, minus_, plus_half_, minus_half_;
  // Deviation-ODE mode: (J, J_dot) as a first-order system, both legs.
  std::shared_ptr<const OdeSolution> dev_forward_, dev_backward_;
};

// Builds the field for the requested mode.  Central differences throw
// StepTooSmallError when the estimated noise exceeds 1e-6 relative to J;
// the deviation mode seeds its initial data from the same differences and
// integrates the linearised geodesic (Jacobi) equation along the base ray.
VariationField variation_field(const SpacetimeMetric& metric, const RayVariation& var);

}  // namespace lightray
