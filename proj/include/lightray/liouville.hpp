#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lightray/contact.hpp"
#include "lightray/redshift.hpp"

namespace lightray {

// Monte Carlo integration over the space of light rays, sampled through a
// surface's unit cotangent bundle, together with the closed-form density
// checks that justify it.

// Surface area of the unit sphere S^(n-1): the fibre mass over every point.
double sphere_area(int spatial_dim);

// Conjunction of crossing requirements.  An empty selector accepts every
// ray; each condition requires a crossing whose spatial coordinates lie in
// the given region.
struct RayCondition {
  const CauchySurface* surface = nullptr;
  Region region;
};

struct RaySelector {
  std::vector<RayCondition> conditions;

  static RaySelector all() { return {}; }
  static RaySelector through(const CauchySurface& surface, Region region = Region::whole()) {
    RaySelector s;
    s.conditions.push_back({&surface, region});
    return s;
  }
  RaySelector& and_through(const CauchySurface& surface, Region region = Region::whole()) {
    conditions.push_back({&surface, region});
    return *this;
  }
};

// Selector verdict for one trajectory.  `resolved` is false when a missing
// crossing cannot be distinguished from the trajectory having left its
// parameter window: those samples count as escapes, not as misses.
struct SelectorOutcome {
  bool selected = false;
  bool resolved = true;
};
SelectorOutcome evaluate_selector(const RaySelector& sel, const NullGeodesic& geo);

struct MeasureOptions {
  std::uint64_t seed = 1;
  long samples = 10000;
  double lambda_lo = -5.0;  // affine window the sampled rays are integrated over
  double lambda_hi = 5.0;
  int workers = 0;  // 0: LIGHTRAY_WORKERS or hardware concurrency
  RayOptions ray{};
  // Angular midpoint quadrature instead of fibre sampling in solid_angle
  // (two spatial dimensions only); 0 keeps Monte Carlo.
  long quadrature_nodes = 0;
};

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
  long escapes = 0;
  std::uint64_t seed = 0;

  double escape_fraction() const {
    return samples > 0 ? static_cast<double>(escapes) / static_cast<double>(samples) : 0.0;
  }
};

// Integral of `integrand` over rays through `from` that satisfy `sel`, with
// respect to the kinematic ray measure (area element times fibre angle).
// The integrand is only evaluated on selected rays.  Escaped samples
// contribute zero and are reported in the estimate.
MeasureEstimate liouville_integral(const CauchySurface& from, const RaySelector& sel,
                                   const std::function<double(const LightRay&)>& integrand,
                                   const MeasureOptions& opts);

// Angle subtended at one surface point by the selected ray directions.
// With an empty selector this is the full sphere area exactly.
MeasureEstimate solid_angle(const CauchySurface& at, const SurfacePoint& p,
                            const RaySelector& sel, const MeasureOptions& opts);

// d(transfer measure)/d(target measure) at one covector, measured as the
// reciprocal Jacobian determinant of the transfer map in unit-density
// charts, against its closed form (one plus the redshift)^(-n).
struct DensityCheck {
  double density = 0.0;       // measured
  double expected = 0.0;      // (1 + z)^(-n)
  double one_plus_z = 0.0;
  double jacobian = 0.0;      // raw determinant of the differenced map
  double relative_error = 0.0;
};
DensityCheck verify_pointwise_density(const CauchySurface& from, const CauchySurface& to,
                                      const UnitCovector& u, double lambda_lo, double lambda_hi,
                                      double fd_step = 1e-5, const RayOptions& ray = {});

// Riemannian volume of a region of `target` recovered by sampling rays on
// `from` and weighting crossings by (one plus redshift)^(-n), where the
// redshift is measured from `target` to `from`.
MeasureEstimate volume_from_redshift(const CauchySurface& target, const Region& region,
                                     const CauchySurface& from, const MeasureOptions& opts);

// Sample-exact sandwich for the volume estimate: the weighted integral must
// sit between the unweighted ray volume scaled by the extreme redshifts
// seen in the same sample set.
struct VolumeBounds {
  MeasureEstimate volume;     // weighted estimate
  double ray_volume = 0.0;    // unweighted, divided by the fibre mass
  double z_min = 0.0, z_max = 0.0;
  double lower = 0.0, upper = 0.0;
  bool within = false;
};
VolumeBounds volume_bounds_check(const CauchySurface& target, const Region& region,
                                 const CauchySurface& from, const MeasureOptions& opts);

// Both sides of the exchange identity: integrating the solid angle of rays
// into (mp, dp) over the region d of m equals integrating the
// redshift-weighted solid angle of rays into (m, d) over dp on mp.
// Outer integrals are midpoint quadrature (resolution per axis), inner
// integrals are fibre Monte Carlo with per-point streams.
struct ExchangeCheck {
  double lhs = 0.0, lhs_error = 0.0;
  double rhs = 0.0, rhs_error = 0.0;
  long lhs_escapes = 0, rhs_escapes = 0;
  double residual = 0.0;
  double combined_error = 0.0;
  double residual_sigma = 0.0;  // residual over combined error
};
ExchangeCheck exchange_identity_check(const CauchySurface& m, const Region& d,
                                      const CauchySurface& mp, const Region& dp, int outer_res,
                                      long inner_samples, const MeasureOptions& opts);

}  // namespace lightray
