#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "lightray/ode.hpp"
#include "lightray/surface.hpp"

namespace lightray {

struct GeodesicState {
  Event event;
  Vec tangent;  // length n+1
};

struct RayOptions {
  // Tighter than the bare integrator defaults: the null constraint is
  // monitored at dense-output midpoints, where interpolation error
  // dominates, and has to stay an order under the drift bound.
  OdeOptions ode{.abs_tol = 1e-14, .rel_tol = 1e-12};
  double null_drift_bound = 1e-10;  // max |<v,v>|/(v^0)^2 over the dense output
};

enum class LegStatus { kComplete, kChartExit };

// Future null vector over a spatial direction: solves the null quadratic for
// the positive time component.  Throws NoNullSolutionError if the direction
// vanishes or no future root exists.
Vec null_project(const SpacetimeMetric& metric, const Event& e, const Vec& spatial_dir);

// A null geodesic integrated over an affine interval around an anchor
// parameter, stored as dense Runge-Kutta output.  Immutable after
// construction and safe to share across workers.
class NullGeodesic {
 public:
  const SpacetimeMetric& metric() const { return *metric_; }
  int dim() const { return dim_; }

  double lambda_anchor() const { return lambda0_; }
  double lambda_min() const;  // reached, not requested
  double lambda_max() const;
  LegStatus forward_status() const { return fwd_status_; }
  LegStatus backward_status() const { return bwd_status_; }

  GeodesicState state_at(double lambda) const;
  std::vector<double> nodes() const;  // accepted-step boundaries, ascending

  double null_drift() const { return null_drift_; }
  double t_reached_min() const { return t_min_; }
  double t_reached_max() const { return t_max_; }

  std::vector<double> forward_steps() const { return forward_.step_sizes(); }
  std::vector<double> backward_steps() const { return backward_.step_sizes(); }

  friend NullGeodesic integrate_null(const SpacetimeMetric&, const GeodesicState&, double,
                                     double, double, const RayOptions&);
  friend NullGeodesic integrate_replay(const SpacetimeMetric&, const GeodesicState&, double,
                                       const std::vector<double>&, const std::vector<double>&,
                                       const RayOptions&);

 private:
  void finalize(const RayOptions& opts);

  const SpacetimeMetric* metric_ = nullptr;
  int dim_ = 0;
  double lambda0_ = 0;
  OdeSolution forward_, backward_;  // either may be empty
  LegStatus fwd_status_ = LegStatus::kComplete;
  LegStatus bwd_status_ = LegStatus::kComplete;
  double null_drift_ = 0;
  double t_min_ = 0, t_max_ = 0;
};

// Integrates the geodesic equation from `initial` at affine parameter
// `lambda0` across [lambda_lo, lambda_hi] (two legs when the anchor is
// interior).  The initial tangent must classify as future null.
NullGeodesic integrate_null(const SpacetimeMetric& metric, const GeodesicState& initial,
                            double lambda0, double lambda_lo, double lambda_hi,
                            const RayOptions& opts = {});

// Same trajectory machinery on a frozen step sequence (used for the
// perturbed members of a variation family).
NullGeodesic integrate_replay(const SpacetimeMetric& metric, const GeodesicState& initial,
                              double lambda0, const std::vector<double>& forward_steps,
                              const std::vector<double>& backward_steps,
                              const RayOptions& opts = {});

struct Intersection {
  double lambda = 0;
  SurfacePoint point;
  GeodesicState state;
};

// Single transverse crossing with a surface, found by scanning the dense
// nodes for sign changes of t - f(x) and bisecting to |t - f| < 1e-12.
// Returns nullopt when the stored range never crosses; throws
// MultipleIntersectionError on a second crossing.
std::optional<Intersection> intersect_surface(const NullGeodesic& geo,
                                              const CauchySurface& surface);

// True when the trajectory's time range strictly brackets the surface's
// graph range, so a missing intersection is a genuine miss rather than a
// ray that left the lambda window (escape accounting).
bool resolves_surface(const NullGeodesic& geo, const CauchySurface& surface);

// A light ray anchored on a surface cosphere point.  The representative
// geodesic is normalized so <tangent, future normal> = 1 at the anchor.
struct LightRay {
  std::shared_ptr<const NullGeodesic> geo;
  const CauchySurface* anchor_surface = nullptr;
  std::optional<UnitCovector> anchor;

  const NullGeodesic& trajectory() const { return *geo; }
};

LightRay ray_from_covector(const CauchySurface& surface, const UnitCovector& u,
                           double lambda_lo, double lambda_hi, const RayOptions& opts = {});

}  // namespace lightray
