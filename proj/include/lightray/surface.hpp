#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lightray/metric.hpp"
#include "lightray/rng.hpp"

namespace lightray {

// Spatial footprint of a surface: either a box with per-axis bounds or a
// flat torus with per-axis periods (coordinates wrap into [0, period)).
struct Domain {
  enum class Kind { kBox, kTorus };

  Kind kind = Kind::kTorus;
  Vec lo, hi;       // box corners (box only)
  Vec periods;      // per-axis periods (torus only)
  int n = 0;        // spatial dimension

  static Domain torus(const Vec& periods);
  static Domain box(const Vec& lo, const Vec& hi);

  // Canonical representative: wraps torus coordinates, leaves box ones alone.
  Vec canonical(const Vec& spatial) const;
  bool contains(const Vec& spatial) const;
  double extent(int axis) const;  // period or box width
  double origin(int axis) const;  // box corner, or 0 for a torus

  // a - b taking the short way around torus seams.
  Vec difference(const Vec& a, const Vec& b) const;
};

// Axis-aligned region on a surface's spatial domain.  Unset axes are
// unconstrained; a torus interval with lo > hi wraps around the seam, and
// half-spaces are intervals with an infinite end.
struct Region {
  struct Interval {
    double lo, hi;
  };
  std::array<std::optional<Interval>, 3> axes{};

  static Region whole() { return Region{}; }
  static Region interval(int axis, double lo, double hi) {
    Region r;
    r.axes[static_cast<size_t>(axis)] = Interval{lo, hi};
    return r;
  }
  Region& with(int axis, double lo, double hi) {
    axes[static_cast<size_t>(axis)] = Interval{lo, hi};
    return *this;
  }
  bool contains(const Domain& d, const Vec& spatial) const;
};

struct SurfacePoint {
  Vec spatial;   // canonical domain coordinates, length n
  Event event;   // embedded spacetime event, length n+1
};

// Point of the unit cotangent sphere over a surface: a covector with unit
// length under the inverse induced metric, stored in graph-frame components.
struct UnitCovector {
  SurfacePoint base;
  Vec covector;  // length n
};

struct QuadratureSpec {
  int points_per_axis = 0;  // 0 = default (256 for n=2, 64 for n=3)
  int resolve(int n) const { return points_per_axis > 0 ? points_per_axis : (n == 2 ? 256 : 64); }
};

// Cauchy surface given as a graph t = f(x) over the spatial domain.  The
// constructor scans a grid and rejects graphs whose induced metric is not
// safely positive definite.  Immutable and safe to share across workers.
class CauchySurface {
 public:
  CauchySurface(const SpacetimeMetric& metric, Expr f, Domain domain,
                std::string name = "surface");

  const SpacetimeMetric& metric() const { return *metric_; }
  const Domain& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  int spatial_dim() const { return domain_.n; }

  double graph(const Vec& spatial) const;          // f(x)
  Vec gradient(const Vec& spatial) const;          // df/dx^i, length n
  double graph_min() const { return f_min_; }
  double graph_max() const { return f_max_; }

  SurfacePoint embed(const Vec& spatial) const;    // DomainError outside box

  // Graph frame vector e_i = (df/dx^i, 0, ..., 1_i, ..., 0), length n+1.
  Vec frame_vector(const SurfacePoint& p, int i) const;

  // Induced Riemannian metric h_ij = -<e_i, e_j>; throws NotSpacelikeError
  // if the smallest eigenvalue is not safely positive.
  Mat induced_metric(const SurfacePoint& p) const;
  Mat inverse_induced_metric(const SurfacePoint& p) const;

  // Future unit timelike normal: <n,n> = 1, <n,e_i> = 0, n^0 > 0.
  SpacetimeVector future_normal(const SurfacePoint& p) const;

  // integral over the region of sqrt(det h) by midpoint quadrature.
  double riemannian_volume(const Region& region = Region::whole(),
                           QuadratureSpec quad = {}) const;

  // Draw i of the cosphere sample stream for `seed`: base point with density
  // sqrt(det h)/Vol, fibre direction uniform on the unit covector sphere.
  UnitCovector sample_covector(uint64_t seed, uint64_t index) const;
  std::vector<UnitCovector> sample_cosphere(uint64_t seed, int count) const;

  // Unit covector over an explicit base point (used by fibre integrals).
  UnitCovector covector_from_frame(const SurfacePoint& p, const Vec& unit_frame) const;

  // Orthonormal-frame components of a unit covector (inverse of the above).
  Vec frame_components(const UnitCovector& u) const;

 private:
  void scan_grid();  // spacelike check, f bounds, density bound

  const SpacetimeMetric* metric_;
  Expr f_;
  std::array<Expr, 3> df_;
  Domain domain_;
  std::string name_;
  double f_min_ = 0, f_max_ = 0;
  double density_bound_ = 0;  // rejection envelope for sqrt(det h)
};

}  // namespace lightray
