#pragma once

#include <limits>
#include <string>

#include "lightray/expr.hpp"
#include "lightray/linalg.hpp"

namespace lightray {

// Coordinate conventions: index 0 is the time coordinate, signature is
// (+, -, ..., -), and d/dt is future-pointing in every chart we support.

struct Event {
  Vec coords;  // length = spacetime dimension

  double t() const { return coords[0]; }
  int dim() const { return coords.n; }
};

struct SpacetimeVector {
  Event base;
  Vec components;  // length = spacetime dimension
};

enum class CausalClass {
  kZero,
  kTimelikeFuture,
  kTimelikePast,
  kNullFuture,
  kNullPast,
  kSpacelike,
};

enum class ChristoffelMode { kAnalytic, kFiniteDifference };

struct MetricOptions {
  ChristoffelMode christoffel = ChristoffelMode::kAnalytic;
  double fd_step = 1e-5;       // central-difference step for metric derivatives
  double eps_null = 1e-10;     // |<v,v>| below eps_null*(v^0)^2 counts as null
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
};

// A coordinate Lorentzian metric on R x (spatial slice).  Three closed-form
// families cover flat space, isotropic expansion with an arbitrary positive
// scale factor a(t), and a conformally flat factor Omega(t,x)^2 over the
// static product.  Immutable after construction.
class SpacetimeMetric {
 public:
  enum class Family { kMinkowski, kFlrw, kConformal };

  static SpacetimeMetric minkowski(int dim, MetricOptions opts = {});
  static SpacetimeMetric flrw(int dim, Expr scale_factor, MetricOptions opts = {});
  static SpacetimeMetric conformal(int dim, Expr factor, MetricOptions opts = {});

  int dim() const { return dim_; }
  int spatial_dim() const { return dim_ - 1; }
  Family family() const { return family_; }
  const MetricOptions& options() const { return opts_; }
  std::string describe() const;

  // Scale factor a(t) and its derivative (flrw family only).
  double scale_factor(double t) const;
  double scale_factor_deriv(double t) const;

  bool in_chart(const Event& e) const;
  void require_chart(const Event& e) const;  // throws DomainError

  Mat metric_at(const Event& e) const;
  Mat inverse_metric_at(const Event& e) const;

  // Components Gamma^mu_{alpha beta}; analytic per family or second-order
  // central differences of metric_at, depending on options().christoffel.
  Christoffel christoffel_at(const Event& e) const;
  Christoffel christoffel_fd(const Event& e, double step) const;

  double inner(const Event& e, const Vec& u, const Vec& v) const;

  CausalClass classify(const SpacetimeVector& v) const;

  // Rescales a timelike future vector to <v,v> = 1.  Throws NotTimelikeError
  // for null/spacelike/past input.
  SpacetimeVector normalize_observer(const SpacetimeVector& v) const;

 private:
  SpacetimeMetric(Family family, int dim, MetricOptions opts);

  Family family_;
  int dim_;
  MetricOptions opts_;
  Expr a_, da_;            // flrw
  Expr omega_;             // conformal
  std::array<Expr, 4> domega_;  // conformal: partials of Omega
};

}  // namespace lightray
