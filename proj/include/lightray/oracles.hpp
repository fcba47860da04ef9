#pragma once

#include "lightray/expr.hpp"
#include "lightray/geodesic.hpp"

namespace lightray::oracles {

// Closed-form reference values the numerical pipeline is measured against.
// Nothing in the core library depends on these; they are linked only by
// tests and the bundled experiments.

// Frequency ratio between comoving observers in a scale-factor cosmology:
// a(t_receive) / a(t_emit).  DomainError when the scale factor is not
// positive at either time.
double expanding_ratio(const Expr& scale_factor, double t_emit, double t_receive);

// Flat-space Doppler factor (one plus z) for a receiver receding straight
// along the line of sight at speed beta (moving toward for beta < 0):
// sqrt((1 + beta) / (1 - beta)).  DomainError when |beta| >= 1.
double doppler_aligned(double beta);

// General-angle Doppler factor 1 / (gamma * (1 - beta * cos_theta)), where
// cos_theta is the angle between the receiver's velocity and the photon's
// direction of travel at reception.
double doppler_at_angle(double beta, double cos_theta);

// Closed-form null geodesics of the two bundled cosmologies, parameterised
// by the conserved comoving momentum q = a^2 xdot.  Used to measure
// integrator accuracy against exact endpoints.
struct ComovingRay {
  double t0 = 0.0;
  Vec x0;  // spatial start, length n
  Vec q;   // comoving momentum, length n, nonzero
};

// a(t) = exp(t):    exp(t(lambda)) = exp(t0) + |q| lambda
GeodesicState exp_cosmology_state(const ComovingRay& ray, double lambda);

// a(t) = t^(2/3):   t(lambda)^(5/3) = t0^(5/3) + (5/3) |q| lambda
GeodesicState dust_cosmology_state(const ComovingRay& ray, double lambda);

}  // namespace lightray::oracles
