#pragma once

#include <memory>

#include "lightray/variation.hpp"

namespace lightray {

// Restriction of ray momenta to Cauchy surfaces, and the induced one-form
// evaluated on variation fields.
//
// A null trajectory crossing a surface at x with tangent k and future normal
// n determines the unit covector p_i = -<k, e_i> / <k, n> in the graph
// frame.  Evaluating the same structure on a one-parameter family of rays
// gives a number alpha; momentum conservation along the family makes the
// ratio of alphas on two surfaces equal to one plus the redshift between
// them, independent of the family chosen.

// Momentum restriction at a precomputed crossing.  Throws ConsistencyError
// if the result is not unit length under the inverse induced metric to
// 1e-10 (a symptom of null-constraint drift in the trajectory).
UnitCovector restrict_momentum(const CauchySurface& surface, const Intersection& hit);

// Convenience: locate the crossing first.  Throws NoIntersectionError when
// the stored trajectory never meets the surface.
UnitCovector restrict_momentum(const CauchySurface& surface, const NullGeodesic& geo);

// Push a unit covector from one surface to another along its ray:
// lift, integrate across [lambda_lo, lambda_hi], restrict.
UnitCovector transfer(const CauchySurface& from, const CauchySurface& to, const UnitCovector& u,
                      double lambda_lo, double lambda_hi, const RayOptions& opts = {});

struct ContactDiagnostics {
  double normal_pairing = 0.0;   // <k, n> at the crossing
  double pairing = 0.0;          // <k, J(lambda*)>
  Vec base_velocity;             // d/ds of the crossing's spatial coordinates
  double alpha_velocity = 0.0;   // covector applied to base_velocity
  double alpha_jacobi = 0.0;     // -pairing / normal_pairing
  double scale = 0.0;            // noise floor used by kernel decisions
};

struct ContactEvaluation {
  const CauchySurface* surface = nullptr;
  Intersection intersection;
  UnitCovector covector;
  double alpha = 0.0;  // -<k, V> / <k, n> with V the surface velocity lift
  ContactDiagnostics diagnostics;
};

// Evaluates the surface one-form on a variation field.  The three
// computation routes (velocity, lift, Jacobi field) are cross-checked:
// velocity vs lift to 1e-9 and Jacobi vs lift to 1e-8 of the noise floor,
// ConsistencyError otherwise.
ContactEvaluation contact_value(const CauchySurface& surface, const VariationField& field);

struct TheoremCheck {
  double ratio = 0.0;       // alpha at receiver / alpha at emitter
  double one_plus_z = 0.0;  // ratio of normal pairings, emitter over receiver
  double residual = 0.0;    // |ratio - one_plus_z| / one_plus_z
  ContactEvaluation emitter;
  ContactEvaluation receiver;
};

// Ratio comparison on one family crossing both surfaces.  Throws
// ContactKernelError when the family's alpha at the emitter is below 1e-6
// of the noise floor (the ratio would be meaningless), NoIntersectionError
// when the base ray misses either surface.
TheoremCheck theorem_ratio(const CauchySurface& emitter, const CauchySurface& receiver,
                           const VariationField& field);

struct KernelReport {
  int cases = 0;
  // Largest |alpha| seen at the receiver over kernel directions of the
  // emitter, relative to the receiver's noise floor.
  double worst_kernel_alpha = 0.0;
  // Directions with a solidly nonzero emitter alpha whose receiver alpha
  // had the opposite sign.
  int orientation_checks = 0;
  int orientation_violations = 0;
};

// Structural check that the one-forms on the two surfaces have the same
// kernel and co-orientation along a ray crossing both: random tangent
// directions are combined so the emitter alpha vanishes, and the receiver
// alpha is measured there.
KernelReport kernel_consistency(const CauchySurface& emitter, const CauchySurface& receiver,
                                std::shared_ptr<const NullGeodesic> base, uint64_t seed,
                                int cases);

}  // namespace lightray
