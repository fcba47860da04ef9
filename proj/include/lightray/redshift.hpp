#pragma once

#include "lightray/geodesic.hpp"

namespace lightray {

struct RedshiftResult {
  double one_plus_z = 0.0;
  GeodesicState at_emitter;
  GeodesicState at_receiver;
  SpacetimeVector emitter_observer;
  SpacetimeVector receiver_observer;
  double emitter_pairing = 0.0;   // <u_E, gamma_dot(lambda_E)>
  double receiver_pairing = 0.0;  // <u_R, gamma_dot(lambda_R)>
};

// Frequency ratio between two observers crossing one null trajectory:
// 1 + z = <u_E, gamma_dot(lambda_E)> / <u_R, gamma_dot(lambda_R)>.
// Both observers must be unit (NotUnitError, 1e-9) timelike future-directed
// (NotTimelikeError) at their events.  Invariant under affine rescaling of
// the trajectory's parameter.
RedshiftResult pointwise_redshift(const NullGeodesic& geo, const SpacetimeVector& emitter,
                                  double lambda_emit, const SpacetimeVector& receiver,
                                  double lambda_receive);

// Redshift between the normal observers of two surfaces along a trajectory
// crossing both; NoIntersectionError when either crossing is missing.
RedshiftResult surface_redshift(const CauchySurface& emitter, const CauchySurface& receiver,
                                const NullGeodesic& geo);

}  // namespace lightray
