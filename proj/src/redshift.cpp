#include "lightray/redshift.hpp"

#include <cmath>
#include <sstream>

#include "lightray/errors.hpp"

namespace lightray {

namespace {

void require_unit_observer(const SpacetimeMetric& g, const SpacetimeVector& u,
                           const char* which) {
  if (g.classify(u) != CausalClass::kTimelikeFuture) {
    std::ostringstream msg;
    msg << which << " observer is not timelike future-directed";
    throw NotTimelikeError(msg.str());
  }
  const double norm2 = g.inner(u.base, u.components, u.components);
  if (std::abs(norm2 - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << which << " observer has squared norm " << norm2 << "; expected 1";
    throw NotUnitError(msg.str());
  }
}

}  // namespace

RedshiftResult pointwise_redshift(const NullGeodesic& geo, const SpacetimeVector& emitter,
                                  double lambda_emit, const SpacetimeVector& receiver,
                                  double lambda_receive) {
  const SpacetimeMetric& g = geo.metric();
  require_unit_observer(g, emitter, "emitter");
  require_unit_observer(g, receiver, "receiver");

  RedshiftResult r;
  r.at_emitter = geo.state_at(lambda_emit);
  r.at_receiver = geo.state_at(lambda_receive);
  r.emitter_observer = emitter;
  r.receiver_observer = receiver;
  r.emitter_pairing = g.inner(emitter.base, emitter.components, r.at_emitter.tangent);
  r.receiver_pairing = g.inner(receiver.base, receiver.components, r.at_receiver.tangent);
  r.one_plus_z = r.emitter_pairing / r.receiver_pairing;
  return r;
}

RedshiftResult surface_redshift(const CauchySurface& emitter, const CauchySurface& receiver,
                                const NullGeodesic& geo) {
  auto hit_e = intersect_surface(geo, emitter);
  if (!hit_e)
    throw NoIntersectionError("trajectory does not cross surface '" + emitter.name() + "'");
  auto hit_r = intersect_surface(geo, receiver);
  if (!hit_r)
    throw NoIntersectionError("trajectory does not cross surface '" + receiver.name() + "'");

  return pointwise_redshift(geo, emitter.future_normal(hit_e->point), hit_e->lambda,
                            receiver.future_normal(hit_r->point), hit_r->lambda);
}

}  // namespace lightray
