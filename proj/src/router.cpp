#include "cgr/router.hpp"

namespace cgr {

ProposedRouter::ProposedRouter(ContactPlan cp, BufferTables tables, ProposedConfig cfg)
    : cp_(std::move(cp)), tables_(std::move(tables)), cfg_(cfg) {
  if (tables_.size() < cp_.node_count()) throw std::invalid_argument("ProposedRouter: fewer tables than nodes");
  if (cfg_.time_step <= 0) throw std::invalid_argument("ProposedRouter: time step must be positive");
}

std::optional<Route> ProposedRouter::route_bundle(const Bundle& b, TimeMs now) {
  if (b.t_created > now) throw std::invalid_argument("route_bundle: bundle not yet created");
  const OverflowSet overflows = detect_overflows(tables_, b);

  std::optional<Route> route;
  if (overflows.empty()) {
    route = dijkstra_route(cp_, b, now);
  } else {
    const RestrictedPlan restricted = restrict_cp_for_overflows(cp_, overflows);
    overlays_.push_back({now, b.id, restricted.added, restricted.bound});
    const PruneSchedule prune = prune_schedule(overflows);
    route = dijkstra_route(restricted.overlay, b, now, prune);
    if (route)
      for (Hop& h : route->hops) h.contact = restricted.permanent(h.contact);
  }
  if (!route) return std::nullopt;

  // buffer first: its check is the one that can refuse, and it mutates nothing when it does
  commit_route_buffer(tables_, *route, b);
  commit_route_capacity(cp_, *route, now, cfg_.min_piece_volume, &journal_);
  return route;
}

}  // namespace cgr
