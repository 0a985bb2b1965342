#pragma once

#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cgr/contact_plan.hpp"
#include "cgr/route_search.hpp"

namespace cgr {

/// Remaining volume per contact, debited by whole bundle sizes regardless
/// of when in the contact the bundle is actually sent.
class LinearVolumeLedger {
 public:
  LinearVolumeLedger() = default;
  explicit LinearVolumeLedger(const ContactPlan& cp);

  [[nodiscard]] Bits remaining(ContactId id) const;
  [[nodiscard]] Bits initial(ContactId id) const;
  /// Throws std::logic_error if the contact would go negative.
  void debit(ContactId id, Bits amount);
  /// Credits back, saturating at the initial volume.
  void credit(ContactId id, Bits amount);

 private:
  struct Entry {
    Bits initial = 0;
    Bits remaining = 0;
  };
  std::unordered_map<ContactId, Entry> entries_;
};

/// A bundle's announced stay at a node: full size on [start, drain_start),
/// then linearly decreasing to zero on [drain_start, drain_end).
struct Booking {
  BundleId bundle = 0;
  Bits size = 0;
  TimeMs start = 0;
  TimeMs drain_start = 0;
  TimeMs drain_end = 0;

  [[nodiscard]] Bits value_at(TimeMs t) const;
};

/// Buffer bookings of every node as seen by its neighbours.
class NeighborBufferView {
 public:
  NeighborBufferView() = default;
  NeighborBufferView(std::size_t node_count, std::optional<Bits> capacity);

  void set_capacity(NodeId node, std::optional<Bits> capacity);
  [[nodiscard]] std::optional<Bits> capacity(NodeId node) const { return nodes_.at(node.value).capacity; }
  [[nodiscard]] Bits occupancy(NodeId node, TimeMs t) const;
  [[nodiscard]] bool fits(NodeId node, TimeMs t, Bits size) const;
  /// Adds the booking when occupancy(t = b.start) + size stays within capacity.
  bool try_book(NodeId node, const Booking& b);

  [[nodiscard]] Bits total_booked() const { return booked_; }
  /// Bits drained by time t across every booking ever accepted. Only exact
  /// for t at or after the start of the latest accepted booking, since older
  /// bookings drained before that start are forgotten.
  [[nodiscard]] Bits total_drained(TimeMs t) const;

 private:
  struct NodeState {
    std::optional<Bits> capacity;
    std::vector<Booking> bookings;
  };
  std::vector<NodeState> nodes_;
  Bits booked_ = 0;
};

/// k routes computed at the source, valid for one plan revision.
struct RouteList {
  std::vector<std::vector<ContactId>> routes;
  std::uint64_t revision = 0;
  bool computed = false;

  [[nodiscard]] bool valid_for(std::uint64_t rev) const { return computed && revision == rev; }
};

/// Earliest time the node-local queue lets a bundle start on `c`.
using EtoFn = std::function<TimeMs(const Contact& c)>;

/// Times a contact sequence for a bundle leaving `from` at `now`; the first
/// hop waits for `eto`, later hops only for their contact start. Returns
/// nullopt unless every hop fits its contact and every ledger entry still
/// holds the bundle.
[[nodiscard]] std::optional<Route> evaluate_candidate(const ContactPlan& cp, const std::vector<ContactId>& seq,
                                                      const Bundle& b, NodeId from, TimeMs now, const EtoFn& eto,
                                                      const LinearVolumeLedger& ledger);

/// Picks the earliest-delivering valid candidate (list order on ties).
[[nodiscard]] std::optional<Route> best_candidate(const ContactPlan& cp,
                                                  const std::vector<std::vector<ContactId>>& routes,
                                                  const Bundle& b, NodeId from, TimeMs now, const EtoFn& eto,
                                                  const LinearVolumeLedger& ledger);

/// Source routing: refreshes `cache` with Yen when the plan revision moved,
/// picks the best candidate and debits the ledger along it.
std::optional<Route> source_route(const Bundle& b, const ContactPlan& cp, LinearVolumeLedger& ledger, int k,
                                  RouteList& cache, TimeMs now, const EtoFn& eto);

struct RerouteRequest {
  NodeId node;
  TimeMs now = 0;
  std::vector<NodeId> visited;          // nodes the bundle already crossed
  std::vector<ContactId> excluded;      // problem contacts, for this search only
  std::vector<ContactId> unused_hops;   // old-route contacts to credit back locally
};

/// Re-search from an intermediate node on a local copy of the source ledger.
/// Credits to the copy are never reported back.
[[nodiscard]] std::optional<Route> reroute_from_node(const Bundle& b, const ContactPlan& cp,
                                                     LinearVolumeLedger ledger, int k, const RerouteRequest& req,
                                                     const EtoFn& eto);

}  // namespace cgr
