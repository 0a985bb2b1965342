#include "cgr/benchmark.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "cgr/capacity.hpp"

namespace cgr {

LinearVolumeLedger::LinearVolumeLedger(const ContactPlan& cp) {
  entries_.reserve(cp.size());
  for (const auto& [id, c] : cp.contacts()) {
    const Bits v = contact_volume(c);
    entries_.emplace(id, Entry{v, v});
  }
}

Bits LinearVolumeLedger::remaining(ContactId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.remaining;
}

Bits LinearVolumeLedger::initial(ContactId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.initial;
}

void LinearVolumeLedger::debit(ContactId id, Bits amount) {
  auto it = entries_.find(id);
  if (it == entries_.end() || it->second.remaining < amount)
    throw std::logic_error(fmt::format("ledger: contact {} cannot hold {} more bits", id, amount));
  it->second.remaining -= amount;
}

void LinearVolumeLedger::credit(ContactId id, Bits amount) {
  auto it = entries_.find(id);
  if (it == entries_.end()) return;
  it->second.remaining = std::min(it->second.initial, it->second.remaining + amount);
}

Bits Booking::value_at(TimeMs t) const {
  if (t < start || t >= drain_end) return 0;
  if (t < drain_start) return size;
  // ceil(size * left / span)
  const TimeMs span = drain_end - drain_start;
  const TimeMs left = drain_end - t;
  return (size * left + span - 1) / span;
}

NeighborBufferView::NeighborBufferView(std::size_t node_count, std::optional<Bits> capacity)
    : nodes_(node_count, NodeState{capacity, {}}) {}

void NeighborBufferView::set_capacity(NodeId node, std::optional<Bits> capacity) {
  nodes_.at(node.value).capacity = capacity;
}

Bits NeighborBufferView::occupancy(NodeId node, TimeMs t) const {
  Bits total = 0;
  for (const Booking& b : nodes_.at(node.value).bookings) total += b.value_at(t);
  return total;
}

bool NeighborBufferView::fits(NodeId node, TimeMs t, Bits size) const {
  const auto& cap = nodes_.at(node.value).capacity;
  return !cap || occupancy(node, t) + size <= *cap;
}

bool NeighborBufferView::try_book(NodeId node, const Booking& b) {
  if (!(b.start <= b.drain_start && b.drain_start <= b.drain_end))
    throw std::invalid_argument("booking: times out of order");
  if (!fits(node, b.start, b.size)) return false;
  auto& v = nodes_.at(node.value).bookings;
  // bookings fully drained before this one starts no longer matter for checks
  std::erase_if(v, [&](const Booking& old) { return old.drain_end <= b.start; });
  v.push_back(b);
  booked_ += b.size;
  return true;
}

Bits NeighborBufferView::total_drained(TimeMs t) const {
  // bookings dropped by try_book were fully drained
  Bits live = 0;
  for (const auto& n : nodes_)
    for (const Booking& b : n.bookings) live += t < b.start ? b.size : b.value_at(t);
  return booked_ - live;
}

std::optional<Route> evaluate_candidate(const ContactPlan& cp, const std::vector<ContactId>& seq, const Bundle& b,
                                        NodeId from, TimeMs now, const EtoFn& eto, const LinearVolumeLedger& ledger) {
  if (seq.empty()) return std::nullopt;
  Route r;
  r.bundle_id = b.id;
  TimeMs arr = now;
  NodeId at = from;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Contact* c = cp.find(seq[i]);
    if (c == nullptr || c->sender != at) return std::nullopt;
    if (ledger.remaining(c->id) < b.size) return std::nullopt;
    TimeMs start = std::max(arr, c->t_start);
    if (i == 0 && eto) start = std::max(start, eto(*c));
    const TimeMs end = start + transmission_time(b.size, c->rate);
    if (end > c->t_end) return std::nullopt;
    r.hops.push_back(Hop{c->id, c->origin_id, c->sender, c->receiver, start, end});
    arr = end;
    at = c->receiver;
  }
  if (at != b.destination) return std::nullopt;
  r.bdt = arr;
  return r;
}

std::optional<Route> best_candidate(const ContactPlan& cp, const std::vector<std::vector<ContactId>>& routes,
                                    const Bundle& b, NodeId from, TimeMs now, const EtoFn& eto,
                                    const LinearVolumeLedger& ledger) {
  std::optional<Route> best;
  for (const auto& seq : routes) {
    auto r = evaluate_candidate(cp, seq, b, from, now, eto, ledger);
    if (r && (!best || r->bdt < best->bdt)) best = std::move(r);
  }
  return best;
}

namespace {

std::vector<std::vector<ContactId>> yen_sequences(const ContactPlan& cp, const SearchRequest& req, int k) {
  ContactGraph g(cp);
  std::vector<std::vector<ContactId>> out;
  for (const Route& r : yen_k_routes(g, req, k)) out.push_back(r.contact_ids());
  return out;
}

}  // namespace

std::optional<Route> source_route(const Bundle& b, const ContactPlan& cp, LinearVolumeLedger& ledger, int k,
                                  RouteList& cache, TimeMs now, const EtoFn& eto) {
  if (k < 1) throw std::invalid_argument("source_route: k must be positive");
  if (!cache.valid_for(cp.revision())) {
    cache.routes = yen_sequences(cp, SearchRequest::for_bundle(b, now), k);
    cache.revision = cp.revision();
    cache.computed = true;
  }
  auto best = best_candidate(cp, cache.routes, b, b.source, now, eto, ledger);
  if (best)
    for (const Hop& h : best->hops) ledger.debit(h.contact, b.size);
  return best;
}

std::optional<Route> reroute_from_node(const Bundle& b, const ContactPlan& cp, LinearVolumeLedger ledger, int k,
                                       const RerouteRequest& req, const EtoFn& eto) {
  for (ContactId id : req.unused_hops) ledger.credit(id, b.size);
  SearchRequest s = SearchRequest::for_bundle(b, req.now);
  s.source = req.node;
  for (NodeId v : req.visited)
    if (v != req.node) s.excluded_nodes.push_back(v);
  s.suppressed = req.excluded;
  return best_candidate(cp, yen_sequences(cp, s, k), b, req.node, req.now, eto, ledger);
}

}  // namespace cgr
