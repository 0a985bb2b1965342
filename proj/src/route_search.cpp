#include "cgr/route_search.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include "cgr/capacity.hpp"

namespace cgr {

void PruneSchedule::add(NodeId node, TimeInterval overflow) {
  if (overflow.begin >= overflow.end) throw std::invalid_argument("PruneSchedule: empty interval");
  auto& v = by_node_[node];
  if (!v.empty() && v.back().end > overflow.begin)
    throw std::invalid_argument("PruneSchedule: intervals must be sorted and disjoint");
  v.push_back(overflow);
}

std::span<const TimeInterval> PruneSchedule::at(NodeId node) const {
  auto it = by_node_.find(node);
  if (it == by_node_.end()) return {};
  return it->second;
}

TimeMs PruneSchedule::next_overflow_start(NodeId node, TimeMs arrival) const {
  auto v = at(node);
  auto it = std::upper_bound(v.begin(), v.end(), arrival, [](TimeMs t, const TimeInterval& o) { return t < o.end; });
  return it == v.end() ? kTimeMax : it->begin;
}

std::optional<HopTimes> hop_times(TimeMs arrival, const Contact& c, Bits size) {
  const TimeMs start = std::max(arrival, c.t_start);
  const TimeMs end = start + transmission_time(size, c.rate);
  if (end > c.t_end) return std::nullopt;
  return HopTimes{start, end};
}

SearchRequest SearchRequest::for_bundle(const Bundle& b, TimeMs t0, const PruneSchedule* prune) {
  SearchRequest r;
  r.bundle_id = b.id;
  r.source = b.source;
  r.destination = b.destination;
  r.size = b.size;
  r.t0 = t0;
  r.prune = prune;
  return r;
}

ContactGraph::ContactGraph(const ContactPlan& cp) : node_count_(cp.node_count()) {
  contacts_.reserve(cp.size());
  for (const auto& [id, c] : cp.contacts()) contacts_.push_back(c);
  std::sort(contacts_.begin(), contacts_.end(), [](const Contact& a, const Contact& b) {
    return std::tie(a.sender.value, a.t_start, a.id) < std::tie(b.sender.value, b.t_start, b.id);
  });
  offsets_.assign(node_count_ + 1, 0);
  for (const auto& c : contacts_) ++offsets_[c.sender.value + 1];
  for (std::size_t i = 0; i < node_count_; ++i) offsets_[i + 1] += offsets_[i];
  index_.reserve(contacts_.size());
  for (std::uint32_t i = 0; i < contacts_.size(); ++i) index_.emplace(contacts_[i].id, i);
}

std::optional<std::uint32_t> ContactGraph::index_of(ContactId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::pair<std::uint32_t, std::uint32_t> ContactGraph::outgoing(NodeId node) const {
  if (node.value >= node_count_) return {0, 0};
  return {offsets_[node.value], offsets_[node.value + 1]};
}

SearchState make_search_state(const ContactGraph& g, const SearchRequest& req) {
  SearchState s;
  const std::size_t n = g.size();
  s.root = static_cast<std::uint32_t>(n);
  s.arrival.assign(n + 1, kTimeMax);
  s.predecessor.assign(n + 1, SearchState::kNone);
  s.visited.assign(n + 1, 0);
  s.suppressed.assign(n + 1, 0);
  s.excluded_node.assign(g.node_count(), 0);
  s.node_scratch.assign(g.node_count(), 0);
  s.arrival[s.root] = req.t0;
  for (ContactId id : req.suppressed)
    if (auto i = g.index_of(id)) s.suppressed[*i] = 1;
  for (NodeId v : req.excluded_nodes)
    if (v.value < s.excluded_node.size()) s.excluded_node[v.value] = 1;
  return s;
}

std::vector<NodeId> visited_nodes(const ContactGraph& g, const SearchState& s, std::uint32_t contact,
                                  const SearchRequest& req) {
  std::vector<NodeId> out;
  if (s.arrival[contact] == kTimeMax) return out;
  out.push_back(req.source);
  for (std::uint32_t i = 0; i < s.excluded_node.size(); ++i)
    if (s.excluded_node[i] && NodeId{i} != req.source) out.push_back(NodeId{i});
  for (std::uint32_t c = contact; c != s.root && c != SearchState::kNone; c = s.predecessor[c])
    out.push_back(g[c].receiver);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

NodeId receiver_of(const ContactGraph& g, const SearchState& s, std::uint32_t c, const SearchRequest& req) {
  return c == s.root ? req.source : g[c].receiver;
}

// `cutoff`: stop scanning once contacts open at or after the best bdt found
// (they cannot improve it). The public review runs with no cutoff.
template <class OnImprove>
void review(const ContactGraph& g, SearchState& s, std::uint32_t selected, const SearchRequest& req, bool cutoff,
            OnImprove&& on_improve) {
  const NodeId here = receiver_of(g, s, selected, req);
  const TimeMs arr = s.arrival[selected];

  // mark the nodes on the path to `selected`
  auto& mark = s.node_scratch;
  std::copy(s.excluded_node.begin(), s.excluded_node.end(), mark.begin());
  if (req.source.value < mark.size()) mark[req.source.value] = 1;
  for (std::uint32_t c = selected; c != s.root && c != SearchState::kNone; c = s.predecessor[c])
    mark[g[c].receiver.value] = 1;

  const TimeMs t_next = req.prune != nullptr ? req.prune->next_overflow_start(here, arr) : kTimeMax;

  auto [first, last] = g.outgoing(here);
  for (std::uint32_t i = first; i < last; ++i) {
    const Contact& c = g[i];
    if (cutoff && c.t_start >= s.best_bdt) break;
    if (c.t_end <= arr) continue;
    if (s.visited[i]) continue;
    if (mark[c.receiver.value]) continue;
    if (c.suppressed || s.suppressed[i]) continue;
    auto ht = hop_times(arr, c, req.size);
    if (!ht) continue;
    if (ht->tx_start >= t_next) continue;
    if (ht->tx_end < s.arrival[i]) {
      s.arrival[i] = ht->tx_end;
      s.predecessor[i] = selected;
      if (c.receiver == req.destination && ht->tx_end < s.best_bdt) {
        s.best_bdt = ht->tx_end;
        s.c_end = i;
      }
      on_improve(i);
    }
  }
  s.visited[selected] = 1;
}

}  // namespace

void contact_review(const ContactGraph& g, SearchState& s, std::uint32_t selected, const SearchRequest& req) {
  review(g, s, selected, req, false, [](std::uint32_t) {});
}

std::optional<std::uint32_t> contact_selection(const ContactGraph& g, const SearchState& s) {
  std::optional<std::uint32_t> best;
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    if (s.visited[i] || s.arrival[i] == kTimeMax) continue;
    if (!best || std::tie(s.arrival[i], g[i].t_start, g[i].id) <
                     std::tie(s.arrival[*best], g[*best].t_start, g[*best].id))
      best = i;
  }
  return best;
}

std::optional<Route> reconstruct_route(const ContactGraph& g, const SearchState& s, const SearchRequest& req) {
  if (!s.c_end) return std::nullopt;
  std::vector<std::uint32_t> chain;
  for (std::uint32_t c = *s.c_end; c != s.root; c = s.predecessor[c]) {
    if (c == SearchState::kNone) throw std::logic_error("reconstruct_route: broken predecessor chain");
    chain.push_back(c);
  }
  std::reverse(chain.begin(), chain.end());
  Route r;
  r.bundle_id = req.bundle_id;
  TimeMs arr = req.t0;
  for (std::uint32_t i : chain) {
    const Contact& c = g[i];
    auto ht = hop_times(arr, c, req.size);
    if (!ht) throw std::logic_error("reconstruct_route: hop no longer fits");
    r.hops.push_back(Hop{c.id, c.origin_id, c.sender, c.receiver, ht->tx_start, ht->tx_end});
    arr = ht->tx_end;
  }
  r.bdt = arr;
  return r;
}

std::optional<Route> dijkstra_route(const ContactGraph& g, const SearchRequest& req) {
  if (req.source == req.destination) return std::nullopt;
  SearchState s = make_search_state(g, req);

  using Key = std::tuple<TimeMs, TimeMs, ContactId, std::uint32_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  auto push = [&](std::uint32_t i) { heap.emplace(s.arrival[i], g[i].t_start, g[i].id, i); };

  review(g, s, s.root, req, true, push);
  while (!heap.empty()) {
    auto [arr, ts, id, i] = heap.top();
    heap.pop();
    if (s.visited[i] || arr != s.arrival[i]) continue;
    // nothing left can beat the destination label
    if (arr >= s.best_bdt) break;
    review(g, s, i, req, true, push);
  }
  return reconstruct_route(g, s, req);
}

std::optional<Route> dijkstra_route(const ContactPlan& cp, const Bundle& b, TimeMs t0, const PruneSchedule& prune) {
  ContactGraph g(cp);
  auto req = SearchRequest::for_bundle(b, t0, prune.empty() ? nullptr : &prune);
  return dijkstra_route(g, req);
}

std::vector<Route> yen_k_routes(const ContactGraph& g, const SearchRequest& req, int k) {
  if (k < 1) throw std::invalid_argument("yen_k_routes: k must be positive");
  std::vector<Route> accepted;
  auto first = dijkstra_route(g, req);
  if (!first) return accepted;
  accepted.push_back(std::move(*first));

  using CandKey = std::pair<TimeMs, std::vector<ContactId>>;
  std::map<CandKey, Route> candidates;
  std::set<std::vector<ContactId>> seen;
  seen.insert(accepted.front().contact_ids());

  while (static_cast<int>(accepted.size()) < k) {
    const Route& prev = accepted.back();
    for (std::size_t i = 0; i < prev.hops.size(); ++i) {
      SearchRequest spur = req;
      spur.bundle_id = req.bundle_id;
      spur.source = i == 0 ? req.source : prev.hops[i - 1].to;
      spur.t0 = i == 0 ? req.t0 : prev.hops[i - 1].tx_end;
      spur.excluded_nodes = req.excluded_nodes;
      spur.excluded_nodes.push_back(req.source);
      for (std::size_t j = 0; j + 1 < i; ++j) spur.excluded_nodes.push_back(prev.hops[j].to);
      if (i > 0) std::erase(spur.excluded_nodes, spur.source);

      for (const Route& a : accepted) {
        if (a.hops.size() <= i) continue;
        if (!std::equal(prev.hops.begin(), prev.hops.begin() + static_cast<std::ptrdiff_t>(i), a.hops.begin(),
                        [](const Hop& x, const Hop& y) { return x.contact == y.contact; }))
          continue;
        spur.suppressed.push_back(a.hops[i].contact);
      }

      auto tail = dijkstra_route(g, spur);
      if (!tail) continue;
      Route r;
      r.bundle_id = req.bundle_id;
      r.hops.assign(prev.hops.begin(), prev.hops.begin() + static_cast<std::ptrdiff_t>(i));
      r.hops.insert(r.hops.end(), tail->hops.begin(), tail->hops.end());
      r.bdt = tail->bdt;
      auto ids = r.contact_ids();
      if (seen.contains(ids)) continue;
      seen.insert(ids);
      candidates.emplace(CandKey{r.bdt, std::move(ids)}, std::move(r));
    }
    if (candidates.empty()) break;
    auto it = candidates.begin();
    accepted.push_back(std::move(it->second));
    candidates.erase(it);
  }
  return accepted;
}

std::vector<Route> yen_k_routes(const ContactPlan& cp, const Bundle& b, TimeMs t0, int k) {
  ContactGraph g(cp);
  return yen_k_routes(g, SearchRequest::for_bundle(b, t0), k);
}

}  // namespace cgr
