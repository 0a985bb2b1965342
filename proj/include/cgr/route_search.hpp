#pragma once

#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cgr/contact_plan.hpp"

namespace cgr {

/// Per-node overflow intervals for the bundle being routed. A departure
/// from a node is forbidden once the next overflow there has begun.
class PruneSchedule {
 public:
  /// Intervals per node must be added in increasing, disjoint order.
  void add(NodeId node, TimeInterval overflow);
  [[nodiscard]] bool empty() const { return by_node_.empty(); }
  [[nodiscard]] std::span<const TimeInterval> at(NodeId node) const;
  [[nodiscard]] const std::map<NodeId, std::vector<TimeInterval>>& intervals() const { return by_node_; }

  /// Start of the first overflow at `node` whose end lies after `arrival`;
  /// kTimeMax when there is none.
  [[nodiscard]] TimeMs next_overflow_start(NodeId node, TimeMs arrival) const;

 private:
  std::map<NodeId, std::vector<TimeInterval>> by_node_;
};

struct HopTimes {
  TimeMs tx_start = 0;
  TimeMs tx_end = 0;
};

/// Earliest transmission of `size` bits over `c` for a bundle present at the
/// sender from `arrival`; nullopt when it would not finish before t_end.
[[nodiscard]] std::optional<HopTimes> hop_times(TimeMs arrival, const Contact& c, Bits size);

struct SearchRequest {
  BundleId bundle_id = 0;
  NodeId source;
  NodeId destination;
  Bits size = 0;
  TimeMs t0 = 0;
  const PruneSchedule* prune = nullptr;
  std::vector<NodeId> excluded_nodes;  // treated as already on the path
  std::vector<ContactId> suppressed;   // per-search suppression

  static SearchRequest for_bundle(const Bundle& b, TimeMs t0, const PruneSchedule* prune = nullptr);
};

/// Read-only snapshot of a plan, contacts grouped by sender and ordered by
/// (t_start, id) inside each group.
class ContactGraph {
 public:
  explicit ContactGraph(const ContactPlan& cp);

  [[nodiscard]] std::size_t size() const { return contacts_.size(); }
  [[nodiscard]] std::size_t node_count() const { return node_count_; }
  [[nodiscard]] const Contact& operator[](std::size_t i) const { return contacts_[i]; }
  [[nodiscard]] std::optional<std::uint32_t> index_of(ContactId id) const;

  /// Index range [first, last) of the contacts sent by `node`.
  [[nodiscard]] std::pair<std::uint32_t, std::uint32_t> outgoing(NodeId node) const;

 private:
  std::vector<Contact> contacts_;
  std::vector<std::uint32_t> offsets_;
  std::unordered_map<ContactId, std::uint32_t> index_;
  std::size_t node_count_ = 0;
};

/// Exploration labels of one search. Slot `root` (== graph.size()) is the
/// virtual contact at the source with interval [t0, inf) and infinite rate.
struct SearchState {
  static constexpr std::uint32_t kNone = 0xffffffffu;

  std::vector<TimeMs> arrival;
  std::vector<std::uint32_t> predecessor;
  std::vector<char> visited;
  std::vector<char> suppressed;
  std::vector<char> excluded_node;
  TimeMs best_bdt = kTimeMax;
  std::optional<std::uint32_t> c_end;
  std::uint32_t root = 0;

  std::vector<char> node_scratch;
};

[[nodiscard]] SearchState make_search_state(const ContactGraph& g, const SearchRequest& req);

/// Nodes on the best known path to `contact` (source, excluded nodes and
/// every receiver along the predecessor chain).
[[nodiscard]] std::vector<NodeId> visited_nodes(const ContactGraph& g, const SearchState& s,
                                                std::uint32_t contact, const SearchRequest& req);

/// Contact review procedure: explores the successors of `selected` and marks
/// it visited. A successor is ignored when its sender is not the selected
/// receiver, it ends by the selected arrival, it is visited or suppressed,
/// its receiver is already on the path, it cannot carry the bundle, or its
/// transmission would start once the next overflow at the selected receiver
/// has begun.
void contact_review(const ContactGraph& g, SearchState& s, std::uint32_t selected, const SearchRequest& req);

/// Unvisited contact with the smallest finite arrival; ties by (t_start, id).
[[nodiscard]] std::optional<std::uint32_t> contact_selection(const ContactGraph& g, const SearchState& s);

/// Rebuilds the route ending at s.c_end, recomputing hop times forward.
[[nodiscard]] std::optional<Route> reconstruct_route(const ContactGraph& g, const SearchState& s,
                                                     const SearchRequest& req);

[[nodiscard]] std::optional<Route> dijkstra_route(const ContactGraph& g, const SearchRequest& req);
[[nodiscard]] std::optional<Route> dijkstra_route(const ContactPlan& cp, const Bundle& b, TimeMs t0,
                                                  const PruneSchedule& prune = {});

/// Up to k loop-free routes in nondecreasing delivery time (Yen).
[[nodiscard]] std::vector<Route> yen_k_routes(const ContactGraph& g, const SearchRequest& req, int k);
[[nodiscard]] std::vector<Route> yen_k_routes(const ContactPlan& cp, const Bundle& b, TimeMs t0, int k);

}  // namespace cgr
