#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgr/contact_plan.hpp"
#include "cgr/route_search.hpp"

namespace cgr {

/// Piecewise-constant function of time, zero outside its breakpoints.
/// Each breakpoint holds the value on [key, next key).
class StepFunction {
 public:
  void add(TimeInterval iv, Bits amount);
  [[nodiscard]] Bits at(TimeMs t) const;
  [[nodiscard]] Bits max_over(TimeInterval iv) const;
  [[nodiscard]] const std::map<TimeMs, Bits>& breakpoints() const { return values_; }
  [[nodiscard]] bool empty() const { return values_.empty(); }

 private:
  void coalesce(std::map<TimeMs, Bits>::iterator it);
  std::map<TimeMs, Bits> values_;
};

struct ForecastBufferTable {
  NodeId node;
  std::optional<Bits> capacity;  // nullopt: unbounded
  StepFunction occupancy;
};

class BufferTables {
 public:
  BufferTables() = default;
  BufferTables(std::size_t node_count, std::optional<Bits> capacity);

  void set_capacity(NodeId node, std::optional<Bits> capacity);
  [[nodiscard]] ForecastBufferTable& table(NodeId node) { return tables_.at(node.value); }
  [[nodiscard]] const ForecastBufferTable& table(NodeId node) const { return tables_.at(node.value); }
  [[nodiscard]] const std::vector<ForecastBufferTable>& tables() const { return tables_; }
  [[nodiscard]] std::size_t size() const { return tables_.size(); }

 private:
  std::vector<ForecastBufferTable> tables_;
};

using OverflowSet = std::map<NodeId, std::vector<TimeInterval>>;

/// Maximal intervals where occupancy + bundle size exceeds capacity. The
/// bundle's source and destination and unbounded nodes are skipped. A bundle
/// larger than a node's capacity overflows that node at all times.
[[nodiscard]] OverflowSet detect_overflows(const BufferTables& tables, const Bundle& bundle);

struct RestrictedPlan {
  ContactPlan overlay;
  std::unordered_map<ContactId, ContactId> permanent_of;  // overlay piece -> permanent contact
  std::int64_t added = 0;  // temporary contacts created by the splits
  std::int64_t bound = 0;  // intersecting (contact, overflow) pairs

  [[nodiscard]] ContactId permanent(ContactId overlay_id) const;
};

/// Copy of `cp` with every overlap between a contact into an overflow node
/// and that node's overflow intervals erased.
[[nodiscard]] RestrictedPlan restrict_cp_for_overflows(const ContactPlan& cp, const OverflowSet& overflows);

[[nodiscard]] PruneSchedule prune_schedule(const OverflowSet& overflows);

/// Books [arrival, departure tx_start) at every intermediate node. Throws
/// BufferOverflowError, leaving the tables untouched, if any node would
/// exceed its capacity.
void commit_route_buffer(BufferTables& tables, const Route& route, const Bundle& bundle);

/// Residence intervals of a route: (node, [tx_end of incoming hop, tx_start of outgoing hop)).
[[nodiscard]] std::vector<std::pair<NodeId, TimeInterval>> residences(const Route& route);

[[nodiscard]] Bits occupancy_at(const ForecastBufferTable& table, TimeMs t);

/// `t_ms,occupancy_bits` at every breakpoint.
[[nodiscard]] std::string buffer_table_csv(const ForecastBufferTable& table);

}  // namespace cgr
