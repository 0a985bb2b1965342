#pragma once

#include <optional>
#include <vector>

#include "cgr/buffer.hpp"
#include "cgr/capacity.hpp"
#include "cgr/route_search.hpp"

namespace cgr {

struct ProposedConfig {
  Bits min_piece_volume = 0;  // split remainders smaller than this are dropped
  TimeMs time_step = 1000;    // retry period when no route exists
};

/// Temporary growth caused by the overflow restriction of one routing call.
struct OverlayRecord {
  TimeMs time = 0;
  BundleId bundle = 0;
  std::int64_t added = 0;
  std::int64_t bound = 0;
};

/// Source router with proactive capacity and buffer management: routes on
/// a bundle-local restriction of the shared plan, then books the chosen
/// route permanently in the plan and the forecast tables.
class ProposedRouter {
 public:
  ProposedRouter(ContactPlan cp, BufferTables tables, ProposedConfig cfg = {});

  /// Returns the committed route, or nullopt with no state change.
  std::optional<Route> route_bundle(const Bundle& b, TimeMs now);

  /// Drops contacts that ended by `now` (journaled).
  CommitLog expire(TimeMs now) { return expire_contacts(cp_, now, &journal_); }

  [[nodiscard]] TimeMs retry_time(TimeMs now) const { return now + cfg_.time_step; }

  [[nodiscard]] const ContactPlan& plan() const { return cp_; }
  [[nodiscard]] const BufferTables& tables() const { return tables_; }
  [[nodiscard]] const CommitJournal& journal() const { return journal_; }
  [[nodiscard]] const std::vector<OverlayRecord>& overlays() const { return overlays_; }
  [[nodiscard]] const ProposedConfig& config() const { return cfg_; }

 private:
  ContactPlan cp_;
  BufferTables tables_;
  ProposedConfig cfg_;
  CommitJournal journal_;
  std::vector<OverlayRecord> overlays_;
};

}  // namespace cgr
