#pragma once

#include <span>
#include <string>
#include <vector>

#include "cgr/contact_plan.hpp"

namespace cgr {

/// ceil(size * 1000 / rate) milliseconds. Throws std::invalid_argument if rate <= 0.
[[nodiscard]] TimeMs transmission_time(Bits size, RateBps rate);

enum class MutationKind { split, expiry };

/// One permanent change to the shared plan.
struct JournalEntry {
  TimeMs time = 0;
  MutationKind kind = MutationKind::split;
  BundleId bundle = -1;  // split only
  ContactId contact = -1;
  std::int64_t added = 0;    // contacts added to the plan size
  std::int64_t removed = 0;  // contacts removed from the plan size
  std::int64_t cp_size_after = 0;
};

/// Append-only log of plan mutations. Replaying it reconstructs the size
/// timeline independently of the plan itself.
class CommitJournal {
 public:
  void append(JournalEntry e) { entries_.push_back(e); }
  [[nodiscard]] const std::vector<JournalEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

 private:
  std::vector<JournalEntry> entries_;
};

/// Counters over a time window; net = added - removed.
struct CommitLog {
  std::int64_t added = 0;
  std::int64_t removed = 0;
  std::int64_t hops = 0;     // sum of route lengths committed (growth bound)
  std::int64_t bundles = 0;

  [[nodiscard]] std::int64_t net() const { return added - removed; }
  CommitLog& operator+=(const CommitLog& o) {
    added += o.added;
    removed += o.removed;
    hops += o.hops;
    bundles += o.bundles;
    return *this;
  }
};

/// Erases every hop's [tx_start, tx_end) from its contact. All hops are
/// validated before anything is modified; a hop that does not fit its
/// contact throws StaleRouteError and leaves the plan untouched.
CommitLog commit_route_capacity(ContactPlan& cp, const Route& route, TimeMs now, Bits min_piece_volume = 0,
                                CommitJournal* journal = nullptr);

/// remove_expired plus a journal entry when anything expired.
CommitLog expire_contacts(ContactPlan& cp, TimeMs now, CommitJournal* journal = nullptr);

/// Aggregates journal entries with time in [from, to).
[[nodiscard]] CommitLog cp_growth_stats(const CommitJournal& journal, TimeMs from, TimeMs to);

struct CpSizeSample {
  TimeMs t = 0;
  std::int64_t size = 0;
  double normalized = 0.0;
};

/// Size of `initial` at each step when contacts only ever expire.
[[nodiscard]] std::vector<CpSizeSample> baseline_cp_size_timeline(const ContactPlan& initial, TimeMs from,
                                                                  TimeMs to, TimeMs step);

/// `t_ms,cp_size,cp_size_normalized`
[[nodiscard]] std::string cp_size_csv(std::span<const CpSizeSample> samples);

}  // namespace cgr
