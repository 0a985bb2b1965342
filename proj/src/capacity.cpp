#include "cgr/capacity.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace cgr {

TimeMs transmission_time(Bits size, RateBps rate) {
  if (rate <= 0) throw std::invalid_argument("transmission_time: rate must be positive");
  if (size <= 0) return 0;
  return (size * 1000 + rate - 1) / rate;
}

CommitLog commit_route_capacity(ContactPlan& cp, const Route& route, TimeMs now, Bits min_piece_volume,
                                CommitJournal* journal) {
  for (const Hop& h : route.hops) {
    const Contact* c = cp.find(h.contact);
    if (c == nullptr) throw StaleRouteError(fmt::format("contact {} no longer in plan", h.contact));
    if (h.tx_start < c->t_start || h.tx_end > c->t_end || h.tx_start > h.tx_end)
      throw StaleRouteError(fmt::format("hop [{}, {}) outside contact {} [{}, {})", h.tx_start, h.tx_end, c->id,
                                        c->t_start, c->t_end));
  }
  CommitLog log;
  log.bundles = 1;
  for (const Hop& h : route.hops) {
    const auto pieces = static_cast<std::int64_t>(split_contact(cp, h.contact, h.tx_start, h.tx_end, min_piece_volume).size());
    JournalEntry e;
    e.time = now;
    e.kind = MutationKind::split;
    e.bundle = route.bundle_id;
    e.contact = h.contact;
    e.added = pieces > 1 ? pieces - 1 : 0;
    e.removed = pieces == 0 ? 1 : 0;
    e.cp_size_after = static_cast<std::int64_t>(cp.size());
    log.added += e.added;
    log.removed += e.removed;
    ++log.hops;
    if (journal != nullptr) journal->append(e);
  }
  return log;
}

CommitLog expire_contacts(ContactPlan& cp, TimeMs now, CommitJournal* journal) {
  CommitLog log;
  log.removed = static_cast<std::int64_t>(remove_expired(cp, now));
  if (log.removed > 0 && journal != nullptr)
    journal->append(JournalEntry{now, MutationKind::expiry, -1, -1, 0, log.removed, static_cast<std::int64_t>(cp.size())});
  return log;
}

CommitLog cp_growth_stats(const CommitJournal& journal, TimeMs from, TimeMs to) {
  CommitLog log;
  BundleId last_bundle = -1;
  for (const auto& e : journal.entries()) {
    if (e.time < from || e.time >= to) continue;
    log.added += e.added;
    log.removed += e.removed;
    if (e.kind == MutationKind::split) {
      ++log.hops;
      if (e.bundle != last_bundle) ++log.bundles;
      last_bundle = e.bundle;
    }
  }
  return log;
}

std::vector<CpSizeSample> baseline_cp_size_timeline(const ContactPlan& initial, TimeMs from, TimeMs to, TimeMs step) {
  std::vector<TimeMs> ends;
  ends.reserve(initial.size());
  for (const auto& [id, c] : initial.contacts()) ends.push_back(c.t_end);
  std::sort(ends.begin(), ends.end());
  const double norm = initial.empty() ? 1.0 : static_cast<double>(initial.size());
  std::vector<CpSizeSample> out;
  for (TimeMs t = from; t <= to; t += step) {
    const auto expired = std::upper_bound(ends.begin(), ends.end(), t) - ends.begin();
    const auto size = static_cast<std::int64_t>(ends.size()) - expired;
    out.push_back({t, size, static_cast<double>(size) / norm});
  }
  return out;
}

std::string cp_size_csv(std::span<const CpSizeSample> samples) {
  std::string out = "t_ms,cp_size,cp_size_normalized\n";
  for (const auto& s : samples) out += fmt::format("{},{},{:.6f}\n", s.t, s.size, s.normalized);
  return out;
}

}  // namespace cgr
