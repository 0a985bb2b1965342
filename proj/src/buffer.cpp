#include "cgr/buffer.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace cgr {

Bits StepFunction::at(TimeMs t) const {
  auto it = values_.upper_bound(t);
  if (it == values_.begin()) return 0;
  return std::prev(it)->second;
}

void StepFunction::coalesce(std::map<TimeMs, Bits>::iterator it) {
  const Bits before = it == values_.begin() ? 0 : std::prev(it)->second;
  if (it->second == before) values_.erase(it);
}

void StepFunction::add(TimeInterval iv, Bits amount) {
  if (iv.empty() || amount == 0) return;
  // make sure both edges are breakpoints
  values_.try_emplace(iv.end, at(iv.end));
  auto first = values_.try_emplace(iv.begin, at(iv.begin)).first;
  auto last = values_.find(iv.end);
  for (auto it = first; it != last; ++it) {
    it->second += amount;
    if (it->second < 0) throw std::logic_error("StepFunction: negative value");
  }
  coalesce(last);
  coalesce(values_.find(iv.begin));
}

Bits StepFunction::max_over(TimeInterval iv) const {
  if (iv.empty()) return 0;
  Bits m = at(iv.begin);
  for (auto it = values_.upper_bound(iv.begin); it != values_.end() && it->first < iv.end; ++it)
    m = std::max(m, it->second);
  return m;
}

BufferTables::BufferTables(std::size_t node_count, std::optional<Bits> capacity) {
  tables_.reserve(node_count);
  for (std::uint32_t i = 0; i < node_count; ++i) tables_.push_back({NodeId{i}, capacity, {}});
}

void BufferTables::set_capacity(NodeId node, std::optional<Bits> capacity) { tables_.at(node.value).capacity = capacity; }

OverflowSet detect_overflows(const BufferTables& tables, const Bundle& bundle) {
  OverflowSet out;
  for (const auto& t : tables.tables()) {
    if (!t.capacity || t.node == bundle.destination || t.node == bundle.source) continue;
    const Bits cap = *t.capacity;
    if (bundle.size > cap) {
      out[t.node].push_back({kTimeMin, kTimeMax});
      continue;
    }
    std::vector<TimeInterval> v;
    const auto& bp = t.occupancy.breakpoints();
    for (auto it = bp.begin(); it != bp.end(); ++it) {
      if (it->second + bundle.size <= cap) continue;
      const TimeMs end = std::next(it) == bp.end() ? kTimeMax : std::next(it)->first;
      if (!v.empty() && v.back().end == it->first)
        v.back().end = end;
      else
        v.push_back({it->first, end});
    }
    if (!v.empty()) out[t.node] = std::move(v);
  }
  return out;
}

ContactId RestrictedPlan::permanent(ContactId overlay_id) const {
  auto it = permanent_of.find(overlay_id);
  return it == permanent_of.end() ? overlay_id : it->second;
}

RestrictedPlan restrict_cp_for_overflows(const ContactPlan& cp, const OverflowSet& overflows) {
  RestrictedPlan r;
  r.overlay = cp;
  if (overflows.empty()) return r;
  for (const auto& [id, c] : cp.contacts()) {
    auto of = overflows.find(c.receiver);
    if (of == overflows.end()) continue;
    ContactId current = id;  // piece still covering the rest of the contact
    for (const TimeInterval& o : of->second) {
      if (!c.interval().intersects(o)) continue;
      ++r.bound;
      const Contact* piece = r.overlay.find(current);
      if (piece == nullptr || !piece->interval().intersects(o)) continue;
      const TimeMs from = std::max(piece->t_start, o.begin);
      const TimeMs to = std::min(piece->t_end, o.end);
      auto pieces = split_contact(r.overlay, current, from, to);
      if (pieces.size() > 1) r.added += static_cast<std::int64_t>(pieces.size()) - 1;
      for (ContactId p : pieces) r.permanent_of[p] = id;
      // later overflows can only meet the last piece
      if (pieces.empty()) break;
      current = pieces.back();
    }
  }
  return r;
}

PruneSchedule prune_schedule(const OverflowSet& overflows) {
  PruneSchedule s;
  for (const auto& [node, v] : overflows)
    for (const auto& o : v) s.add(node, o);
  return s;
}

std::vector<std::pair<NodeId, TimeInterval>> residences(const Route& route) {
  std::vector<std::pair<NodeId, TimeInterval>> out;
  for (std::size_t k = 0; k + 1 < route.hops.size(); ++k)
    out.push_back({route.hops[k].to, {route.hops[k].tx_end, route.hops[k + 1].tx_start}});
  return out;
}

void commit_route_buffer(BufferTables& tables, const Route& route, const Bundle& bundle) {
  const auto res = residences(route);
  for (const auto& [node, iv] : res) {
    const auto& t = tables.table(node);
    if (!t.capacity || iv.empty()) continue;
    const Bits peak = t.occupancy.max_over(iv) + bundle.size;
    if (peak > *t.capacity)
      throw BufferOverflowError(fmt::format("bundle {} would raise node {} to {} bits over [{}, {}), capacity {}",
                                            bundle.id, node.value, peak, iv.begin, iv.end, *t.capacity));
  }
  for (const auto& [node, iv] : res) tables.table(node).occupancy.add(iv, bundle.size);
}

Bits occupancy_at(const ForecastBufferTable& table, TimeMs t) { return table.occupancy.at(t); }

std::string buffer_table_csv(const ForecastBufferTable& table) {
  std::string out = "t_ms,occupancy_bits\n";
  for (const auto& [t, v] : table.occupancy.breakpoints()) out += fmt::format("{},{}\n", t, v);
  return out;
}

}  // namespace cgr
