#include "cgr/contact_plan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace cgr {

std::vector<NodeId> Route::nodes() const {
  std::vector<NodeId> out;
  if (hops.empty()) return out;
  out.reserve(hops.size() + 1);
  out.push_back(hops.front().from);
  for (const auto& h : hops) out.push_back(h.to);
  return out;
}

std::vector<ContactId> Route::contact_ids() const {
  std::vector<ContactId> out;
  out.reserve(hops.size());
  for (const auto& h : hops) out.push_back(h.contact);
  return out;
}

ContactPlan::ContactPlan(const std::vector<NodeInfo>& nodes, const std::vector<Contact>& contacts) {
  for (const auto& n : nodes) add_node(n.name, n.kind);
  for (const auto& c : contacts) insert(c);
  revision_ = 0;
}

NodeId ContactPlan::add_node(std::string name, NodeKind kind) {
  if (name.empty()) throw std::invalid_argument("empty node name");
  if (node_by_name_.contains(name)) throw std::invalid_argument("duplicate node '" + name + "'");
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  node_by_name_.emplace(name, id);
  nodes_.push_back(NodeInfo{id, std::move(name), kind});
  return id;
}

std::optional<NodeId> ContactPlan::find_node(std::string_view name) const {
  auto it = node_by_name_.find(std::string(name));
  if (it == node_by_name_.end()) return std::nullopt;
  return it->second;
}

NodeId ContactPlan::node(std::string_view name) const {
  if (auto n = find_node(name)) return *n;
  throw std::out_of_range("unknown node '" + std::string(name) + "'");
}

void ContactPlan::insert(Contact c) {
  if (c.t_start >= c.t_end) throw std::invalid_argument(fmt::format("contact {}: t_start >= t_end", c.id));
  if (c.rate <= 0) throw std::invalid_argument(fmt::format("contact {}: rate must be positive", c.id));
  if (c.sender == c.receiver) throw std::invalid_argument(fmt::format("contact {}: sender == receiver", c.id));
  if (c.sender.value >= nodes_.size() || c.receiver.value >= nodes_.size())
    throw std::invalid_argument(fmt::format("contact {}: unknown node", c.id));
  if (c.id < 0) throw std::invalid_argument("negative contact id");
  if (contacts_.contains(c.id)) throw std::invalid_argument(fmt::format("duplicate contact id {}", c.id));
  next_id_ = std::max(next_id_, c.id + 1);
  contacts_.emplace(c.id, c);
  ++revision_;
}

bool ContactPlan::erase(ContactId id) {
  if (contacts_.erase(id) == 0) return false;
  ++revision_;
  return true;
}

void ContactPlan::set_suppressed(ContactId id, bool suppressed) {
  auto it = contacts_.find(id);
  if (it == contacts_.end()) throw std::out_of_range(fmt::format("unknown contact {}", id));
  it->second.suppressed = suppressed;
  ++revision_;
}

const Contact* ContactPlan::find(ContactId id) const {
  auto it = contacts_.find(id);
  return it == contacts_.end() ? nullptr : &it->second;
}

const Contact& ContactPlan::contact(ContactId id) const {
  if (const auto* c = find(id)) return *c;
  throw std::out_of_range(fmt::format("unknown contact {}", id));
}

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::int64_t parse_int(std::string_view token, std::size_t line, const char* field) {
  std::int64_t value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError(line, fmt::format("invalid {} '{}'", field, token));
  return value;
}

struct PendingNode {
  std::string name;
  NodeKind kind = NodeKind::satellite;
  bool declared = false;
};

struct PendingContact {
  Contact contact;
  std::size_t sender = 0;
  std::size_t receiver = 0;
};

}  // namespace

ContactPlan parse_contact_plan(std::string_view text) {
  std::vector<PendingNode> nodes;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<PendingContact> contacts;
  std::unordered_map<ContactId, std::size_t> seen_ids;

  auto node_index = [&](std::string_view name) {
    auto [it, inserted] = index.emplace(std::string(name), nodes.size());
    if (inserted) nodes.push_back(PendingNode{std::string(name)});
    return it->second;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = tokenize(line);
    if (tok.empty()) continue;

    if (tok[0] == "node") {
      if (tok.size() != 3) throw ParseError(line_no, "expected: node <id> <sat|gs>");
      NodeKind kind;
      if (tok[2] == "sat") {
        kind = NodeKind::satellite;
      } else if (tok[2] == "gs") {
        kind = NodeKind::ground_station;
      } else {
        throw ParseError(line_no, fmt::format("unknown node kind '{}'", tok[2]));
      }
      auto& n = nodes[node_index(tok[1])];
      if (n.declared) throw ParseError(line_no, fmt::format("node '{}' declared twice", tok[1]));
      n.kind = kind;
      n.declared = true;
    } else if (tok[0] == "contact") {
      if (tok.size() != 7 && tok.size() != 8)
        throw ParseError(line_no, "expected: contact <id> <sender> <receiver> <t_start> <t_end> <rate> [origin]");
      PendingContact p;
      Contact& c = p.contact;
      c.id = parse_int(tok[1], line_no, "contact id");
      c.t_start = parse_int(tok[4], line_no, "t_start");
      c.t_end = parse_int(tok[5], line_no, "t_end");
      c.rate = parse_int(tok[6], line_no, "rate");
      c.origin_id = tok.size() == 8 ? parse_int(tok[7], line_no, "origin id") : c.id;
      if (c.id < 0) throw ParseError(line_no, "negative contact id");
      if (c.t_start >= c.t_end) throw ParseError(line_no, "t_start must be < t_end");
      if (c.rate <= 0) throw ParseError(line_no, "rate must be positive");
      if (tok[2] == tok[3]) throw ParseError(line_no, "sender equals receiver");
      if (!seen_ids.emplace(c.id, line_no).second)
        throw ParseError(line_no, fmt::format("duplicate contact id {}", c.id));
      p.sender = node_index(tok[2]);
      p.receiver = node_index(tok[3]);
      contacts.push_back(p);
    } else {
      throw ParseError(line_no, fmt::format("unknown record '{}'", tok[0]));
    }
  }

  std::vector<NodeInfo> infos;
  infos.reserve(nodes.size());
  for (auto& n : nodes) infos.push_back(NodeInfo{NodeId{static_cast<std::uint32_t>(infos.size())}, std::move(n.name), n.kind});
  std::vector<Contact> records;
  records.reserve(contacts.size());
  for (auto& p : contacts) {
    p.contact.sender = NodeId{static_cast<std::uint32_t>(p.sender)};
    p.contact.receiver = NodeId{static_cast<std::uint32_t>(p.receiver)};
    records.push_back(p.contact);
  }
  return ContactPlan(infos, records);
}

std::string serialize_contact_plan(const ContactPlan& cp) {
  std::string out;
  for (const auto& n : cp.nodes())
    out += fmt::format("node {} {}\n", n.name, n.kind == NodeKind::ground_station ? "gs" : "sat");
  std::vector<const Contact*> sorted;
  sorted.reserve(cp.size());
  for (const auto& [id, c] : cp.contacts()) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const Contact* a, const Contact* b) {
    return std::tie(a->t_start, a->id) < std::tie(b->t_start, b->id);
  });
  for (const Contact* c : sorted) {
    out += fmt::format("contact {} {} {} {} {} {}", c->id, cp.node_info(c->sender).name,
                       cp.node_info(c->receiver).name, c->t_start, c->t_end, c->rate);
    if (c->origin_id != c->id) out += fmt::format(" {}", c->origin_id);
    out += '\n';
  }
  return out;
}

ContactPlan load_contact_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_contact_plan(ss.str());
}

void save_contact_plan(const ContactPlan& cp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_contact_plan(cp);
}

Bits contact_volume(const Contact& c) {
  // bit-milliseconds, then floor to bits
  return (c.duration() * c.rate) / 1000;
}

std::vector<ContactId> split_contact(ContactPlan& cp, ContactId id, TimeMs erase_from, TimeMs erase_to,
                                     Bits min_piece_volume) {
  const Contact* found = cp.find(id);
  if (found == nullptr) throw std::out_of_range(fmt::format("split: unknown contact {}", id));
  const Contact original = *found;
  if (!(original.t_start <= erase_from && erase_from <= erase_to && erase_to <= original.t_end))
    throw std::invalid_argument(fmt::format("split: erase [{}, {}) outside contact {} [{}, {})", erase_from,
                                            erase_to, id, original.t_start, original.t_end));
  cp.erase(id);
  std::vector<ContactId> created;
  for (TimeInterval piece : {TimeInterval{original.t_start, erase_from}, TimeInterval{erase_to, original.t_end}}) {
    if (piece.empty()) continue;
    Contact c = original;
    c.t_start = piece.begin;
    c.t_end = piece.end;
    if (contact_volume(c) < min_piece_volume) continue;
    c.id = cp.allocate_contact_id();
    cp.insert(c);
    created.push_back(c.id);
  }
  return created;
}

std::size_t remove_expired(ContactPlan& cp, TimeMs now) {
  std::vector<ContactId> expired;
  for (const auto& [id, c] : cp.contacts())
    if (c.t_end <= now) expired.push_back(id);
  for (ContactId id : expired) cp.erase(id);
  return expired.size();
}

MarginPartition partition_safety_margin(const ContactPlan& cp, double margin_fraction, MarginPolicy policy) {
  if (!(margin_fraction >= 0.0 && margin_fraction <= 1.0))
    throw std::invalid_argument("margin fraction must lie in [0, 1]");
  std::vector<Contact> source;
  std::vector<Contact> margin;
  switch (policy) {
    case MarginPolicy::tail_of_each_contact:
      for (const auto& [id, c] : cp.contacts()) {
        const auto reserved = static_cast<TimeMs>(std::floor(static_cast<double>(c.duration()) * margin_fraction));
        const TimeMs cut = c.t_end - reserved;
        if (cut > c.t_start) {
          Contact head = c;
          head.t_end = cut;
          source.push_back(head);
        }
        if (cut < c.t_end) {
          Contact tail = c;
          tail.t_start = cut;
          margin.push_back(tail);
        }
      }
      break;
  }
  return MarginPartition{ContactPlan(cp.nodes(), source), ContactPlan(cp.nodes(), margin)};
}

ContactPlan with_uniform_rate(const ContactPlan& cp, RateBps rate) {
  std::vector<Contact> contacts;
  contacts.reserve(cp.size());
  for (auto [id, c] : cp.contacts()) {
    c.rate = rate;
    contacts.push_back(c);
  }
  return ContactPlan(cp.nodes(), contacts);
}

}  // namespace cgr
