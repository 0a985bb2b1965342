#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cgr/types.hpp"

namespace cgr {

enum class NodeKind { satellite, ground_station };

struct NodeInfo {
  NodeId id;
  std::string name;
  NodeKind kind = NodeKind::satellite;
};

/// One unidirectional transmission opportunity over [t_start, t_end).
struct Contact {
  ContactId id = 0;
  ContactId origin_id = 0;  // id of the unsplit ancestor
  NodeId sender;
  NodeId receiver;
  TimeMs t_start = 0;
  TimeMs t_end = 0;
  RateBps rate = 0;
  bool suppressed = false;

  [[nodiscard]] TimeMs duration() const { return t_end - t_start; }
  [[nodiscard]] TimeInterval interval() const { return {t_start, t_end}; }
};

struct Bundle {
  BundleId id = 0;
  Bits size = 0;
  NodeId source;
  NodeId destination;
  TimeMs t_created = 0;
};

struct Hop {
  ContactId contact = 0;
  ContactId origin = 0;
  NodeId from;
  NodeId to;
  TimeMs tx_start = 0;
  TimeMs tx_end = 0;

  friend bool operator==(const Hop&, const Hop&) = default;
};

struct Route {
  BundleId bundle_id = 0;
  std::vector<Hop> hops;
  TimeMs bdt = kTimeMax;

  /// Source followed by every hop's receiver.
  [[nodiscard]] std::vector<NodeId> nodes() const;
  [[nodiscard]] std::vector<ContactId> contact_ids() const;

  friend bool operator==(const Route&, const Route&) = default;
};

/// Revisioned contact collection plus the node registry it refers to.
///
/// Every mutation (insert, erase) bumps the revision. Node ids are dense
/// indices in registration order; names are what the file format uses.
class ContactPlan {
 public:
  ContactPlan() = default;
  /// Bulk construction; validates every contact and starts at revision 0.
  ContactPlan(const std::vector<NodeInfo>& nodes, const std::vector<Contact>& contacts);

  NodeId add_node(std::string name, NodeKind kind);
  [[nodiscard]] std::optional<NodeId> find_node(std::string_view name) const;
  [[nodiscard]] NodeId node(std::string_view name) const;  // throws std::out_of_range
  [[nodiscard]] const NodeInfo& node_info(NodeId id) const { return nodes_.at(id.value); }
  [[nodiscard]] const std::vector<NodeInfo>& nodes() const { return nodes_; }
  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }

  /// Inserts a contact, validating its invariants. Throws std::invalid_argument.
  void insert(Contact c);
  /// Removes a contact; returns false when the id is unknown.
  bool erase(ContactId id);
  /// Sets the suppressed flag of a contact (a mutation).
  void set_suppressed(ContactId id, bool suppressed);

  [[nodiscard]] const Contact* find(ContactId id) const;
  [[nodiscard]] const Contact& contact(ContactId id) const;  // throws std::out_of_range
  [[nodiscard]] const std::map<ContactId, Contact>& contacts() const { return contacts_; }
  [[nodiscard]] std::size_t size() const { return contacts_.size(); }
  [[nodiscard]] bool empty() const { return contacts_.empty(); }

  [[nodiscard]] std::uint64_t revision() const { return revision_; }
  /// Smallest id never used by this plan; split pieces draw from here.
  [[nodiscard]] ContactId next_contact_id() const { return next_id_; }
  ContactId allocate_contact_id() { return next_id_++; }

 private:
  std::vector<NodeInfo> nodes_;
  std::unordered_map<std::string, NodeId> node_by_name_;
  std::map<ContactId, Contact> contacts_;
  std::uint64_t revision_ = 0;
  ContactId next_id_ = 0;
};

/// Parses the line-oriented plan format:
///   node <name> <sat|gs>
///   contact <id> <sender> <receiver> <t_start_ms> <t_end_ms> <rate_bps> [origin_id]
/// '#' starts a comment. Nodes referenced before declaration are registered
/// as satellites.
[[nodiscard]] ContactPlan parse_contact_plan(std::string_view text);
[[nodiscard]] std::string serialize_contact_plan(const ContactPlan& cp);
[[nodiscard]] ContactPlan load_contact_plan(const std::filesystem::path& path);
void save_contact_plan(const ContactPlan& cp, const std::filesystem::path& path);

/// (t_end - t_start) * rate / 1000, floored to whole bits.
[[nodiscard]] Bits contact_volume(const Contact& c);

/// Erases [erase_from, erase_to) from a contact, replacing it by the
/// remaining pieces (fresh ids, same origin). Pieces whose volume is below
/// `min_piece_volume` are dropped. Returns the new ids (0, 1 or 2).
std::vector<ContactId> split_contact(ContactPlan& cp, ContactId id, TimeMs erase_from, TimeMs erase_to,
                                     Bits min_piece_volume = 0);

/// Removes every contact with t_end <= now.
std::size_t remove_expired(ContactPlan& cp, TimeMs now);

enum class MarginPolicy { tail_of_each_contact };

struct MarginPartition {
  ContactPlan source;
  ContactPlan margin;
};

/// Withholds `margin_fraction` of every contact for forwarding-time use.
[[nodiscard]] MarginPartition partition_safety_margin(const ContactPlan& cp, double margin_fraction,
                                                      MarginPolicy policy = MarginPolicy::tail_of_each_contact);

/// Copy of `cp` with every contact rate replaced.
[[nodiscard]] ContactPlan with_uniform_rate(const ContactPlan& cp, RateBps rate);

}  // namespace cgr
