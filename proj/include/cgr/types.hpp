#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace cgr {

// All times are integer milliseconds since scenario start.
using TimeMs = std::int64_t;
using Bits = std::int64_t;
using RateBps = std::int64_t;
using ContactId = std::int64_t;
using BundleId = std::int64_t;

inline constexpr TimeMs kTimeMax = std::numeric_limits<TimeMs>::max();
inline constexpr TimeMs kTimeMin = std::numeric_limits<TimeMs>::min();

struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// Half-open interval [begin, end).
struct TimeInterval {
  TimeMs begin = 0;
  TimeMs end = 0;

  [[nodiscard]] constexpr bool empty() const { return end <= begin; }
  [[nodiscard]] constexpr bool contains(TimeMs t) const { return begin <= t && t < end; }
  [[nodiscard]] constexpr bool intersects(TimeInterval other) const {
    return begin < other.end && other.begin < end;
  }
  friend constexpr bool operator==(TimeInterval, TimeInterval) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A route no longer fits the plan it is being committed to.
class StaleRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A forecast-table commit would exceed a node's capacity.
class BufferOverflowError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cgr

template <>
struct std::hash<cgr::NodeId> {
  std::size_t operator()(cgr::NodeId n) const noexcept { return std::hash<std::uint32_t>{}(n.value); }
};
