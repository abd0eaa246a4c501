#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

namespace sdcps {

struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
  friend std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }
};

inline constexpr NodeId kNoNode{std::numeric_limits<std::uint32_t>::max()};

/// Simulated time in integral ticks; one tick is one millisecond.
struct SimTime {
  std::uint64_t ticks = 0;

  constexpr SimTime() = default;
  constexpr explicit SimTime(std::uint64_t t) : ticks(t) {}

  static constexpr SimTime max() { return SimTime{std::numeric_limits<std::uint64_t>::max()}; }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
  friend constexpr SimTime operator+(SimTime a, std::uint64_t d) { return SimTime{a.ticks + d}; }
  friend std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.ticks; }
};

enum class NodeRole { Global, Super, AreaCoord, Local, Switch, Host };

std::string_view to_string(NodeRole role);
NodeRole node_role_from_string(std::string_view s);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
};

}  // namespace sdcps

template <>
struct std::hash<sdcps::NodeId> {
  std::size_t operator()(sdcps::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
