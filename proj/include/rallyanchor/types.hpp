#pragma once

#include <cmath>
#include <optional>
#include <string_view>

namespace rallyanchor {

// Image-space point in pixels; origin top-left, y grows downward.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Side A is left of the net line, side B right of it.
enum class PlayerSide { kNone, kA, kB };

std::string_view side_name(PlayerSide side);
std::optional<PlayerSide> parse_side(std::string_view text);

inline PlayerSide opponent(PlayerSide side) {
  switch (side) {
    case PlayerSide::kA: return PlayerSide::kB;
    case PlayerSide::kB: return PlayerSide::kA;
    default: return PlayerSide::kNone;
  }
}

enum class EventType { kHit, kBounce, kRally };

std::string_view event_type_name(EventType type);
std::optional<EventType> parse_event_type(std::string_view text);

}  // namespace rallyanchor
