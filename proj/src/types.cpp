#include "rallyanchor/error.hpp"
#include "rallyanchor/types.hpp"

namespace rallyanchor {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingHeader: return "MissingHeader";
    case ErrorCode::kFrameOutOfRange: return "FrameOutOfRange";
    case ErrorCode::kDuplicateFrame: return "DuplicateFrame";
    case ErrorCode::kMissingCourt: return "MissingCourt";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNoSegments: return "NoSegments";
    case ErrorCode::kDegenerateClusters: return "DegenerateClusters";
    case ErrorCode::kUndefinedAtFrame: return "UndefinedAtFrame";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kDeleted: return "Deleted";
    case ErrorCode::kAlreadyDeleted: return "AlreadyDeleted";
    case ErrorCode::kOutOfRallyBounds: return "OutOfRallyBounds";
    case ErrorCode::kRallyNotFound: return "RallyNotFound";
    case ErrorCode::kUnknownContextType: return "UnknownContextType";
    case ErrorCode::kValueNotInVocabulary: return "ValueNotInVocabulary";
    case ErrorCode::kEventNotFound: return "EventNotFound";
    case ErrorCode::kMatchNotFound: return "MatchNotFound";
    case ErrorCode::kCorruptLog: return "CorruptLog";
    case ErrorCode::kEmptyRule: return "EmptyRule";
  }
  return "Unknown";
}

std::string_view side_name(PlayerSide side) {
  switch (side) {
    case PlayerSide::kA: return "A";
    case PlayerSide::kB: return "B";
    case PlayerSide::kNone: break;
  }
  return "none";
}

std::optional<PlayerSide> parse_side(std::string_view text) {
  if (text == "A" || text == "a") return PlayerSide::kA;
  if (text == "B" || text == "b") return PlayerSide::kB;
  if (text == "none") return PlayerSide::kNone;
  return std::nullopt;
}

std::string_view event_type_name(EventType type) {
  switch (type) {
    case EventType::kHit: return "HIT";
    case EventType::kBounce: return "BOUNCE";
    case EventType::kRally: return "RALLY";
  }
  return "HIT";
}

std::optional<EventType> parse_event_type(std::string_view text) {
  if (text == "HIT" || text == "hit") return EventType::kHit;
  if (text == "BOUNCE" || text == "bounce") return EventType::kBounce;
  if (text == "RALLY" || text == "rally") return EventType::kRally;
  return std::nullopt;
}

}  // namespace rallyanchor
