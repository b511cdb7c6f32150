#include "rallyanchor/codec.hpp"

#include "rallyanchor/error.hpp"

namespace rallyanchor {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

PlayerSide side_from(const Json& j) {
  auto side = parse_side(j.get<std::string>());
  if (!side) bad("bad player side '" + j.get<std::string>() + "'");
  return *side;
}

EventType type_from(const Json& j) {
  auto type = parse_event_type(j.get<std::string>());
  if (!type) bad("bad event type '" + j.get<std::string>() + "'");
  return *type;
}

AnchorStatus status_from(const std::string& s) {
  if (s == "UNCALIBRATED") return AnchorStatus::kUncalibrated;
  if (s == "CALIBRATED") return AnchorStatus::kCalibrated;
  if (s == "DELETED") return AnchorStatus::kDeleted;
  bad("bad anchor status '" + s + "'");
}

AnchorOrigin origin_from(const std::string& s) {
  if (s == "DETECTED") return AnchorOrigin::kDetected;
  if (s == "USER_ADDED") return AnchorOrigin::kUserAdded;
  bad("bad anchor origin '" + s + "'");
}

}  // namespace

Json to_json(const RallySpan& r) {
  return Json{{"rally_id", r.rally_id},
              {"game_index", r.game_index},
              {"frame_start", r.frame_start},
              {"frame_end", r.frame_end},
              {"server", side_name(r.server)},
              {"winner", side_name(r.winner)},
              {"score_a", r.score_a},
              {"score_b", r.score_b}};
}

RallySpan rally_from_json(const Json& j) {
  RallySpan r;
  r.rally_id = j.at("rally_id").get<std::string>();
  r.game_index = j.at("game_index").get<int>();
  r.frame_start = j.at("frame_start").get<int>();
  r.frame_end = j.at("frame_end").get<int>();
  r.server = side_from(j.at("server"));
  r.winner = side_from(j.at("winner"));
  r.score_a = j.at("score_a").get<int>();
  r.score_b = j.at("score_b").get<int>();
  return r;
}

Json to_json(const EventAnchor& a) {
  Json j{{"anchor_id", a.anchor_id},
         {"rally_id", a.rally_id},
         {"event_type", event_type_name(a.event_type)},
         {"frame_start", a.frame_start},
         {"frame_end", a.frame_end},
         {"status", status_name(a.status)},
         {"origin", origin_name(a.origin)}};
  if (a.position) {
    j["x"] = a.position->x;
    j["y"] = a.position->y;
  }
  return j;
}

EventAnchor anchor_from_json(const Json& j) {
  EventAnchor a;
  a.anchor_id = j.at("anchor_id").get<std::string>();
  a.rally_id = j.at("rally_id").get<std::string>();
  a.event_type = type_from(j.at("event_type"));
  a.frame_start = j.at("frame_start").get<int>();
  a.frame_end = j.at("frame_end").get<int>();
  if (j.contains("x") && j.contains("y")) {
    a.position = Point2{j.at("x").get<double>(), j.at("y").get<double>()};
  }
  a.status = status_from(j.at("status").get<std::string>());
  a.origin = origin_from(j.at("origin").get<std::string>());
  return a;
}

Json to_json(const ContextAnnotation& a) {
  return Json{{"annotation_id", a.annotation_id}, {"context_type", a.context_type},
              {"event_id", a.event_id},           {"value", a.value},
              {"author", a.author},               {"timestamp", a.timestamp}};
}

ContextAnnotation annotation_from_json(const Json& j) {
  ContextAnnotation a;
  a.annotation_id = j.at("annotation_id").get<std::string>();
  a.context_type = j.at("context_type").get<std::string>();
  a.event_id = j.at("event_id").get<std::string>();
  a.value = j.at("value").get<std::string>();
  a.author = j.at("author").get<std::string>();
  a.timestamp = j.at("timestamp").get<std::int64_t>();
  return a;
}

Json to_json(const MatchInfo& info) {
  return Json{{"match_id", info.match_id},     {"frame_count", info.meta.frame_count},
              {"fps", info.meta.fps},          {"width", info.meta.width},
              {"height", info.meta.height},    {"video_url", info.meta.video_url}};
}

MatchInfo match_info_from_json(const Json& j) {
  MatchInfo info;
  info.match_id = j.at("match_id").get<std::string>();
  info.meta.frame_count = j.at("frame_count").get<int>();
  info.meta.fps = j.at("fps").get<double>();
  info.meta.width = j.at("width").get<int>();
  info.meta.height = j.at("height").get<int>();
  info.meta.video_url = j.value("video_url", std::string());
  return info;
}

Json to_json(const MutationRecord& record) {
  Json payload = std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CalibratePayload>) {
          return Json{{"anchor_id", p.anchor_id}, {"delta", p.delta}};
        } else if constexpr (std::is_same_v<T, AddPayload>) {
          Json j{{"rally_id", p.rally_id}, {"frame", p.frame}, {"event_type", event_type_name(p.event_type)}};
          if (p.position) {
            j["x"] = p.position->x;
            j["y"] = p.position->y;
          }
          return j;
        } else if constexpr (std::is_same_v<T, DeletePayload>) {
          return Json{{"anchor_id", p.anchor_id}};
        } else {
          return Json{{"event_id", p.event_id},
                      {"context_type", p.context_type},
                      {"value", p.value},
                      {"author", p.author}};
        }
      },
      record.payload);
  return Json{{"seq", record.sequence},
              {"op", mutation_kind_name(record.kind())},
              {"payload", std::move(payload)},
              {"ts", record.timestamp}};
}

MutationRecord mutation_from_json(const Json& j) {
  MutationRecord r;
  r.sequence = j.at("seq").get<std::uint64_t>();
  r.timestamp = j.at("ts").get<std::int64_t>();
  const std::string op = j.at("op").get<std::string>();
  const Json& p = j.at("payload");
  if (op == "calibrate") {
    r.payload = CalibratePayload{p.at("anchor_id").get<std::string>(), p.at("delta").get<int>()};
  } else if (op == "add") {
    AddPayload add;
    add.rally_id = p.at("rally_id").get<std::string>();
    add.frame = p.at("frame").get<int>();
    add.event_type = type_from(p.at("event_type"));
    if (p.contains("x") && p.contains("y")) add.position = Point2{p.at("x").get<double>(), p.at("y").get<double>()};
    r.payload = add;
  } else if (op == "delete") {
    r.payload = DeletePayload{p.at("anchor_id").get<std::string>()};
  } else if (op == "annotate") {
    r.payload = AnnotatePayload{p.at("event_id").get<std::string>(), p.at("context_type").get<std::string>(),
                                p.at("value").get<std::string>(), p.value("author", std::string("anonymous"))};
  } else {
    bad("unknown mutation op '" + op + "'");
  }
  return r;
}

Json to_json(const QueryRule& rule) {
  Json j = Json::object();
  if (rule.server) j["server"] = side_name(*rule.server);
  if (rule.winner) j["winner"] = side_name(*rule.winner);
  if (rule.min_strokes) j["min_strokes"] = *rule.min_strokes;
  if (!rule.context.empty()) {
    Json preds = Json::array();
    for (const auto& [type, value] : rule.context) preds.push_back({{"context_type", type}, {"value", value}});
    j["context"] = std::move(preds);
  }
  return j;
}

QueryRule query_rule_from_json(const Json& j) {
  if (!j.is_object()) bad("query rule must be an object");
  QueryRule rule;
  if (j.contains("server")) rule.server = side_from(j.at("server"));
  if (j.contains("winner")) rule.winner = side_from(j.at("winner"));
  if (j.contains("min_strokes")) rule.min_strokes = j.at("min_strokes").get<int>();
  if (j.contains("context")) {
    for (const auto& p : j.at("context")) {
      rule.context.emplace_back(p.at("context_type").get<std::string>(), p.at("value").get<std::string>());
    }
  }
  return rule;
}

Json to_json(const RawEvent& e) {
  return Json{{"type", event_type_name(e.type)}, {"frame", e.frame}, {"x", e.x}, {"y", e.y},
              {"side", side_name(e.side)},       {"confidence", e.confidence}};
}

}  // namespace rallyanchor
