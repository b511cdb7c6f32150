#include "rallyanchor/server.hpp"

#include <httplib.h>

#include "rallyanchor/codec.hpp"
#include "rallyanchor/error.hpp"
#include "rallyanchor/pipeline.hpp"

namespace rallyanchor {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kRallyNotFound:
    case ErrorCode::kEventNotFound:
    case ErrorCode::kMatchNotFound:
      return 404;
    case ErrorCode::kDeleted:
    case ErrorCode::kAlreadyDeleted:
      return 409;
    case ErrorCode::kCorruptLog:
      return 500;
    default:
      return 400;
  }
}

ApiResponse reply(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse failure(int status, std::string_view code, const std::string& message) {
  return reply(status, {{"error", {{"code", code}, {"message", message}}}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string::npos) next = path.size();
    if (next > pos) parts.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

Json parse_body(const std::string& body) {
  Json j = Json::parse(body.empty() ? std::string("{}") : body);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return j;
}

Json rally_json(const MatchState& state, const RallySpan& r) {
  Json j = to_json(r);
  j["strokes"] = stroke_count(state, r.rally_id);
  return j;
}

Json match_json(const MatchState& state) {
  Json j = to_json(state.info);
  j["last_sequence"] = state.last_sequence;
  j["rally_count"] = state.rallies.size();
  return j;
}

Json window_json(const SlowdownWindow& w) {
  return {{"frame_from", w.frame_from},
          {"frame_to", w.frame_to},
          {"rate", w.rate},
          {"pause_at", w.pause_at},
          {"anchor_ids", w.anchor_ids}};
}

}  // namespace

ApiResponse Api::handle(const ApiRequest& req) {
  const auto parts = split_path(req.path);
  const std::string& m = req.method;
  const std::size_t n = parts.size();
  auto query = [&](const std::string& key) -> std::optional<std::string> {
    auto it = req.query.find(key);
    if (it == req.query.end()) return std::nullopt;
    return it->second;
  };
  bool path_known = false;
  auto route = [&](std::string_view method, std::size_t size, std::string_view head,
                   std::string_view tail = {}) {
    if (n != size || parts[0] != head) return false;
    if (!tail.empty() && parts[n - 1] != tail) return false;
    path_known = true;
    return m == method;
  };

  try {
    if (route("GET", 1, "matches")) {
      Json list = Json::array();
      for (const auto& id : store_.match_ids()) list.push_back(match_json(*store_.match(id).snapshot()));
      return reply(200, {{"matches", list}});
    }
    if (route("GET", 2, "matches")) {
      return reply(200, {{"match", match_json(*store_.match(parts[1]).snapshot())}});
    }
    if (route("GET", 3, "matches", "rallies")) {
      const auto state = store_.match(parts[1]).snapshot();
      Json list = Json::array();
      for (const auto& r : state->rallies) list.push_back(rally_json(*state, r));
      return reply(200, {{"rallies", list}});
    }
    if (route("POST", 3, "matches", "query")) {
      Json body = parse_body(req.body);
      const QueryRule rule = query_rule_from_json(body.contains("rule") ? body.at("rule") : body);
      const auto state = store_.match(parts[1]).snapshot();
      Json list = Json::array();
      for (const auto& r : query_rallies(*state, rule)) list.push_back(rally_json(*state, r));
      return reply(200, {{"rallies", list}});
    }
    if (route("GET", 3, "matches", "log")) {
      Json list = Json::array();
      for (const auto& r : store_.match(parts[1]).log()) list.push_back(to_json(r));
      return reply(200, {{"log", list}});
    }
    if (route("GET", 3, "rallies", "anchors")) {
      const auto state = store_.match_for_rally(parts[1]).snapshot();
      const bool include_deleted = query("include_deleted").value_or("false") == "true";
      Json list = Json::array();
      for (const auto& a : list_anchors(*state, parts[1], include_deleted)) list.push_back(to_json(a));
      return reply(200, {{"anchors", list}});
    }
    if (route("POST", 3, "rallies", "anchors")) {
      const Json body = parse_body(req.body);
      const auto type = parse_event_type(body.at("type").get<std::string>());
      if (!type) throw Error(ErrorCode::kInvalidArgument, "type must be HIT or BOUNCE");
      std::optional<Point2> position;
      if (body.contains("x") && body.contains("y")) position = Point2{body.at("x").get<double>(), body.at("y").get<double>()};
      const EventAnchor a = store_.add_anchor(parts[1], body.at("frame").get<int>(), *type, position);
      return reply(201, {{"anchor", to_json(a)}});
    }
    if (route("GET", 3, "rallies", "playback-hints")) {
      const auto state = store_.match_for_rally(parts[1]).snapshot();
      Json list = Json::array();
      for (const auto& w : playback_hints(*state, parts[1], playback_)) list.push_back(window_json(w));
      return reply(200, {{"windows", list}});
    }
    if (route("POST", 3, "anchors", "calibrate")) {
      const Json body = parse_body(req.body);
      return reply(200, {{"anchor", to_json(store_.calibrate(parts[1], body.at("delta").get<int>()))}});
    }
    if (route("DELETE", 2, "anchors")) {
      return reply(200, {{"anchor", to_json(store_.delete_anchor(parts[1]))}});
    }
    if (route("PUT", 1, "annotations")) {
      const Json body = parse_body(req.body);
      const ContextAnnotation a =
          store_.annotate(body.at("event_id").get<std::string>(), body.at("context_type").get<std::string>(),
                          body.at("value").get<std::string>(), body.value("author", std::string("anonymous")));
      return reply(200, {{"annotation", to_json(a)}});
    }
    if (route("GET", 1, "annotations")) {
      const auto event_id = query("event_id");
      if (!event_id) throw Error(ErrorCode::kInvalidArgument, "event_id query parameter required");
      const auto state = store_.match_for_event(*event_id).snapshot();
      Json list = Json::array();
      for (const auto& [key, a] : state->annotations) {
        if (key.first == *event_id) list.push_back(to_json(a));
      }
      return reply(200, {{"annotations", list}});
    }
    if (route("GET", 1, "vocabulary")) {
      return reply(200, {{"vocabulary", store_.vocabulary().types()}});
    }
  } catch (const Error& e) {
    return failure(status_for(e.code()), error_code_name(e.code()), e.what());
  } catch (const Json::exception& e) {
    return failure(400, error_code_name(ErrorCode::kInvalidArgument), e.what());
  }
  if (path_known) return failure(405, "MethodNotAllowed", m + " not supported on " + req.path);
  return failure(404, error_code_name(ErrorCode::kNotFound), "no route for " + req.path);
}

HttpService::HttpService(Store& store, const AppConfig& config)
    : api_(store, config.playback), service_(config.service), server_(std::make_unique<httplib::Server>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [key, value] : req.params) request.query[key] = value;
    request.body = req.body;
    const ApiResponse response = api_.handle(request);
    res.status = response.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(response.body, "application/json");
  };
  server_->Get(".*", forward);
  server_->Post(".*", forward);
  server_->Put(".*", forward);
  server_->Delete(".*", forward);
  if (!service_.static_dir.empty()) server_->set_mount_point("/ui", service_.static_dir);
}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
  int port = service_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(service_.host);
  } else if (!server_->bind_to_port(service_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw std::runtime_error("cannot bind " + service_.host + ":" + std::to_string(service_.port));
  }
  return port;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_) server_->stop();
}

}  // namespace rallyanchor
