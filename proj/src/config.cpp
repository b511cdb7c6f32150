#include "rallyanchor/config.hpp"

#include <fstream>
#include <sstream>

#include "rallyanchor/error.hpp"

namespace rallyanchor {

namespace {

template <typename T>
void read(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void read_side(const Json& j, const char* key, PlayerSide& field) {
  if (!j.contains(key)) return;
  auto side = parse_side(j.at(key).get<std::string>());
  if (!side) throw Error(ErrorCode::kInvalidArgument, std::string("bad side for ") + key);
  field = *side;
}

const Json& section(const Json& j, const char* key) {
  static const Json empty = Json::object();
  if (!j.contains(key)) return empty;
  const Json& s = j.at(key);
  if (!s.is_object()) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be an object");
  return s;
}

Json court_json(const CourtRegion& c) {
  Json quad = Json::array();
  for (const auto& p : c.table) {
    quad.push_back(p.x);
    quad.push_back(p.y);
  }
  return Json{{"quad", quad}, {"net_x", c.net_x}, {"table_y_min", c.table_y_min}, {"table_y_max", c.table_y_max}};
}

CourtRegion court_from(const Json& j, CourtRegion c) {
  if (j.contains("quad")) {
    const auto q = j.at("quad").get<std::vector<double>>();
    if (q.size() != 8) throw Error(ErrorCode::kInvalidArgument, "court quad needs 8 numbers");
    for (std::size_t i = 0; i < 4; ++i) c.table[i] = {q[2 * i], q[2 * i + 1]};
  }
  read(j, "net_x", c.net_x);
  read(j, "table_y_min", c.table_y_min);
  read(j, "table_y_max", c.table_y_max);
  return c;
}

PipelineConfig pipeline_from(const Json& j) {
  PipelineConfig c;
  read(j, "max_gap", c.max_gap);
  read(j, "scene_window", c.scene_window);
  read(j, "min_segment_length", c.min_segment_length);
  read(j, "min_score_confidence", c.min_score_confidence);
  read(j, "points_to_win", c.rally.rules.points_to_win);
  read(j, "win_by", c.rally.rules.win_by);
  read_side(j, "first_server", c.rally.first_server);
  const Json& d = section(j, "detect");
  read(d, "smoothing_window", c.detect.smoothing_window);
  read(d, "minimum_window", c.detect.minimum_window);
  read(d, "max_hand_distance", c.detect.max_hand_distance);
  read(d, "reference_width", c.detect.reference_width);
  read(d, "merge_gap", c.detect.merge_gap);
  if (d.contains("hit_axis")) {
    const auto axis = d.at("hit_axis").get<std::string>();
    if (axis != "x" && axis != "y") throw Error(ErrorCode::kInvalidArgument, "hit_axis must be x or y");
    c.detect.hit_axis = axis == "x" ? Axis::kX : Axis::kY;
  }
  const Json& a = section(j, "assign");
  read(a, "outlier_sigmas", c.assign.outlier_sigmas);
  read(a, "min_sigma_px", c.assign.min_sigma_px);
  read(a, "max_iterations", c.assign.max_iterations);
  return c;
}

SynthConfig synth_from(const Json& j) {
  SynthConfig c;
  read(j, "seed", c.seed);
  read(j, "games", c.games);
  read(j, "rallies_per_game", c.rallies_per_game);
  read(j, "min_strokes", c.min_strokes);
  read(j, "max_strokes", c.max_strokes);
  read(j, "fps", c.fps);
  read(j, "width", c.width);
  read(j, "height", c.height);
  if (j.contains("court")) c.court = court_from(j.at("court"), c.court);
  read_side(j, "first_server", c.first_server);
  read(j, "score_interval", c.score_interval);
  read(j, "ball_jitter_px", c.ball_jitter_px);
  read(j, "ball_dropout_rate", c.ball_dropout_rate);
  read(j, "ocr_corruption_rate", c.ocr_corruption_rate);
  read(j, "scene_flip_rate", c.scene_flip_rate);
  read(j, "hand_dropout_rate", c.hand_dropout_rate);
  read(j, "distractor_rate", c.distractor_rate);
  if (j.contains("qualified") && !j.at("qualified").is_null()) {
    const Json& q = j.at("qualified");
    QualifiedPlan plan;
    read_side(q, "server", plan.server);
    read_side(q, "winner", plan.winner);
    read(q, "min_strokes", plan.min_strokes);
    read(q, "count", plan.count);
    c.qualified = plan;
  }
  return c;
}

}  // namespace

Json to_json(const PipelineConfig& c) {
  return Json{{"max_gap", c.max_gap},
              {"scene_window", c.scene_window},
              {"min_segment_length", c.min_segment_length},
              {"min_score_confidence", c.min_score_confidence},
              {"points_to_win", c.rally.rules.points_to_win},
              {"win_by", c.rally.rules.win_by},
              {"first_server", side_name(c.rally.first_server)},
              {"detect",
               {{"smoothing_window", c.detect.smoothing_window},
                {"minimum_window", c.detect.minimum_window},
                {"max_hand_distance", c.detect.max_hand_distance},
                {"reference_width", c.detect.reference_width},
                {"merge_gap", c.detect.merge_gap},
                {"hit_axis", c.detect.hit_axis == Axis::kX ? "x" : "y"}}},
              {"assign",
               {{"outlier_sigmas", c.assign.outlier_sigmas},
                {"min_sigma_px", c.assign.min_sigma_px},
                {"max_iterations", c.assign.max_iterations}}}};
}

Json to_json(const SynthConfig& c) {
  Json j{{"seed", c.seed},
         {"games", c.games},
         {"rallies_per_game", c.rallies_per_game},
         {"min_strokes", c.min_strokes},
         {"max_strokes", c.max_strokes},
         {"fps", c.fps},
         {"width", c.width},
         {"height", c.height},
         {"court", court_json(c.court)},
         {"first_server", side_name(c.first_server)},
         {"score_interval", c.score_interval},
         {"ball_jitter_px", c.ball_jitter_px},
         {"ball_dropout_rate", c.ball_dropout_rate},
         {"ocr_corruption_rate", c.ocr_corruption_rate},
         {"scene_flip_rate", c.scene_flip_rate},
         {"hand_dropout_rate", c.hand_dropout_rate},
         {"distractor_rate", c.distractor_rate}};
  if (c.qualified) {
    j["qualified"] = {{"server", side_name(c.qualified->server)},
                      {"winner", side_name(c.qualified->winner)},
                      {"min_strokes", c.qualified->min_strokes},
                      {"count", c.qualified->count}};
  }
  return j;
}

AppConfig parse_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  AppConfig c;
  try {
    c.pipeline = pipeline_from(section(j, "pipeline"));
    const Json& p = section(j, "playback");
    read(p, "lead_frames", c.playback.lead_frames);
    read(p, "rate", c.playback.rate);
    const Json& s = section(j, "service");
    read(s, "host", c.service.host);
    read(s, "port", c.service.port);
    read(s, "store_dir", c.service.store_dir);
    read(s, "static_dir", c.service.static_dir);
    c.synth = synth_from(section(j, "synth"));
    if (j.contains("vocabulary")) {
      c.vocabulary = Vocabulary(j.at("vocabulary").get<std::map<std::string, std::vector<std::string>>>());
    }
    read(j, "match_tolerance", c.match_tolerance);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
  if (c.playback.lead_frames < 0 || c.playback.rate <= 0.0 || c.playback.rate > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "playback needs lead_frames >= 0 and rate in (0, 1]");
  }
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const AppConfig& c) {
  Json j{{"pipeline", to_json(c.pipeline)},
         {"playback", {{"lead_frames", c.playback.lead_frames}, {"rate", c.playback.rate}}},
         {"service",
          {{"host", c.service.host},
           {"port", c.service.port},
           {"store_dir", c.service.store_dir},
           {"static_dir", c.service.static_dir}}},
         {"synth", to_json(c.synth)},
         {"vocabulary", c.vocabulary.types()},
         {"match_tolerance", c.match_tolerance}};
  return j.dump(2) + "\n";
}

}  // namespace rallyanchor
