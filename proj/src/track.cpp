#include "rallyanchor/track.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "rallyanchor/error.hpp"

namespace rallyanchor {

double CourtRegion::table_x_min() const {
  return std::min({table[0].x, table[1].x, table[2].x, table[3].x});
}

double CourtRegion::table_x_max() const {
  return std::max({table[0].x, table[1].x, table[2].x, table[3].x});
}

bool CourtRegion::is_convex() const {
  int sign = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Point2& a = table[i];
    const Point2& b = table[(i + 1) % table.size()];
    const Point2& c = table[(i + 2) % table.size()];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (cross == 0.0) return false;
    const int s = cross > 0 ? 1 : -1;
    if (sign == 0) {
      sign = s;
    } else if (s != sign) {
      return false;
    }
  }
  return true;
}

const BallSample* BallTrack::find(int frame) const {
  auto it = std::lower_bound(samples.begin(), samples.end(), frame,
                             [](const BallSample& s, int f) { return s.frame < f; });
  if (it == samples.end() || it->frame != frame) return nullptr;
  return &*it;
}

namespace {

std::optional<double> to_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<int> to_int(std::string_view text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<std::vector<double>> to_list(std::string_view text, std::size_t count) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
    auto v = to_double(text.substr(pos, stop - pos));
    if (!v) return std::nullopt;
    values.push_back(*v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (values.size() != count) return std::nullopt;
  return values;
}

// Thrown inside the line parser; converted into a ParseIssue.
struct Malformed {
  std::string message;
};

class Fields {
 public:
  explicit Fields(std::map<std::string_view, std::string_view> values)
      : values_(std::move(values)) {}

  bool has(std::string_view key) const { return values_.count(key) != 0; }

  std::string_view raw(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Malformed{"missing key '" + std::string(key) + "'"};
    return it->second;
  }

  double number(std::string_view key) const {
    auto v = to_double(raw(key));
    if (!v) throw Malformed{"bad number for '" + std::string(key) + "'"};
    return *v;
  }

  int integer(std::string_view key) const {
    auto v = to_int(raw(key));
    if (!v) throw Malformed{"bad integer for '" + std::string(key) + "'"};
    return *v;
  }

  std::vector<double> list(std::string_view key, std::size_t count) const {
    auto v = to_list(raw(key), count);
    if (!v) {
      throw Malformed{"expected " + std::to_string(count) + " comma-separated numbers for '" +
                      std::string(key) + "'"};
    }
    return *v;
  }

  Keypoint keypoint(std::string_view key) const {
    auto v = list(key, 3);
    return {v[0], v[1], v[2]};
  }

 private:
  std::map<std::string_view, std::string_view> values_;
};

template <typename T>
struct Located {
  int line;
  T value;
};

struct RawTracks {
  std::optional<Located<VideoMeta>> meta;
  std::optional<CourtRegion> court;
  std::vector<Located<BallSample>> ball;
  std::vector<Located<std::pair<int, PoseBox>>> poses;
  std::vector<Located<ScoreReading>> scores;
  std::vector<Located<SceneLabel>> scenes;
};

void parse_line(std::string_view kind, const Fields& f, int line, RawTracks& raw,
                std::vector<ParseIssue>& issues) {
  if (kind == "meta") {
    VideoMeta meta;
    meta.frame_count = f.integer("frame_count");
    meta.fps = f.number("fps");
    meta.width = f.integer("width");
    meta.height = f.integer("height");
    if (f.has("video")) meta.video_url = std::string(f.raw("video"));
    if (raw.meta) {
      issues.push_back({line, "duplicate meta record ignored"});
      return;
    }
    raw.meta = Located<VideoMeta>{line, std::move(meta)};
  } else if (kind == "court") {
    auto quad = f.list("quad", 8);
    CourtRegion court;
    for (std::size_t i = 0; i < 4; ++i) court.table[i] = {quad[2 * i], quad[2 * i + 1]};
    court.net_x = f.number("net_x");
    court.table_y_min = f.number("table_y_min");
    court.table_y_max = f.number("table_y_max");
    if (raw.court) {
      issues.push_back({line, "duplicate court record ignored"});
      return;
    }
    raw.court = court;
  } else if (kind == "ball") {
    raw.ball.push_back({line, {f.integer("frame"), f.number("x"), f.number("y"), f.number("conf")}});
  } else if (kind == "pose") {
    const int frame = f.integer("frame");
    if (!f.has("neck")) throw Malformed{"pose without neck rejected"};
    auto box = f.list("box", 4);
    PoseBox pose;
    pose.cx = box[0];
    pose.cy = box[1];
    pose.w = box[2];
    pose.h = box[3];
    pose.neck = f.keypoint("neck");
    if (f.has("lhand")) pose.left_hand = f.keypoint("lhand");
    if (f.has("rhand")) pose.right_hand = f.keypoint("rhand");
    raw.poses.push_back({line, {frame, pose}});
  } else if (kind == "score") {
    const int a = f.integer("a");
    const int b = f.integer("b");
    if (a < 0 || b < 0) throw Malformed{"negative score"};
    raw.scores.push_back({line, {f.integer("frame"), a, b, f.number("conf")}});
  } else if (kind == "scene") {
    const double p = f.number("in_play");
    if (p < 0.0 || p > 1.0) throw Malformed{"in_play outside [0,1]"};
    raw.scenes.push_back({line, {f.integer("frame"), p >= 0.5}});
  } else {
    issues.push_back({line, "unknown record kind '" + std::string(kind) + "' skipped"});
  }
}

void check_frame(int frame, int line, const VideoMeta& meta) {
  if (frame < 0 || frame >= meta.frame_count) {
    throw Error(ErrorCode::kFrameOutOfRange,
                "line " + std::to_string(line) + ": frame " + std::to_string(frame) +
                    " outside [0, " + std::to_string(meta.frame_count) + ")");
  }
}

template <typename T, typename FrameOf>
std::vector<T> sorted_unique(std::vector<Located<T>> records, const VideoMeta& meta,
                             std::string_view what, FrameOf frame_of) {
  std::stable_sort(records.begin(), records.end(), [&](const auto& l, const auto& r) {
    return frame_of(l.value) < frame_of(r.value);
  });
  std::vector<T> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    check_frame(frame_of(records[i].value), records[i].line, meta);
    if (i > 0 && frame_of(records[i].value) == frame_of(records[i - 1].value)) {
      throw Error(ErrorCode::kDuplicateFrame,
                  "line " + std::to_string(records[i].line) + ": duplicate " + std::string(what) +
                      " frame " + std::to_string(frame_of(records[i].value)));
    }
    out.push_back(std::move(records[i].value));
  }
  return out;
}

void append_double(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

void append_keypoint(std::string& out, std::string_view key, const Keypoint& k) {
  out += ' ';
  out += key;
  out += '=';
  append_double(out, k.x);
  out += ',';
  append_double(out, k.y);
  out += ',';
  append_double(out, k.confidence);
}

}  // namespace

ParseResult parse_track_text(std::string_view text) {
  ParseResult result;
  RawTracks raw;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    if (tokens.empty() || tokens.front().front() == '#') continue;

    std::map<std::string_view, std::string_view> values;
    bool ok = true;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::size_t eq = tokens[t].find('=');
      if (eq == std::string_view::npos || eq == 0) {
        result.issues.push_back({line_no, "token '" + std::string(tokens[t]) + "' is not key=value"});
        ok = false;
        break;
      }
      values.emplace(tokens[t].substr(0, eq), tokens[t].substr(eq + 1));
    }
    if (!ok) continue;
    try {
      parse_line(tokens.front(), Fields(std::move(values)), line_no, raw, result.issues);
    } catch (const Malformed& m) {
      result.issues.push_back({line_no, m.message});
    }
  }

  if (!raw.meta) throw Error(ErrorCode::kMissingHeader, "track file has no meta record");
  TrackSet& ts = result.tracks;
  ts.meta = raw.meta->value;
  ts.court = raw.court;
  ts.ball.samples = sorted_unique(std::move(raw.ball), ts.meta, "ball",
                                  [](const BallSample& s) { return s.frame; });
  ts.scores = sorted_unique(std::move(raw.scores), ts.meta, "score",
                            [](const ScoreReading& s) { return s.frame; });
  ts.scenes = sorted_unique(std::move(raw.scenes), ts.meta, "scene",
                            [](const SceneLabel& s) { return s.frame; });

  std::map<int, PoseFrame> poses;
  for (auto& rec : raw.poses) {
    check_frame(rec.value.first, rec.line, ts.meta);
    PoseFrame& pf = poses[rec.value.first];
    pf.frame = rec.value.first;
    pf.boxes.push_back(rec.value.second);
  }
  for (auto& [frame, pf] : poses) ts.poses.push_back(std::move(pf));
  return result;
}

ParseResult parse_track_file(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_track_text(buffer.str());
}

std::string serialize_track_file(const TrackSet& ts) {
  std::string out;
  out += "meta frame_count=" + std::to_string(ts.meta.frame_count) + " fps=";
  append_double(out, ts.meta.fps);
  out += " width=" + std::to_string(ts.meta.width) + " height=" + std::to_string(ts.meta.height);
  if (!ts.meta.video_url.empty()) out += " video=" + ts.meta.video_url;
  out += '\n';
  if (ts.court) {
    out += "court quad=";
    for (std::size_t i = 0; i < 4; ++i) {
      if (i > 0) out += ',';
      append_double(out, ts.court->table[i].x);
      out += ',';
      append_double(out, ts.court->table[i].y);
    }
    out += " net_x=";
    append_double(out, ts.court->net_x);
    out += " table_y_min=";
    append_double(out, ts.court->table_y_min);
    out += " table_y_max=";
    append_double(out, ts.court->table_y_max);
    out += '\n';
  }
  for (const auto& s : ts.ball.samples) {
    out += "ball frame=" + std::to_string(s.frame) + " x=";
    append_double(out, s.x);
    out += " y=";
    append_double(out, s.y);
    out += " conf=";
    append_double(out, s.confidence);
    out += '\n';
  }
  for (const auto& pf : ts.poses) {
    for (const auto& box : pf.boxes) {
      out += "pose frame=" + std::to_string(pf.frame) + " box=";
      append_double(out, box.cx);
      out += ',';
      append_double(out, box.cy);
      out += ',';
      append_double(out, box.w);
      out += ',';
      append_double(out, box.h);
      append_keypoint(out, "neck", box.neck);
      if (box.left_hand) append_keypoint(out, "lhand", *box.left_hand);
      if (box.right_hand) append_keypoint(out, "rhand", *box.right_hand);
      out += '\n';
    }
  }
  for (const auto& s : ts.scores) {
    out += "score frame=" + std::to_string(s.frame) + " a=" + std::to_string(s.score_a) +
           " b=" + std::to_string(s.score_b) + " conf=";
    append_double(out, s.confidence);
    out += '\n';
  }
  for (const auto& s : ts.scenes) {
    out += "scene frame=" + std::to_string(s.frame) + " in_play=" + (s.in_play ? "1" : "0") + '\n';
  }
  return out;
}

BallTrack interpolate_ball(const BallTrack& track, int max_gap) {
  if (max_gap < 1) throw Error(ErrorCode::kInvalidArgument, "max_gap must be >= 1");
  BallTrack out;
  out.samples.reserve(track.samples.size());
  for (std::size_t i = 0; i < track.samples.size(); ++i) {
    const BallSample& cur = track.samples[i];
    out.samples.push_back(cur);
    if (i + 1 == track.samples.size()) break;
    const BallSample& next = track.samples[i + 1];
    const int missing = next.frame - cur.frame - 1;
    if (missing < 1 || missing > max_gap) continue;
    const double span = static_cast<double>(next.frame - cur.frame);
    for (int k = 1; k <= missing; ++k) {
      const double t = k / span;
      out.samples.push_back({cur.frame + k, cur.x + (next.x - cur.x) * t,
                             cur.y + (next.y - cur.y) * t, 0.0});
    }
  }
  return out;
}

namespace {

bool unit_range(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

ValidationReport validate(const TrackSet& ts) {
  ValidationReport report;
  auto add = [&](std::string record, int frame, std::string message) {
    report.violations.push_back({std::move(record), frame, std::move(message)});
  };
  const VideoMeta& meta = ts.meta;
  if (meta.frame_count <= 0) add("meta", -1, "frame_count must be positive");
  if (!(meta.fps > 0.0)) add("meta", -1, "fps must be positive");
  if (meta.width <= 0 || meta.height <= 0) add("meta", -1, "frame size must be positive");
  auto in_range = [&](int frame) { return frame >= 0 && frame < meta.frame_count; };

  if (!ts.court) {
    add("court", -1, "missing court record");
  } else {
    if (!ts.court->is_convex()) add("court", -1, "table quadrilateral is not convex");
    if (!(ts.court->table_y_min < ts.court->table_y_max)) add("court", -1, "table_y_min >= table_y_max");
  }

  int prev = std::numeric_limits<int>::min();
  for (const auto& s : ts.ball.samples) {
    if (s.frame <= prev) add("ball", s.frame, "frames not strictly increasing");
    if (!in_range(s.frame)) add("ball", s.frame, "frame out of range");
    if (!unit_range(s.confidence)) add("ball", s.frame, "confidence outside [0,1]");
    prev = s.frame;
  }

  prev = std::numeric_limits<int>::min();
  for (const auto& pf : ts.poses) {
    if (pf.frame <= prev) add("pose", pf.frame, "frames not strictly increasing");
    if (!in_range(pf.frame)) add("pose", pf.frame, "frame out of range");
    for (const auto& box : pf.boxes) {
      if (!(box.w > 0.0 && box.h > 0.0)) add("pose", pf.frame, "box with non-positive size");
      if (!unit_range(box.neck.confidence)) add("pose", pf.frame, "neck confidence outside [0,1]");
      for (const auto* hand : {&box.left_hand, &box.right_hand}) {
        if (*hand && !unit_range((*hand)->confidence)) {
          add("pose", pf.frame, "hand confidence outside [0,1]");
        }
      }
    }
    prev = pf.frame;
  }

  prev = std::numeric_limits<int>::min();
  for (const auto& s : ts.scores) {
    if (s.frame <= prev) add("score", s.frame, "frames not strictly increasing");
    if (!in_range(s.frame)) add("score", s.frame, "frame out of range");
    if (s.score_a < 0 || s.score_b < 0) add("score", s.frame, "negative score");
    if (!unit_range(s.confidence)) add("score", s.frame, "confidence outside [0,1]");
    prev = s.frame;
  }

  prev = std::numeric_limits<int>::min();
  for (const auto& s : ts.scenes) {
    if (prev != std::numeric_limits<int>::min()) {
      if (s.frame <= prev) {
        add("scene", s.frame, "frames not strictly increasing");
      } else if (s.frame != prev + 1) {
        add("scene", s.frame, "gap in scene labels before this frame");
      }
    }
    if (!in_range(s.frame)) add("scene", s.frame, "frame out of range");
    prev = s.frame;
  }
  return report;
}

}  // namespace rallyanchor
