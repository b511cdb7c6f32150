#pragma once

#include <array>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rallyanchor/types.hpp"

namespace rallyanchor {

struct VideoMeta {
  int frame_count = 0;
  double fps = 0.0;
  int width = 0;
  int height = 0;
  // Static URL of the source video; optional, passed through to the UI.
  std::string video_url;

  bool operator==(const VideoMeta&) const = default;
};

// Table geometry supplied by configuration rather than detection.
struct CourtRegion {
  std::array<Point2, 4> table{};
  double net_x = 0.0;
  double table_y_min = 0.0;
  double table_y_max = 0.0;

  double table_x_min() const;
  double table_x_max() const;
  bool is_convex() const;

  bool operator==(const CourtRegion&) const = default;
};

struct BallSample {
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  Point2 position() const { return {x, y}; }
  bool operator==(const BallSample&) const = default;
};

// Samples strictly increasing in frame; missing frames are allowed.
struct BallTrack {
  std::vector<BallSample> samples;

  const BallSample* find(int frame) const;
  bool operator==(const BallTrack&) const = default;
};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  Point2 position() const { return {x, y}; }
  bool operator==(const Keypoint&) const = default;
};

struct PoseBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  Keypoint neck;
  std::optional<Keypoint> left_hand;
  std::optional<Keypoint> right_hand;

  Point2 center() const { return {cx, cy}; }
  bool operator==(const PoseBox&) const = default;
};

struct PoseFrame {
  int frame = 0;
  std::vector<PoseBox> boxes;

  bool operator==(const PoseFrame&) const = default;
};

struct ScoreReading {
  int frame = 0;
  int score_a = 0;
  int score_b = 0;
  double confidence = 0.0;

  bool operator==(const ScoreReading&) const = default;
};

struct SceneLabel {
  int frame = 0;
  bool in_play = false;

  bool operator==(const SceneLabel&) const = default;
};

struct TrackSet {
  VideoMeta meta;
  std::optional<CourtRegion> court;
  BallTrack ball;
  std::vector<PoseFrame> poses;
  std::vector<ScoreReading> scores;
  std::vector<SceneLabel> scenes;

  bool operator==(const TrackSet&) const = default;
};

struct ParseIssue {
  int line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  TrackSet tracks;
  std::vector<ParseIssue> issues;
};

// Reads the line-oriented track format:
//
//   meta  frame_count=N fps=F width=W height=H [video=URL]
//   court quad=x0,y0,x1,y1,x2,y2,x3,y3 net_x=X table_y_min=Y0 table_y_max=Y1
//   ball  frame=F x=X y=Y conf=C
//   pose  frame=F box=cx,cy,w,h neck=x,y,c [lhand=x,y,c] [rhand=x,y,c]
//   score frame=F a=A b=B conf=C
//   scene frame=F in_play=P        (0/1 or a probability, >= 0.5 is in play)
//
// Blank lines and lines starting with '#' are skipped. Malformed lines and
// unknown record kinds are skipped and listed in `issues`; unknown keys are
// ignored. Throws Error(kMissingHeader) without a meta record,
// Error(kFrameOutOfRange) for frames outside [0, frame_count) and
// Error(kDuplicateFrame) for repeated ball/score/scene frames.
ParseResult parse_track_file(std::istream& in);
ParseResult parse_track_text(std::string_view text);

// Canonical text form; parse_track_text(serialize_track_file(t)).tracks == t.
std::string serialize_track_file(const TrackSet& tracks);

inline constexpr int kDefaultMaxGap = 5;

// Fills interior gaps of at most `max_gap` missing frames by linear
// interpolation. Filled samples carry confidence 0; existing samples are
// left untouched.
BallTrack interpolate_ball(const BallTrack& track, int max_gap = kDefaultMaxGap);

struct Violation {
  std::string record;  // ball, pose, score, scene, court, meta
  int frame = -1;      // -1 when not tied to a frame
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const TrackSet& tracks);

}  // namespace rallyanchor
