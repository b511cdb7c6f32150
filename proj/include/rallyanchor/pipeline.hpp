#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rallyanchor/anchors.hpp"
#include "rallyanchor/error.hpp"
#include "rallyanchor/events.hpp"
#include "rallyanchor/scene.hpp"
#include "rallyanchor/score.hpp"

namespace rallyanchor {

struct PipelineConfig {
  int max_gap = kDefaultMaxGap;
  int scene_window = kDefaultSmoothingWindow;
  int min_segment_length = kDefaultMinSegmentLength;
  double min_score_confidence = kDefaultMinScoreConfidence;
  RallyOptions rally;
  DetectParams detect;
  AssignParams assign;

  bool operator==(const PipelineConfig&) const = default;
};

// A module error annotated with the pipeline stage that raised it:
// ingest, segment, score or detect.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause)
      : Error(cause.code(), stage + ": " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOutput {
  MatchState state;
  std::vector<std::string> warnings;
  std::vector<RawEvent> events;  // all detected events, frame order
};

// Stable id derived from the track bytes and the configuration.
std::string match_id_for(std::string_view track_text, const PipelineConfig& config);

// ingest -> clean_scores -> segments -> rally_boundaries -> per-rally event
// detection -> anchors. Pure: nothing is persisted.
PipelineOutput build_match(std::string_view track_text, const PipelineConfig& config);

// Builds the match and stores it unless a match with the same id exists.
// Re-running on identical input returns the same id and changes nothing.
std::string run_pipeline(Store& store, std::string_view track_text,
                         const PipelineConfig& config);

struct SlowdownWindow {
  int frame_from = 0;
  int frame_to = 0;
  double rate = 1.0;
  int pause_at = 0;
  std::vector<std::string> anchor_ids;

  bool operator==(const SlowdownWindow&) const = default;
};

struct PlaybackConfig {
  int lead_frames = 25;
  double rate = 0.25;

  bool operator==(const PlaybackConfig&) const = default;
};

// One window [frame - lead, frame] per uncalibrated HIT/BOUNCE pause frame.
// Overlapping windows are cut at the midpoint between pause frames so the
// result is disjoint and ordered. Anchors sharing a frame share a window.
// Throws Error(kRallyNotFound).
std::vector<SlowdownWindow> playback_hints(const MatchState& state, std::string_view rally_id,
                                           const PlaybackConfig& config = {});

}  // namespace rallyanchor
