#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rallyanchor/anchors.hpp"
#include "rallyanchor/score.hpp"
#include "rallyanchor/track.hpp"

namespace rallyanchor {

// Forces exactly `count` rallies of every game to satisfy
// (server, winner, strokes >= min_strokes); all other rallies fail it.
struct QualifiedPlan {
  PlayerSide server = PlayerSide::kA;
  PlayerSide winner = PlayerSide::kA;
  int min_strokes = 3;
  int count = 2;

  bool operator==(const QualifiedPlan&) const = default;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int games = 1;
  // Rallies in every game; must be a legal game length (11..20, or even >= 22).
  int rallies_per_game = 11;
  int min_strokes = 5;
  int max_strokes = 9;
  double fps = 25.0;
  int width = 1280;
  int height = 720;
  CourtRegion court = default_court();
  PlayerSide first_server = PlayerSide::kA;
  int score_interval = 5;  // frames between scoreboard readings

  double ball_jitter_px = 0.0;
  double ball_dropout_rate = 0.0;
  double ocr_corruption_rate = 0.0;
  double scene_flip_rate = 0.0;
  double hand_dropout_rate = 0.0;
  double distractor_rate = 0.0;  // chance per frame of an extra non-player box

  std::optional<QualifiedPlan> qualified;

  static CourtRegion default_court();
  bool operator==(const SynthConfig&) const = default;
};

// Throws Error(kInvalidArgument) for rates outside [0,1], negative jitter or
// an impossible game length.
void check_config(const SynthConfig& config);

struct TruthEvent {
  EventType type = EventType::kHit;
  int frame = 0;
  Point2 position;
  PlayerSide side = PlayerSide::kNone;  // hitter for hits, table half for bounces
  int rally_index = 0;

  bool operator==(const TruthEvent&) const = default;
};

struct TruthRally {
  int index = 0;
  int game_index = 0;
  int frame_start = 0;
  int frame_end = 0;
  PlayerSide server = PlayerSide::kNone;
  PlayerSide winner = PlayerSide::kNone;
  int strokes = 0;
  int bounces = 0;
  int score_a = 0;  // before the rally
  int score_b = 0;
  bool qualified = false;  // only meaningful with a QualifiedPlan

  bool operator==(const TruthRally&) const = default;
};

struct GroundTruth {
  std::vector<TruthEvent> events;  // frame order
  std::vector<TruthRally> rallies;
  std::vector<ScoreState> score_states;  // displayed scores, frame = first display
  // Per pose frame: side of every box in input order, kNone for distractors.
  std::map<int, std::vector<PlayerSide>> box_sides;

  bool operator==(const GroundTruth&) const = default;
};

struct SynthMatch {
  TrackSet tracks;
  GroundTruth truth;
};

// Piecewise-ballistic side-view rallies: a toss, the serve bouncing on both
// halves, then alternating strokes and bounces. Deterministic in the seed.
SynthMatch generate_match(const SynthConfig& config);

// Newline-delimited JSON: rally, event and score records.
std::string serialize_ground_truth(const GroundTruth& truth);
GroundTruth parse_ground_truth(std::string_view text);

// Anchor export of the match a perfect annotator would produce; rally ids
// follow the pipeline's scheme so it can be diffed against a calibrated store.
MatchState truth_match_state(const GroundTruth& truth, const MatchInfo& info);

}  // namespace rallyanchor
