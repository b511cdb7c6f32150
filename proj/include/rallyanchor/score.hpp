#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rallyanchor/scene.hpp"
#include "rallyanchor/track.hpp"
#include "rallyanchor/types.hpp"

namespace rallyanchor {

// Table-tennis style scoring: a game ends once a player has at least
// `points_to_win` points and leads by `win_by`.
struct ScoringRules {
  int points_to_win = 11;
  int win_by = 2;

  bool is_game_over(int a, int b) const;

  // Legal moves between consecutive readings of a clean score history:
  // unchanged, one point to either side while the game is live, or a reset
  // to 0:0 after the game is over.
  bool is_legal_step(int from_a, int from_b, int to_a, int to_b) const;

  // Server of the point played at score a:b. Service changes every two
  // points, and every point once both players reach points_to_win - 1.
  PlayerSide server_at(int a, int b, PlayerSide first_server) const;

  bool operator==(const ScoringRules&) const = default;
};

struct ScoreState {
  int frame = 0;  // first frame at which this score is displayed
  int score_a = 0;
  int score_b = 0;

  bool operator==(const ScoreState&) const = default;
};

struct GameSpan {
  int index = 0;
  int frame_start = 0;
  int frame_end = 0;  // frame at which the final score first appears
  int final_a = 0;
  int final_b = 0;
  std::size_t first_state = 0;  // [first_state, last_state] into the input
  std::size_t last_state = 0;

  bool operator==(const GameSpan&) const = default;
};

struct RallySpan {
  std::string rally_id;
  int game_index = 0;
  int frame_start = 0;
  int frame_end = 0;
  PlayerSide server = PlayerSide::kNone;
  PlayerSide winner = PlayerSide::kNone;  // kNone for segments without a score change
  // Score before the rally; -1 when no score was displayed yet.
  int score_a = -1;
  int score_b = -1;

  bool scored() const { return winner != PlayerSide::kNone; }
  bool operator==(const RallySpan&) const = default;
};

inline constexpr double kDefaultMinScoreConfidence = 0.5;

// Indices into `readings` of the longest subsequence whose consecutive
// elements are legal steps. Among equally long subsequences the
// lexicographically smallest index sequence wins. The subsequence does not
// start on a finished game unless every reading is one. Runs in O(n log n).
std::vector<std::size_t> longest_legal_subsequence(std::span<const ScoreReading> readings,
                                                   const ScoringRules& rules = {});

// Filters readings below `min_conf`, keeps the longest legal subsequence and
// collapses runs of equal scores onto the first frame of the run.
// Throws Error(kEmptyInput) when nothing passes the confidence filter.
std::vector<ScoreState> clean_scores(std::span<const ScoreReading> readings,
                                     double min_conf = kDefaultMinScoreConfidence,
                                     const ScoringRules& rules = {});

// A new game starts wherever the score drops relative to its predecessor.
std::vector<GameSpan> detect_games(std::span<const ScoreState> states);

struct RallyOptions {
  ScoringRules rules;
  // Server of the first point of game 0; the first server alternates per game.
  PlayerSide first_server = PlayerSide::kA;

  bool operator==(const RallyOptions&) const = default;
};

// Pairs every score change with the latest unclaimed in-play segment that
// ends before the change. Segments left without a score change are kept with
// winner kNone. Changes that find no segment are dropped.
// Rally ids are "r000", "r001", ... in frame order.
// Throws Error(kNoSegments) for an empty segment list.
std::vector<RallySpan> rally_boundaries(std::span<const ScoreState> states,
                                        std::span<const InPlaySegment> segments,
                                        const RallyOptions& options = {});

}  // namespace rallyanchor
