#include "rallyanchor/score.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <unordered_map>

#include "rallyanchor/error.hpp"

namespace rallyanchor {

bool ScoringRules::is_game_over(int a, int b) const {
  return std::max(a, b) >= points_to_win && std::abs(a - b) >= win_by;
}

bool ScoringRules::is_legal_step(int from_a, int from_b, int to_a, int to_b) const {
  if (from_a == to_a && from_b == to_b) return true;
  if (is_game_over(from_a, from_b)) return to_a == 0 && to_b == 0;
  return (to_a == from_a + 1 && to_b == from_b) || (to_a == from_a && to_b == from_b + 1);
}

PlayerSide ScoringRules::server_at(int a, int b, PlayerSide first_server) const {
  const int played = a + b;
  const int deuce = 2 * (points_to_win - 1);
  auto pick = [&](bool first) { return first ? first_server : opponent(first_server); };
  if (played < deuce) return pick((played / 2) % 2 == 0);
  const bool first_at_deuce = (deuce / 2) % 2 == 0;
  return pick(((played - deuce) % 2 == 0) == first_at_deuce);
}

namespace {

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// Scores a legal step can lead to from a:b (including a:b itself).
int successors(const ScoringRules& rules, int a, int b, std::uint64_t out[3]) {
  out[0] = pair_key(a, b);
  if (rules.is_game_over(a, b)) {
    if (a == 0 && b == 0) return 1;
    out[1] = pair_key(0, 0);
    return 2;
  }
  out[1] = pair_key(a + 1, b);
  out[2] = pair_key(a, b + 1);
  return 3;
}

}  // namespace

std::vector<std::size_t> longest_legal_subsequence(std::span<const ScoreReading> readings,
                                                   const ScoringRules& rules) {
  const std::size_t n = readings.size();
  if (n == 0) return {};

  // chain[i]: length of the longest legal subsequence starting at i.
  std::vector<int> chain(n, 1);
  std::unordered_map<std::uint64_t, int> best_from;  // over indices already visited (> i)
  best_from.reserve(n);
  for (std::size_t k = n; k-- > 0;) {
    std::uint64_t next[3];
    const int count = successors(rules, readings[k].score_a, readings[k].score_b, next);
    int best = 0;
    for (int s = 0; s < count; ++s) {
      auto it = best_from.find(next[s]);
      if (it != best_from.end()) best = std::max(best, it->second);
    }
    chain[k] = best + 1;
    int& slot = best_from[pair_key(readings[k].score_a, readings[k].score_b)];
    slot = std::max(slot, chain[k]);
  }

  // Indices grouped by (score, chain length), ascending.
  struct Key {
    std::uint64_t score;
    int length;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>()(k.score * 1000003u + static_cast<std::uint64_t>(k.length));
    }
  };
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> by_key;
  by_key.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    by_key[{pair_key(readings[i].score_a, readings[i].score_b), chain[i]}].push_back(i);
  }

  // A history may not open on a finished game: a corrupted game-over reading
  // before the real 0:0 would otherwise add a phantom game. Only when every
  // reading is a finished game do we fall back to starting on one.
  std::size_t cur = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (rules.is_game_over(readings[i].score_a, readings[i].score_b)) continue;
    if (cur == n || chain[i] > chain[cur]) cur = i;
  }
  if (cur == n) cur = static_cast<std::size_t>(std::max_element(chain.begin(), chain.end()) - chain.begin());
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(chain[cur]));
  out.push_back(cur);
  while (chain[cur] > 1) {
    std::uint64_t next[3];
    const int count = successors(rules, readings[cur].score_a, readings[cur].score_b, next);
    std::size_t pick = n;
    for (int s = 0; s < count; ++s) {
      auto it = by_key.find({next[s], chain[cur] - 1});
      if (it == by_key.end()) continue;
      auto pos = std::upper_bound(it->second.begin(), it->second.end(), cur);
      if (pos != it->second.end()) pick = std::min(pick, *pos);
    }
    cur = pick;  // always found: chain[cur] > 1 implies a successor exists
    out.push_back(cur);
  }
  return out;
}

std::vector<ScoreState> clean_scores(std::span<const ScoreReading> readings, double min_conf,
                                     const ScoringRules& rules) {
  std::vector<ScoreReading> kept;
  kept.reserve(readings.size());
  for (const auto& r : readings) {
    if (r.confidence >= min_conf) kept.push_back(r);
  }
  if (kept.empty()) throw Error(ErrorCode::kEmptyInput, "no score readings above min_conf");

  std::vector<ScoreState> states;
  for (std::size_t idx : longest_legal_subsequence(kept, rules)) {
    const ScoreReading& r = kept[idx];
    if (!states.empty() && states.back().score_a == r.score_a && states.back().score_b == r.score_b) {
      continue;
    }
    states.push_back({r.frame, r.score_a, r.score_b});
  }
  return states;
}

std::vector<GameSpan> detect_games(std::span<const ScoreState> states) {
  std::vector<GameSpan> games;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ScoreState& s = states[i];
    const bool reset = i > 0 && (s.score_a < states[i - 1].score_a || s.score_b < states[i - 1].score_b);
    if (i == 0 || reset) {
      GameSpan g;
      g.index = static_cast<int>(games.size());
      g.frame_start = s.frame;
      g.first_state = i;
      games.push_back(g);
    }
    GameSpan& g = games.back();
    g.frame_end = s.frame;
    g.final_a = s.score_a;
    g.final_b = s.score_b;
    g.last_state = i;
  }
  return games;
}

std::vector<RallySpan> rally_boundaries(std::span<const ScoreState> states,
                                        std::span<const InPlaySegment> segs,
                                        const RallyOptions& options) {
  if (segs.empty()) throw Error(ErrorCode::kNoSegments, "no in-play segments");
  const ScoringRules& rules = options.rules;

  std::vector<int> game_of(states.size(), 0);
  for (const auto& g : detect_games(states)) {
    for (std::size_t i = g.first_state; i <= g.last_state; ++i) game_of[i] = g.index;
  }
  auto first_server = [&](int game) {
    return game % 2 == 0 ? options.first_server : opponent(options.first_server);
  };

  std::vector<RallySpan> out;
  auto emit = [&](const InPlaySegment& seg, int game, PlayerSide server, PlayerSide winner,
                  int a, int b) {
    RallySpan r;
    r.game_index = game;
    r.frame_start = seg.frame_start;
    r.frame_end = seg.frame_end;
    r.server = server;
    r.winner = winner;
    r.score_a = a;
    r.score_b = b;
    out.push_back(std::move(r));
  };
  // Segment without a score change: describe the point about to be played.
  auto emit_unscored = [&](std::size_t s) {
    const InPlaySegment& seg = segs[s];
    auto it = std::upper_bound(states.begin(), states.end(), seg.frame_end,
                               [](int f, const ScoreState& st) { return f < st.frame; });
    if (it == states.begin()) {
      emit(seg, 0, PlayerSide::kNone, PlayerSide::kNone, -1, -1);
      return;
    }
    const std::size_t k = static_cast<std::size_t>(it - states.begin()) - 1;
    const ScoreState& st = states[k];
    if (rules.is_game_over(st.score_a, st.score_b)) {
      const int game = game_of[k] + 1;
      emit(seg, game, first_server(game), PlayerSide::kNone, 0, 0);
    } else {
      emit(seg, game_of[k], rules.server_at(st.score_a, st.score_b, first_server(game_of[k])),
           PlayerSide::kNone, st.score_a, st.score_b);
    }
  };

  std::ptrdiff_t claimed = -1;
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (game_of[i] != game_of[i - 1]) continue;
    const ScoreState& before = states[i - 1];
    const ScoreState& after = states[i];
    // latest segment ending strictly before the change
    auto it = std::lower_bound(segs.begin(), segs.end(), after.frame,
                               [](const InPlaySegment& s, int f) { return s.frame_end < f; });
    const std::ptrdiff_t k = (it - segs.begin()) - 1;
    if (k <= claimed) continue;
    for (std::ptrdiff_t s = claimed + 1; s < k; ++s) emit_unscored(static_cast<std::size_t>(s));
    const PlayerSide winner = after.score_a > before.score_a ? PlayerSide::kA : PlayerSide::kB;
    const int game = game_of[i];
    emit(segs[static_cast<std::size_t>(k)], game,
         rules.server_at(before.score_a, before.score_b, first_server(game)), winner,
         before.score_a, before.score_b);
    claimed = k;
  }
  for (std::size_t s = static_cast<std::size_t>(claimed + 1); s < segs.size(); ++s) emit_unscored(s);

  for (std::size_t i = 0; i < out.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "r%03zu", i);
    out[i].rally_id = id;
  }
  return out;
}

}  // namespace rallyanchor
