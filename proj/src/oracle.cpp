#include "rallyanchor/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "rallyanchor/codec.hpp"
#include "rallyanchor/error.hpp"

namespace rallyanchor {

namespace {

constexpr double kGravity = 1.0;  // px / frame^2, downward

// Standard library distributions are implementation-defined; these are not,
// so a seed produces the same match with any compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  bool chance(double p) { return p > 0.0 && uniform() < p; }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(integer(0, static_cast<int>(i) - 1))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

bool legal_game_length(int n) { return (n >= 11 && n <= 20) || (n >= 22 && n % 2 == 0); }

// Point winners of one game of `n` rallies.
std::vector<PlayerSide> game_winners(Rng& rng, int n) {
  const PlayerSide w = rng.chance(0.5) ? PlayerSide::kA : PlayerSide::kB;
  const PlayerSide l = opponent(w);
  std::vector<PlayerSide> out;
  if (n <= 20) {
    out.assign(10, w);
    out.insert(out.end(), static_cast<std::size_t>(n - 11), l);
    rng.shuffle(out);
    out.push_back(w);
    return out;
  }
  out.assign(10, w);
  out.insert(out.end(), 10, l);
  rng.shuffle(out);
  for (int k = 0; k < (n - 22) / 2; ++k) {
    const bool w_first = rng.chance(0.5);
    out.push_back(w_first ? w : l);
    out.push_back(w_first ? l : w);
  }
  out.push_back(w);
  out.push_back(w);
  return out;
}

int direction(PlayerSide s) { return s == PlayerSide::kA ? 1 : -1; }

struct Key {
  int frame;
  Point2 p;
};

// Geometry of one rally in a side view: player A left of the net, B right.
class RallyBuilder {
 public:
  RallyBuilder(Rng& rng, const SynthConfig& cfg) : rng_(rng), cfg_(cfg) {}

  Point2 contact_point(PlayerSide s) {
    const double x = s == PlayerSide::kA ? rng_.uniform(220, 280) : rng_.uniform(1000, 1060);
    return {x, rng_.uniform(360, 410)};
  }
  Point2 bounce_point(PlayerSide half) {
    const double x = half == PlayerSide::kA ? rng_.uniform(420, 580) : rng_.uniform(700, 860);
    return {x, rng_.uniform(426, 434)};
  }

  void add(int duration, Point2 p) { keys.push_back({keys.back().frame + duration, p}); }

  void bounce(PlayerSide half, int rally_index) {
    events.push_back({EventType::kBounce, keys.back().frame, keys.back().p, half, rally_index});
  }
  void hit(PlayerSide side, int rally_index) {
    events.push_back({EventType::kHit, keys.back().frame, keys.back().p, side, rally_index});
    contacts[side == PlayerSide::kA ? 0 : 1].push_back(keys.back());
  }

  // Toss, serve and `strokes` alternating strokes; returns the bounce count.
  int build(int start, PlayerSide server, int strokes, bool last_lands, int rally_index) {
    const Point2 serve_at = contact_point(server);
    const Point2 first_bounce = bounce_point(server);
    const int first_leg = rng_.integer(10, 14);
    // The toss drifts away from the net at a quarter of the serve's speed so
    // the serve shows up as a horizontal reversal.
    const double drift = std::abs(first_bounce.x - serve_at.x) / first_leg / 4.0;
    const int toss = rng_.integer(20, 28);
    keys.push_back({start, {serve_at.x + direction(server) * drift * toss, serve_at.y + 5.0}});
    add(toss, serve_at);

    int bounces = 0;
    PlayerSide hitter = server;
    for (int k = 1; k <= strokes; ++k) {
      hit(hitter, rally_index);
      const PlayerSide other = opponent(hitter);
      const bool last = k == strokes;
      if (last && !last_lands) {
        const double x = hitter == PlayerSide::kA ? rng_.uniform(990, 1060) : rng_.uniform(220, 290);
        add(rng_.integer(20, 26), {x, rng_.uniform(380, 405)});
        break;
      }
      if (k == 1) {
        add(first_leg, first_bounce);
        bounce(server, rally_index);
        add(rng_.integer(10, 14), bounce_point(other));
      } else {
        add(rng_.integer(16, 22), bounce_point(other));
      }
      bounce(other, rally_index);
      bounces += k == 1 ? 2 : 1;
      if (last) {
        const double x = hitter == PlayerSide::kA ? rng_.uniform(1120, 1200) : rng_.uniform(80, 160);
        add(rng_.integer(12, 18), {x, rng_.uniform(395, 415)});
        break;
      }
      add(rng_.integer(14, 18), contact_point(other));
      hitter = other;
    }
    return bounces;
  }

  // Ball position at every frame from keys.front() to keys.back().
  std::vector<Point2> trajectory() const {
    std::vector<Point2> out;
    out.push_back(keys.front().p);
    for (std::size_t i = 1; i < keys.size(); ++i) {
      const Key& a = keys[i - 1];
      const Key& b = keys[i];
      const double T = b.frame - a.frame;
      const double vy0 = (b.p.y - a.p.y - 0.5 * kGravity * T * T) / T;
      for (int t = 1; t <= b.frame - a.frame; ++t) {
        out.push_back({a.p.x + (b.p.x - a.p.x) * t / T, a.p.y + vy0 * t + 0.5 * kGravity * t * t});
      }
      out.back() = b.p;
    }
    return out;
  }

  std::vector<Key> keys;
  std::vector<TruthEvent> events;
  std::array<std::vector<Key>, 2> contacts;

 private:
  Rng& rng_;
  const SynthConfig& cfg_;
};

// Playing hand of one player at `frame`: linear between the player's contacts.
Point2 hand_at(const std::vector<Key>& contacts, PlayerSide side, int frame) {
  if (contacts.empty()) return side == PlayerSide::kA ? Point2{250, 390} : Point2{1030, 390};
  if (frame <= contacts.front().frame) return contacts.front().p;
  if (frame >= contacts.back().frame) return contacts.back().p;
  auto it = std::upper_bound(contacts.begin(), contacts.end(), frame,
                             [](int f, const Key& k) { return f < k.frame; });
  const Key& b = *it;
  const Key& a = *(it - 1);
  const double t = static_cast<double>(frame - a.frame) / (b.frame - a.frame);
  return {a.p.x + (b.p.x - a.p.x) * t, a.p.y + (b.p.y - a.p.y) * t};
}

PoseBox player_box(Rng& noise, const SynthConfig& cfg, PlayerSide side, Point2 hand) {
  const double dir = direction(side);
  const Point2 neck{hand.x - dir * 50.0, hand.y - 40.0};
  PoseBox box;
  box.cx = neck.x;
  box.cy = neck.y + 70.0;
  box.w = 90.0;
  box.h = 200.0;
  box.neck = {neck.x, neck.y, 0.95};
  Keypoint playing{hand.x, hand.y, 0.9};
  Keypoint free{neck.x - dir * 40.0, neck.y + 50.0, 0.9};
  const bool lose_playing = noise.chance(cfg.hand_dropout_rate);
  const bool lose_free = noise.chance(cfg.hand_dropout_rate);
  auto& playing_slot = side == PlayerSide::kA ? box.right_hand : box.left_hand;
  auto& free_slot = side == PlayerSide::kA ? box.left_hand : box.right_hand;
  if (!lose_playing) playing_slot = playing;
  if (!lose_free) free_slot = free;
  return box;
}

PoseBox distractor_box(Rng& noise) {
  PoseBox box;
  box.cx = noise.uniform(560, 720);
  box.cy = noise.uniform(150, 250);
  box.w = 70.0;
  box.h = 160.0;
  box.neck = {box.cx, box.cy - 60.0, 0.8};
  return box;
}

}  // namespace

CourtRegion SynthConfig::default_court() {
  CourtRegion c;
  c.table = {Point2{340, 420}, Point2{940, 420}, Point2{940, 440}, Point2{340, 440}};
  c.net_x = 640;
  c.table_y_min = 420;
  c.table_y_max = 440;
  return c;
}

void check_config(const SynthConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  for (double rate : {c.ball_dropout_rate, c.ocr_corruption_rate, c.scene_flip_rate, c.hand_dropout_rate,
                      c.distractor_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) fail("noise rates must lie in [0, 1]");
  }
  if (!(c.ball_jitter_px >= 0.0)) fail("ball jitter must be non-negative");
  if (c.games < 1) fail("need at least one game");
  if (!legal_game_length(c.rallies_per_game)) fail("rallies_per_game is not a possible game length");
  if (c.min_strokes < 1 || c.max_strokes < c.min_strokes) fail("need 1 <= min_strokes <= max_strokes");
  if (!(c.fps > 0.0) || c.width <= 0 || c.height <= 0) fail("fps and frame size must be positive");
  if (c.score_interval < 1) fail("score_interval must be positive");
  if (c.qualified) {
    const QualifiedPlan& q = *c.qualified;
    if (q.server == PlayerSide::kNone || q.winner == PlayerSide::kNone) fail("qualified plan needs sides");
    if (q.min_strokes < 2 || q.min_strokes > c.max_strokes) fail("qualified min_strokes must lie in [2, max_strokes]");
    if (q.count < 0 || q.count > c.rallies_per_game) fail("qualified count out of range");
  }
}

SynthMatch generate_match(const SynthConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  Rng noise(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  const ScoringRules rules;

  SynthMatch out;
  TrackSet& tracks = out.tracks;
  GroundTruth& truth = out.truth;
  tracks.meta = {0, cfg.fps, cfg.width, cfg.height, ""};
  tracks.court = cfg.court;

  std::vector<Point2> ball_frames;  // exact positions, indexed by frame
  std::vector<bool> has_ball;
  std::vector<bool> in_play;
  auto ensure = [&](int frames) {
    if (static_cast<int>(ball_frames.size()) < frames) {
      ball_frames.resize(static_cast<std::size_t>(frames));
      has_ball.resize(static_cast<std::size_t>(frames), false);
      in_play.resize(static_cast<std::size_t>(frames), false);
    }
  };

  truth.score_states.push_back({0, 0, 0});
  int cursor = rng.integer(40, 60);
  int last_display = 0;
  for (int g = 0; g < cfg.games; ++g) {
    const PlayerSide game_server = g % 2 == 0 ? cfg.first_server : opponent(cfg.first_server);
    const int n = cfg.rallies_per_game;

    std::vector<PlayerSide> winners;
    std::vector<PlayerSide> servers;
    std::vector<bool> qualified(static_cast<std::size_t>(n), false);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error(ErrorCode::kInvalidArgument, "qualified plan cannot be met");
      winners = game_winners(rng, n);
      servers.clear();
      int a = 0;
      int b = 0;
      std::vector<int> candidates;
      for (int i = 0; i < n; ++i) {
        servers.push_back(rules.server_at(a, b, game_server));
        const PlayerSide w = winners[static_cast<std::size_t>(i)];
        if (cfg.qualified && servers.back() == cfg.qualified->server && w == cfg.qualified->winner) {
          candidates.push_back(i);
        }
        (w == PlayerSide::kA ? a : b) += 1;
      }
      if (!cfg.qualified) break;
      if (static_cast<int>(candidates.size()) < cfg.qualified->count) continue;
      rng.shuffle(candidates);
      for (int k = 0; k < cfg.qualified->count; ++k) qualified[static_cast<std::size_t>(candidates[k])] = true;
      break;
    }

    int a = 0;
    int b = 0;
    for (int i = 0; i < n; ++i) {
      const PlayerSide server = servers[static_cast<std::size_t>(i)];
      const PlayerSide winner = winners[static_cast<std::size_t>(i)];
      int strokes = 0;
      if (cfg.qualified) {
        strokes = qualified[static_cast<std::size_t>(i)] ? rng.integer(cfg.qualified->min_strokes, cfg.max_strokes)
                                                         : rng.integer(1, cfg.qualified->min_strokes - 1);
      } else {
        strokes = rng.integer(cfg.min_strokes, cfg.max_strokes);
      }
      // The last stroke lands when its hitter wins the point.
      auto lands = [&](int s) { return (s % 2 == 1 ? server : opponent(server)) == winner; };
      auto bounce_count = [&](int s) { return lands(s) ? (s == 1 ? 2 : s + 1) : (s == 1 ? 0 : s); };
      if (!cfg.qualified && strokes > 1 && bounce_count(strokes) > cfg.max_strokes) --strokes;

      TruthRally rally;
      rally.index = static_cast<int>(truth.rallies.size());
      rally.game_index = g;
      rally.server = server;
      rally.winner = winner;
      rally.strokes = strokes;
      rally.score_a = a;
      rally.score_b = b;
      rally.qualified = qualified[static_cast<std::size_t>(i)];

      RallyBuilder builder(rng, cfg);
      rally.bounces = builder.build(cursor, server, strokes, lands(strokes), rally.index);
      rally.frame_start = builder.keys.front().frame;
      rally.frame_end = builder.keys.back().frame;
      const auto path = builder.trajectory();
      ensure(rally.frame_end + 1);
      for (int f = rally.frame_start; f <= rally.frame_end; ++f) {
        ball_frames[static_cast<std::size_t>(f)] = path[static_cast<std::size_t>(f - rally.frame_start)];
        has_ball[static_cast<std::size_t>(f)] = true;
        in_play[static_cast<std::size_t>(f)] = true;
      }
      truth.events.insert(truth.events.end(), builder.events.begin(), builder.events.end());

      for (int f = rally.frame_start; f <= rally.frame_end; ++f) {
        std::vector<std::pair<PoseBox, PlayerSide>> boxes;
        for (PlayerSide s : {PlayerSide::kA, PlayerSide::kB}) {
          const auto& contacts = builder.contacts[s == PlayerSide::kA ? 0 : 1];
          boxes.emplace_back(player_box(noise, cfg, s, hand_at(contacts, s, f)), s);
        }
        if (noise.chance(cfg.distractor_rate)) boxes.emplace_back(distractor_box(noise), PlayerSide::kNone);
        noise.shuffle(boxes);
        PoseFrame pf;
        pf.frame = f;
        std::vector<PlayerSide> sides;
        for (auto& [box, side] : boxes) {
          pf.boxes.push_back(box);
          sides.push_back(side);
        }
        tracks.poses.push_back(std::move(pf));
        truth.box_sides[f] = std::move(sides);
      }

      (winner == PlayerSide::kA ? a : b) += 1;
      const int display = rally.frame_end + rng.integer(30, 50);
      truth.score_states.push_back({display, a, b});
      last_display = display;
      truth.rallies.push_back(rally);

      const bool game_break = i == n - 1 && g + 1 < cfg.games;
      if (game_break) {
        const int reset = rally.frame_end + rng.integer(80, 120);
        truth.score_states.push_back({reset, 0, 0});
        last_display = reset;
        cursor = rally.frame_end + rng.integer(160, 220);
      } else {
        cursor = rally.frame_end + rng.integer(60, 120);
      }
    }
  }
  const int frame_count = std::max(truth.rallies.back().frame_end, last_display) + 60;
  ensure(frame_count);
  tracks.meta.frame_count = frame_count;

  for (int f = 0; f < frame_count; ++f) {
    const auto i = static_cast<std::size_t>(f);
    if (!has_ball[i]) continue;
    const bool dropped = noise.chance(cfg.ball_dropout_rate);
    double x = ball_frames[i].x;
    double y = ball_frames[i].y;
    if (cfg.ball_jitter_px > 0.0) {
      x += cfg.ball_jitter_px * noise.normal();
      y += cfg.ball_jitter_px * noise.normal();
    }
    if (!dropped) tracks.ball.samples.push_back({f, x, y, 0.9});
  }

  std::size_t state = 0;
  for (int f = 0; f < frame_count; f += cfg.score_interval) {
    while (state + 1 < truth.score_states.size() && truth.score_states[state + 1].frame <= f) ++state;
    ScoreReading r{f, truth.score_states[state].score_a, truth.score_states[state].score_b, 0.0};
    if (noise.chance(cfg.ocr_corruption_rate)) {
      r.score_a = noise.integer(0, 20);
      r.score_b = noise.integer(0, 20);
    }
    r.confidence = noise.uniform(0.6, 1.0);
    tracks.scores.push_back(r);
  }

  for (int f = 0; f < frame_count; ++f) {
    bool label = in_play[static_cast<std::size_t>(f)];
    if (noise.chance(cfg.scene_flip_rate)) label = !label;
    tracks.scenes.push_back({f, label});
  }

  std::stable_sort(truth.events.begin(), truth.events.end(),
                   [](const TruthEvent& l, const TruthEvent& r) { return l.frame < r.frame; });
  return out;
}

std::string serialize_ground_truth(const GroundTruth& truth) {
  std::string out;
  auto line = [&](const Json& j) {
    out += j.dump();
    out += '\n';
  };
  for (const auto& r : truth.rallies) {
    line({{"kind", "rally"},
          {"index", r.index},
          {"game_index", r.game_index},
          {"frame_start", r.frame_start},
          {"frame_end", r.frame_end},
          {"server", side_name(r.server)},
          {"winner", side_name(r.winner)},
          {"strokes", r.strokes},
          {"bounces", r.bounces},
          {"score_a", r.score_a},
          {"score_b", r.score_b},
          {"qualified", r.qualified}});
  }
  for (const auto& e : truth.events) {
    line({{"kind", "event"},
          {"type", event_type_name(e.type)},
          {"frame", e.frame},
          {"x", e.position.x},
          {"y", e.position.y},
          {"side", side_name(e.side)},
          {"rally_index", e.rally_index}});
  }
  for (const auto& s : truth.score_states) {
    line({{"kind", "score"}, {"frame", s.frame}, {"a", s.score_a}, {"b", s.score_b}});
  }
  for (const auto& [frame, sides] : truth.box_sides) {
    Json names = Json::array();
    for (PlayerSide s : sides) names.push_back(side_name(s));
    line({{"kind", "boxes"}, {"frame", frame}, {"sides", names}});
  }
  return out;
}

GroundTruth parse_ground_truth(std::string_view text) {
  GroundTruth truth;
  auto side = [](const Json& j) {
    auto s = parse_side(j.get<std::string>());
    if (!s) throw Error(ErrorCode::kInvalidArgument, "bad side in ground truth");
    return *s;
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (raw.empty()) continue;
    try {
      const Json j = Json::parse(raw);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "rally") {
        TruthRally r;
        r.index = j.at("index").get<int>();
        r.game_index = j.at("game_index").get<int>();
        r.frame_start = j.at("frame_start").get<int>();
        r.frame_end = j.at("frame_end").get<int>();
        r.server = side(j.at("server"));
        r.winner = side(j.at("winner"));
        r.strokes = j.at("strokes").get<int>();
        r.bounces = j.at("bounces").get<int>();
        r.score_a = j.at("score_a").get<int>();
        r.score_b = j.at("score_b").get<int>();
        r.qualified = j.at("qualified").get<bool>();
        truth.rallies.push_back(r);
      } else if (kind == "event") {
        TruthEvent e;
        auto type = parse_event_type(j.at("type").get<std::string>());
        if (!type) throw Error(ErrorCode::kInvalidArgument, "bad event type in ground truth");
        e.type = *type;
        e.frame = j.at("frame").get<int>();
        e.position = {j.at("x").get<double>(), j.at("y").get<double>()};
        e.side = side(j.at("side"));
        e.rally_index = j.at("rally_index").get<int>();
        truth.events.push_back(e);
      } else if (kind == "score") {
        truth.score_states.push_back({j.at("frame").get<int>(), j.at("a").get<int>(), j.at("b").get<int>()});
      } else if (kind == "boxes") {
        std::vector<PlayerSide> sides;
        for (const auto& s : j.at("sides")) sides.push_back(side(s));
        truth.box_sides[j.at("frame").get<int>()] = std::move(sides);
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown ground truth record '" + kind + "'");
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad ground truth line: ") + e.what());
    }
  }
  return truth;
}

MatchState truth_match_state(const GroundTruth& truth, const MatchInfo& info) {
  MatchState state;
  state.info = info;
  std::vector<std::string> ids;
  for (const auto& r : truth.rallies) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "r%03d", r.index);
    RallySpan span;
    span.rally_id = info.match_id + "-" + buf;
    span.game_index = r.game_index;
    span.frame_start = r.frame_start;
    span.frame_end = r.frame_end;
    span.server = r.server;
    span.winner = r.winner;
    span.score_a = r.score_a;
    span.score_b = r.score_b;
    ids.push_back(span.rally_id);
    state.rallies.push_back(span);

    EventAnchor whole;
    whole.anchor_id = span.rally_id + "-rally";
    whole.rally_id = span.rally_id;
    whole.event_type = EventType::kRally;
    whole.frame_start = span.frame_start;
    whole.frame_end = span.frame_end;
    whole.status = AnchorStatus::kCalibrated;
    state.anchors[whole.anchor_id] = whole;
  }
  std::map<std::pair<int, EventType>, int> counters;
  for (const auto& e : truth.events) {
    const std::string& rally_id = ids.at(static_cast<std::size_t>(e.rally_index));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "-%c%02d", e.type == EventType::kHit ? 'h' : 'b',
                  counters[{e.rally_index, e.type}]++);
    EventAnchor a;
    a.anchor_id = rally_id + buf;
    a.rally_id = rally_id;
    a.event_type = e.type;
    a.frame_start = a.frame_end = e.frame;
    a.position = e.position;
    a.status = AnchorStatus::kCalibrated;
    state.anchors[a.anchor_id] = a;
  }
  return state;
}

}  // namespace rallyanchor
