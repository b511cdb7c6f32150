#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rallyanchor/error.hpp"
#include "rallyanchor/events.hpp"
#include "rallyanchor/metrics.hpp"
#include "rallyanchor/oracle.hpp"

using namespace rallyanchor;

namespace {

BallTrack track_of(int first, int last, const std::function<Point2(int)>& path) {
  BallTrack t;
  for (int f = first; f <= last; ++f) {
    const Point2 p = path(f);
    t.samples.push_back({f, p.x, p.y, 0.9});
  }
  return t;
}

PoseBox box_at(double cx, double cy, std::optional<Point2> hand = std::nullopt) {
  PoseBox b;
  b.cx = cx;
  b.cy = cy;
  b.w = 90;
  b.h = 200;
  b.neck = {cx, cy - 70, 0.9};
  if (hand) b.right_hand = Keypoint{hand->x, hand->y, 0.9};
  return b;
}

// Players standing still with their playing hand at a fixed point.
PlayerTracks fixed_players(int first, int last, Point2 hand_a, Point2 hand_b) {
  PlayerTracks p;
  p.center_a = {hand_a.x - 50, hand_a.y + 30};
  p.center_b = {hand_b.x + 50, hand_b.y + 30};
  for (int f = first; f <= last; ++f) {
    PlayerFrame pf;
    pf.frame = f;
    pf.side_a = PlayerObservation{p.center_a, {hand_a.x - 50, hand_a.y - 40}, {hand_a}};
    pf.side_b = PlayerObservation{p.center_b, {hand_b.x + 50, hand_b.y - 40}, {hand_b}};
    p.frames.push_back(pf);
  }
  return p;
}

BallTrack slice(const BallTrack& t, int from, int to) {
  BallTrack out;
  for (const auto& s : t.samples) {
    if (s.frame >= from && s.frame <= to) out.samples.push_back(s);
  }
  return out;
}

std::vector<PoseFrame> slice(const std::vector<PoseFrame>& poses, int from, int to) {
  std::vector<PoseFrame> out;
  for (const auto& p : poses) {
    if (p.frame >= from && p.frame <= to) out.push_back(p);
  }
  return out;
}

struct RallyRun {
  std::vector<RawEvent> hits;
  std::vector<RawEvent> bounces;
  std::vector<TruthEvent> truth;
};

RallyRun run_rally(const SynthMatch& m, const TruthRally& r, const DetectParams& params = {}) {
  const BallTrack ball = interpolate_ball(slice(m.tracks.ball, r.frame_start, r.frame_end));
  const auto poses = slice(m.tracks.poses, r.frame_start, r.frame_end);
  const PlayerTracks players = assign_players(poses, *m.tracks.court);
  const VelocitySeries vel = velocity(ball, params.smoothing_window);
  RallyRun out;
  out.hits = detect_hits(vel, hand_distance(ball, players), params,
                         scaled_max_distance(params, m.tracks.meta.width));
  out.bounces = detect_bounces(vel, *m.tracks.court, params);
  for (const auto& e : m.truth.events) {
    if (e.rally_index == r.index) out.truth.push_back(e);
  }
  return out;
}

}  // namespace

TEST(Velocity, UniformMotion) {
  const VelocitySeries v = velocity(track_of(0, 30, [](int t) { return Point2{2.0 * t, 100}; }));
  EXPECT_GT(v.defined_count(), 20u);
  for (int f = v.first_frame(); f < v.end_frame(); ++f) {
    if (!v.at(f)) continue;
    EXPECT_DOUBLE_EQ(v.at(f)->vx, 2.0);
    EXPECT_DOUBLE_EQ(v.at(f)->vy, 0.0);
  }
}

TEST(Velocity, Stationary) {
  const VelocitySeries v = velocity(track_of(5, 25, [](int) { return Point2{300, 300}; }));
  for (int f = 5; f <= 25; ++f) {
    if (!v.at(f)) continue;
    EXPECT_EQ(v.at(f)->vx, 0.0);
    EXPECT_EQ(v.at(f)->vy, 0.0);
  }
  EXPECT_FALSE(v.at(5).has_value());   // smoothing needs neighbours
  EXPECT_TRUE(v.at(15).has_value());
}

TEST(Velocity, GapsLeaveFramesUndefined) {
  BallTrack t = track_of(0, 40, [](int f) { return Point2{3.0 * f, 10}; });
  t.samples.erase(t.samples.begin() + 20);
  const VelocitySeries v = velocity(t);
  for (int f = 18; f <= 22; ++f) EXPECT_FALSE(v.at(f).has_value()) << f;
  EXPECT_TRUE(v.at(10).has_value());
  EXPECT_TRUE(v.at(30).has_value());
}

TEST(Velocity, OracleParabolaMatchesAnalyticDerivative) {
  SynthConfig cfg;
  cfg.seed = 9;
  const SynthMatch m = generate_match(cfg);
  const VelocitySeries v = velocity(m.tracks.ball);
  int checked = 0;
  for (std::size_t i = 1; i < m.truth.events.size(); ++i) {
    const TruthEvent& a = m.truth.events[i - 1];
    const TruthEvent& b = m.truth.events[i];
    if (a.rally_index != b.rally_index) continue;
    // consecutive events are consecutive key points of one ballistic leg
    const double T = b.frame - a.frame;
    const double vy0 = (b.position.y - a.position.y - 0.5 * T * T) / T;
    const double vx = (b.position.x - a.position.x) / T;
    for (int t = 2; t <= b.frame - a.frame - 2; ++t) {
      const auto& s = v.at(a.frame + t);
      ASSERT_TRUE(s.has_value());
      EXPECT_NEAR(s->vy, vy0 + t, 0.5);
      EXPECT_NEAR(s->vx, vx, 0.5);
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(AssignPlayers, TwoFixedPlayers) {
  std::vector<PoseFrame> poses;
  for (int f = 0; f < 50; ++f) poses.push_back({f, {box_at(1000, 400), box_at(200, 400)}});
  const PlayerTracks p = assign_players(poses, SynthConfig::default_court());
  EXPECT_DOUBLE_EQ(p.center_a.x, 200.0);
  EXPECT_DOUBLE_EQ(p.center_b.x, 1000.0);
  ASSERT_EQ(p.frames.size(), 50u);
  for (const auto& f : p.frames) {
    ASSERT_TRUE(f.side_a && f.side_b);
    EXPECT_DOUBLE_EQ(f.side_a->center.x, 200.0);
    EXPECT_DOUBLE_EQ(f.side_b->center.x, 1000.0);
  }
}

TEST(AssignPlayers, SpectatorFilteredOut) {
  std::mt19937 rng(1);
  std::vector<PoseFrame> poses;
  for (int f = 0; f < 100; ++f) {
    PoseFrame pf{f, {box_at(200 + rng() % 20, 400 + rng() % 10), box_at(1000 + rng() % 20, 400 + rng() % 10)}};
    if (f % 10 == 0) pf.boxes.push_back(box_at(1800, 300));
    poses.push_back(pf);
  }
  const PlayerTracks p = assign_players(poses, SynthConfig::default_court());
  EXPECT_LT(p.center_b.x, 1030.0);
  for (const auto& f : p.frames) {
    ASSERT_TRUE(f.side_a && f.side_b);
    EXPECT_LT(f.side_b->center.x, 1100.0);
  }
}

TEST(AssignPlayers, OneSidedIsDegenerate) {
  std::vector<PoseFrame> poses;
  for (int f = 0; f < 20; ++f) poses.push_back({f, {box_at(100, 400), box_at(500, 400)}});
  try {
    assign_players(poses, SynthConfig::default_court());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateClusters);
  }
  std::vector<PoseFrame> single = {{0, {box_at(100, 400)}}};
  EXPECT_THROW(assign_players(single, SynthConfig::default_court()), Error);
}

TEST(AssignPlayers, EqualsOracleLabelsWithDistractors) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.distractor_rate = 0.2;
    cfg.hand_dropout_rate = 0.2;
    const SynthMatch m = generate_match(cfg);
    for (const auto& r : m.truth.rallies) {
      const auto poses = slice(m.tracks.poses, r.frame_start, r.frame_end);
      const PlayerTracks p = assign_players(poses, *m.tracks.court);
      ASSERT_EQ(p.frames.size(), poses.size());
      for (std::size_t i = 0; i < poses.size(); ++i) {
        const auto& sides = m.truth.box_sides.at(poses[i].frame);
        for (std::size_t b = 0; b < sides.size(); ++b) {
          if (sides[b] == PlayerSide::kNone) continue;
          const auto& obs = p.frames[i].side(sides[b]);
          ASSERT_TRUE(obs.has_value()) << "seed " << seed << " frame " << poses[i].frame;
          EXPECT_EQ(obs->center, poses[i].boxes[b].center());
        }
      }
    }
  }
}

TEST(HandDistance, ThreeFourFive) {
  BallTrack ball;
  ball.samples.push_back({0, 100, 100, 0.9});
  PlayerTracks p;
  PlayerFrame pf;
  pf.frame = 0;
  pf.side_a = PlayerObservation{{0, 0}, {500, 500}, {{103, 104}, {400, 400}}};
  pf.side_b = PlayerObservation{{0, 0}, {106, 108}, {}};
  p.frames.push_back(pf);
  const DistanceSeries d = hand_distance(ball, p);
  EXPECT_DOUBLE_EQ(*d.at(0, PlayerSide::kA), 5.0);
  EXPECT_DOUBLE_EQ(*d.at(0, PlayerSide::kB), 10.0);  // neck fallback
  EXPECT_FALSE(d.at(1, PlayerSide::kA).has_value());
}

TEST(HandDistance, EqualsScalarRecompute) {
  SynthConfig cfg;
  cfg.seed = 12;
  cfg.hand_dropout_rate = 0.3;
  const SynthMatch m = generate_match(cfg);
  std::size_t checked = 0;
  for (const auto& r : m.truth.rallies) {
    const BallTrack ball = slice(m.tracks.ball, r.frame_start, r.frame_end);
    const auto poses = slice(m.tracks.poses, r.frame_start, r.frame_end);
    const DistanceSeries d = hand_distance(ball, assign_players(poses, *m.tracks.court));
    for (const auto& pf : poses) {
      const BallSample* s = ball.find(pf.frame);
      ASSERT_NE(s, nullptr);
      const auto& sides = m.truth.box_sides.at(pf.frame);
      for (std::size_t b = 0; b < pf.boxes.size(); ++b) {
        const PoseBox& box = pf.boxes[b];
        double expected = 0.0;
        if (!box.left_hand && !box.right_hand) {
          expected = std::sqrt((s->x - box.neck.x) * (s->x - box.neck.x) + (s->y - box.neck.y) * (s->y - box.neck.y));
        } else {
          expected = 1e300;
          for (const auto& h : {box.left_hand, box.right_hand}) {
            if (!h) continue;
            expected = std::min(expected, std::sqrt((s->x - h->x) * (s->x - h->x) + (s->y - h->y) * (s->y - h->y)));
          }
        }
        const auto got = d.at(pf.frame, sides[b]);
        ASSERT_TRUE(got.has_value());
        EXPECT_NEAR(*got, expected, 1e-9);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(DetectHits, PingPongSixReversals) {
  // x bounces between 280 and 1000 at 20 px/frame; players hold their hand at the ends
  const int leg = 36;
  std::vector<int> contacts;
  for (int k = 1; k <= 6; ++k) contacts.push_back(10 + k * leg);
  auto path = [&](int f) {
    const int t = f - 10;
    const int phase = ((t % (2 * leg)) + 2 * leg) % (2 * leg);
    const double x = phase <= leg ? 280.0 + 20.0 * phase : 1000.0 - 20.0 * (phase - leg);
    return Point2{x, 380.0};
  };
  const BallTrack ball = track_of(10, 10 + 7 * leg - 5, path);
  const PlayerTracks players = fixed_players(10, 10 + 7 * leg, {280, 380}, {1000, 380});
  const DetectParams params;
  const auto hits = detect_hits(velocity(ball), hand_distance(ball, players), params, 120.0);
  ASSERT_EQ(hits.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_LE(std::abs(hits[i].frame - contacts[i]), 1);
    EXPECT_EQ(hits[i].side, i % 2 == 0 ? PlayerSide::kB : PlayerSide::kA);
    EXPECT_EQ(hits[i].type, EventType::kHit);
  }
}

TEST(DetectHits, NoReversalNoHit) {
  const BallTrack ball = track_of(0, 60, [](int f) { return Point2{300.0 + 12.0 * f, 380}; });
  const PlayerTracks players = fixed_players(0, 60, {300, 380}, {1000, 380});
  EXPECT_TRUE(detect_hits(velocity(ball), hand_distance(ball, players), DetectParams{}, 120.0).empty());
}

TEST(DetectHits, DistanceGate) {
  // one reversal at frame 30, x = 700; nearest hand 300 px away
  const BallTrack ball = track_of(0, 60, [](int f) { return Point2{700.0 - 10.0 * std::abs(f - 30), 380}; });
  const PlayerTracks far = fixed_players(0, 60, {100, 380}, {1000, 380});
  EXPECT_TRUE(detect_hits(velocity(ball), hand_distance(ball, far), DetectParams{}, 120.0).empty());
  const PlayerTracks near = fixed_players(0, 60, {100, 380}, {710, 380});
  const auto hits = detect_hits(velocity(ball), hand_distance(ball, near), DetectParams{}, 120.0);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].frame, 30);
  EXPECT_EQ(hits[0].side, PlayerSide::kB);
}

TEST(DetectHits, DistanceScalesWithWidth) {
  DetectParams p;
  EXPECT_DOUBLE_EQ(scaled_max_distance(p, 1280), 120.0);
  EXPECT_DOUBLE_EQ(scaled_max_distance(p, 1920), 180.0);
}

TEST(DetectBounces, LandingAtFrame210) {
  auto path = [](int f) {
    const double t = f - 210;
    return Point2{500.0 + 5.0 * t, 430.0 - 6.0 * std::abs(t) + 0.5 * t * t};
  };
  const BallTrack ball = track_of(195, 225, path);
  const auto bounces = detect_bounces(velocity(ball), SynthConfig::default_court(), DetectParams{});
  ASSERT_EQ(bounces.size(), 1u);
  EXPECT_LE(std::abs(bounces[0].frame - 210), 1);
  EXPECT_LE(distance({bounces[0].x, bounces[0].y}, {500, 430}), 2.0);
  EXPECT_EQ(bounces[0].side, PlayerSide::kA);
}

TEST(DetectBounces, BandGate) {
  auto lob = [](int f) {
    const double t = f - 210;
    return Point2{500.0 + 5.0 * t, 300.0 - 6.0 * std::abs(t) + 0.5 * t * t};
  };
  const BallTrack ball = track_of(195, 225, lob);
  EXPECT_TRUE(detect_bounces(velocity(ball), SynthConfig::default_court(), DetectParams{}).empty());
  // beyond the table end
  auto wide = [](int f) {
    const double t = f - 210;
    return Point2{1000.0 + 5.0 * t, 430.0 - 6.0 * std::abs(t) + 0.5 * t * t};
  };
  const BallTrack off = track_of(195, 225, wide);
  EXPECT_TRUE(detect_bounces(velocity(off), SynthConfig::default_court(), DetectParams{}).empty());
}

TEST(DetectBounces, OracleRallyWithSevenBounces) {
  int found = 0;
  for (std::uint64_t seed = 1; seed <= 20 && found < 3; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    const SynthMatch m = generate_match(cfg);
    for (const auto& r : m.truth.rallies) {
      if (r.bounces != 7) continue;
      const RallyRun run = run_rally(m, r);
      std::vector<EventPoint> truth;
      std::vector<EventPoint> detected;
      for (const auto& e : run.truth) {
        if (e.type == EventType::kBounce) truth.push_back(to_point(e));
      }
      for (const auto& e : run.bounces) detected.push_back(to_point(e));
      ASSERT_EQ(truth.size(), 7u);
      EXPECT_EQ(detected.size(), 7u);
      const auto pr = precision_recall(detected, truth);
      EXPECT_EQ(pr.precision, 1.0);
      EXPECT_EQ(pr.recall, 1.0);
      ++found;
    }
  }
  EXPECT_GT(found, 0);
}

TEST(DetectEvents, OracleHitsExactAtZeroNoise) {
  SynthConfig cfg;
  cfg.seed = 5;
  const SynthMatch m = generate_match(cfg);
  for (const auto& r : m.truth.rallies) {
    const RallyRun run = run_rally(m, r);
    std::vector<TruthEvent> hits;
    for (const auto& e : run.truth) {
      if (e.type == EventType::kHit) hits.push_back(e);
    }
    ASSERT_EQ(run.hits.size(), hits.size()) << "rally " << r.index;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      EXPECT_EQ(run.hits[i].frame, hits[i].frame);
      EXPECT_EQ(run.hits[i].side, hits[i].side);
    }
  }
}

TEST(DetectEvents, MonotoneInGates) {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.ball_jitter_px = 2.0;
  cfg.ball_dropout_rate = 0.05;
  const SynthMatch m = generate_match(cfg);
  const CourtRegion court = *m.tracks.court;
  for (const auto& r : m.truth.rallies) {
    const BallTrack ball = interpolate_ball(slice(m.tracks.ball, r.frame_start, r.frame_end));
    const PlayerTracks players = assign_players(slice(m.tracks.poses, r.frame_start, r.frame_end), court);
    const VelocitySeries vel = velocity(ball);
    const DistanceSeries dist = hand_distance(ball, players);
    std::vector<RawEvent> previous;
    for (double d : {10.0, 40.0, 80.0, 120.0, 200.0, 400.0}) {
      const auto hits = detect_hits(vel, dist, DetectParams{}, d);
      for (const auto& h : previous) {
        EXPECT_NE(std::find(hits.begin(), hits.end(), h), hits.end()) << "hit lost when raising to " << d;
      }
      previous = hits;
    }
    std::vector<RawEvent> wider = detect_bounces(vel, court, DetectParams{});
    for (double shrink : {2.0, 5.0, 8.0}) {
      CourtRegion narrow = court;
      narrow.table_y_min += shrink;
      narrow.table_y_max -= shrink;
      const auto fewer = detect_bounces(vel, narrow, DetectParams{});
      for (const auto& b : fewer) EXPECT_NE(std::find(wider.begin(), wider.end(), b), wider.end());
      wider = fewer;
    }
  }
}

TEST(DetectEvents, MergeGapSeparatesSameType) {
  SynthConfig cfg;
  cfg.seed = 8;
  cfg.ball_jitter_px = 3.0;
  const SynthMatch m = generate_match(cfg);
  for (const auto& r : m.truth.rallies) {
    const RallyRun run = run_rally(m, r);
    for (const auto* list : {&run.hits, &run.bounces}) {
      for (std::size_t i = 1; i < list->size(); ++i) {
        EXPECT_GT((*list)[i].frame - (*list)[i - 1].frame, DetectParams{}.merge_gap);
      }
    }
  }
}

TEST(DetectEvents, Deterministic) {
  SynthConfig cfg;
  cfg.seed = 14;
  cfg.ball_jitter_px = 1.0;
  cfg.distractor_rate = 0.1;
  const SynthMatch m = generate_match(cfg);
  const TruthRally& r = m.truth.rallies[3];
  const RallyRun a = run_rally(m, r);
  const RallyRun b = run_rally(m, r);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.bounces, b.bounces);
}

TEST(EstimateSpeed, Examples) {
  EXPECT_DOUBLE_EQ(estimate_speed(track_of(0, 20, [](int f) { return Point2{3.0 * f, 4.0 * f}; }), 10), 5.0);
  EXPECT_DOUBLE_EQ(estimate_speed(track_of(0, 20, [](int) { return Point2{5, 5}; }), 10), 0.0);
  const double twelve = estimate_speed(track_of(0, 40, [](int f) { return Point2{100 + 12.0 * f, 200}; }), 20);
  EXPECT_NEAR(twelve, 12.0, 0.5);
}

TEST(EstimateSpeed, UndefinedFrame) {
  const BallTrack t = track_of(0, 20, [](int f) { return Point2{1.0 * f, 0}; });
  for (int frame : {0, 1, 19, 100}) {
    try {
      estimate_speed(t, frame);
      FAIL() << frame;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUndefinedAtFrame);
    }
  }
}
