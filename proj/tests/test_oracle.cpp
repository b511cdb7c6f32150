#include <gtest/gtest.h>

#include "rallyanchor/error.hpp"
#include "rallyanchor/oracle.hpp"

using namespace rallyanchor;

namespace {

SynthConfig noisy(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.games = 2;
  cfg.ball_jitter_px = 1.0;
  cfg.ball_dropout_rate = 0.05;
  cfg.ocr_corruption_rate = 0.1;
  cfg.scene_flip_rate = 0.05;
  cfg.hand_dropout_rate = 0.1;
  cfg.distractor_rate = 0.05;
  return cfg;
}

}  // namespace

TEST(Generator, DeterministicInSeed) {
  const SynthMatch a = generate_match(noisy(5));
  const SynthMatch b = generate_match(noisy(5));
  EXPECT_EQ(serialize_track_file(a.tracks), serialize_track_file(b.tracks));
  EXPECT_EQ(serialize_ground_truth(a.truth), serialize_ground_truth(b.truth));
  EXPECT_NE(serialize_track_file(generate_match(noisy(6)).tracks), serialize_track_file(a.tracks));
}

TEST(Generator, StructureIndependentOfNoise) {
  SynthConfig clean;
  clean.seed = 5;
  clean.games = 2;
  EXPECT_EQ(generate_match(clean).truth.rallies, generate_match(noisy(5)).truth.rallies);
  EXPECT_EQ(generate_match(clean).truth.events, generate_match(noisy(5)).truth.events);
}

TEST(Generator, ZeroNoiseValidates) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    EXPECT_TRUE(validate(generate_match(cfg).tracks).ok());
  }
}

TEST(Generator, BounceCountsWithinFiveToNine) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.games = 2;
    const SynthMatch m = generate_match(cfg);
    for (const auto& r : m.truth.rallies) {
      EXPECT_GE(r.bounces, 5) << "seed " << seed << " rally " << r.index;
      EXPECT_LE(r.bounces, 9) << "seed " << seed << " rally " << r.index;
    }
  }
}

TEST(Generator, TruthIsConsistent) {
  const ScoringRules rules;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.games = 3;
    cfg.rallies_per_game = 12 + static_cast<int>(seed % 2) * 12;  // 12 or 24
    const SynthMatch m = generate_match(cfg);
    ASSERT_EQ(m.truth.rallies.size(), static_cast<std::size_t>(cfg.games * cfg.rallies_per_game));
    int a = 0;
    int b = 0;
    int game = 0;
    for (const auto& r : m.truth.rallies) {
      if (r.game_index != game) {
        EXPECT_TRUE(rules.is_game_over(a, b));
        game = r.game_index;
        a = b = 0;
      }
      EXPECT_FALSE(rules.is_game_over(a, b));
      EXPECT_EQ(r.score_a, a);
      EXPECT_EQ(r.score_b, b);
      const PlayerSide first = game % 2 == 0 ? cfg.first_server : opponent(cfg.first_server);
      EXPECT_EQ(r.server, rules.server_at(a, b, first));
      (r.winner == PlayerSide::kA ? a : b) += 1;

      int hits = 0;
      int bounces = 0;
      PlayerSide expected_hitter = r.server;
      for (const auto& e : m.truth.events) {
        if (e.rally_index != r.index) continue;
        EXPECT_GE(e.frame, r.frame_start);
        EXPECT_LE(e.frame, r.frame_end);
        if (e.type == EventType::kHit) {
          EXPECT_EQ(e.side, expected_hitter);
          expected_hitter = opponent(expected_hitter);
          ++hits;
        } else {
          ++bounces;
        }
      }
      EXPECT_EQ(hits, r.strokes);
      EXPECT_EQ(bounces, r.bounces);
    }
    EXPECT_TRUE(rules.is_game_over(a, b));
  }
}

TEST(Generator, QualifiedPlanExactCount) {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.rallies_per_game = 24;
  cfg.games = 2;
  cfg.min_strokes = 1;
  cfg.qualified = QualifiedPlan{PlayerSide::kA, PlayerSide::kA, 3, 2};
  const SynthMatch m = generate_match(cfg);
  for (int g = 0; g < 2; ++g) {
    int satisfied = 0;
    int flagged = 0;
    for (const auto& r : m.truth.rallies) {
      if (r.game_index != g) continue;
      const bool ok = r.server == PlayerSide::kA && r.winner == PlayerSide::kA && r.strokes >= 3;
      satisfied += ok;
      flagged += r.qualified;
      EXPECT_EQ(ok, r.qualified);
    }
    EXPECT_EQ(satisfied, 2);
    EXPECT_EQ(flagged, 2);
  }
}

TEST(Generator, ConfigChecks) {
  SynthConfig cfg;
  cfg.ocr_corruption_rate = 1.5;
  EXPECT_THROW(check_config(cfg), Error);
  cfg = SynthConfig{};
  cfg.rallies_per_game = 21;
  EXPECT_THROW(generate_match(cfg), Error);
  cfg = SynthConfig{};
  cfg.ball_jitter_px = -1;
  EXPECT_THROW(check_config(cfg), Error);
  cfg = SynthConfig{};
  cfg.qualified = QualifiedPlan{PlayerSide::kA, PlayerSide::kA, 1, 2};
  EXPECT_THROW(check_config(cfg), Error);
  EXPECT_NO_THROW(check_config(SynthConfig{}));
}

TEST(GroundTruth, RoundTrip) {
  const SynthMatch m = generate_match(noisy(8));
  const std::string text = serialize_ground_truth(m.truth);
  const GroundTruth back = parse_ground_truth(text);
  EXPECT_EQ(back, m.truth);
  EXPECT_EQ(serialize_ground_truth(back), text);
}

TEST(GroundTruth, MatchStateMirrorsTruth) {
  SynthConfig cfg;
  cfg.seed = 4;
  const SynthMatch m = generate_match(cfg);
  const MatchState s = truth_match_state(m.truth, {"mx", m.tracks.meta});
  ASSERT_EQ(s.rallies.size(), m.truth.rallies.size());
  EXPECT_EQ(s.rallies[0].rally_id, "mx-r000");
  EXPECT_EQ(s.anchors.size(), m.truth.events.size() + m.truth.rallies.size());
  EXPECT_EQ(s.anchors.at("mx-r000-h00").frame_start, m.truth.events.front().frame);
  for (const auto& [id, a] : s.anchors) EXPECT_EQ(a.status, AnchorStatus::kCalibrated);
}
