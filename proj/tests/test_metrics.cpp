#include <gtest/gtest.h>

#include "rallyanchor/metrics.hpp"

using namespace rallyanchor;

namespace {

EventPoint hit(int frame, double x = 0, double y = 0) { return {EventType::kHit, frame, {x, y}}; }
EventPoint bounce(int frame, double x = 0, double y = 0) { return {EventType::kBounce, frame, {x, y}}; }

}  // namespace

TEST(PrecisionRecall, Perfect) {
  const std::vector<EventPoint> truth = {hit(10), bounce(20), hit(30)};
  const auto pr = precision_recall(truth, truth);
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  EXPECT_DOUBLE_EQ(pr.recall, 1.0);
}

TEST(PrecisionRecall, TwoOfFourWithOneSpurious) {
  const std::vector<EventPoint> truth = {hit(10), hit(50), hit(90), hit(130)};
  const std::vector<EventPoint> detected = {hit(11), hit(89), hit(300)};
  const auto pr = precision_recall(detected, truth);
  EXPECT_DOUBLE_EQ(pr.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pr.recall, 0.5);
}

TEST(PrecisionRecall, EmptyConventions) {
  const std::vector<EventPoint> none;
  const std::vector<EventPoint> some = {hit(1)};
  EXPECT_DOUBLE_EQ(precision_recall(none, none).precision, 1.0);
  EXPECT_DOUBLE_EQ(precision_recall(none, none).recall, 1.0);
  EXPECT_DOUBLE_EQ(precision_recall(none, some).precision, 0.0);
  EXPECT_DOUBLE_EQ(precision_recall(none, some).recall, 0.0);
  EXPECT_DOUBLE_EQ(precision_recall(some, none).precision, 0.0);
  EXPECT_DOUBLE_EQ(precision_recall(some, none).recall, 1.0);
}

TEST(Matching, TypesNeverMix) {
  const std::vector<EventPoint> truth = {hit(10)};
  const std::vector<EventPoint> detected = {bounce(10)};
  const auto m = match_events(detected, truth);
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.unmatched_detected, 1u);
  EXPECT_EQ(m.unmatched_truth, 1u);
}

TEST(Matching, ToleranceBoundary) {
  const std::vector<EventPoint> truth = {hit(10)};
  EXPECT_EQ(match_events(std::vector<EventPoint>{hit(13)}, truth, 3).pairs.size(), 1u);
  EXPECT_EQ(match_events(std::vector<EventPoint>{hit(14)}, truth, 3).pairs.size(), 0u);
}

TEST(Matching, ClosestPairsFirst) {
  // detected 12 is nearer truth 13 than truth 10; greedy takes (12,13) then (9,10)
  const std::vector<EventPoint> truth = {hit(10), hit(13)};
  const std::vector<EventPoint> detected = {hit(9), hit(12)};
  const auto m = match_events(detected, truth);
  ASSERT_EQ(m.pairs.size(), 2u);
  for (const auto& p : m.pairs) EXPECT_EQ(std::abs(detected[p.detected].frame - truth[p.truth].frame), 1);
}

TEST(Matching, OneToOne) {
  const std::vector<EventPoint> truth = {hit(10)};
  const std::vector<EventPoint> detected = {hit(10), hit(11), hit(9)};
  const auto m = match_events(detected, truth);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].detected, 0u);
  EXPECT_EQ(m.unmatched_detected, 2u);
}

TEST(TemporalError, PerfectShiftedAndEmpty) {
  std::vector<EventPoint> truth;
  for (int i = 0; i < 20; ++i) truth.push_back(i % 2 ? hit(100 * i) : bounce(100 * i));
  EXPECT_DOUBLE_EQ(temporal_error(truth, truth).mean, 0.0);

  std::vector<EventPoint> shifted = truth;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i].frame += i % 2 ? 1 : -1;
  const ErrorStats s = temporal_error(shifted, truth);
  EXPECT_EQ(s.matched, 20u);
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.stddev, 0.0);
  EXPECT_DOUBLE_EQ(s.max, 1.0);

  const ErrorStats none = temporal_error(std::vector<EventPoint>{}, truth);
  EXPECT_EQ(none.matched, 0u);
  EXPECT_EQ(none.unmatched_truth, 20u);
  EXPECT_DOUBLE_EQ(none.mean, 0.0);
}

TEST(TemporalError, PopulationStddev) {
  const std::vector<EventPoint> truth = {hit(0), hit(100)};
  const std::vector<EventPoint> detected = {hit(0), hit(102)};
  const ErrorStats s = temporal_error(detected, truth);
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.stddev, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 2.0);
}

TEST(SpatialError, Examples) {
  const std::vector<EventPoint> truth = {hit(10, 100, 100)};
  EXPECT_DOUBLE_EQ(spatial_error(truth, truth).mean, 0.0);
  const std::vector<EventPoint> off = {hit(10, 103, 104)};
  EXPECT_DOUBLE_EQ(spatial_error(off, truth).mean, 5.0);
  const ErrorStats none = spatial_error(std::vector<EventPoint>{}, truth);
  EXPECT_EQ(none.matched, 0u);
  EXPECT_EQ(none.unmatched_truth, 1u);
}
