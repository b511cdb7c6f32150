#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rallyanchor/events.hpp"
#include "rallyanchor/oracle.hpp"

namespace rallyanchor {

inline constexpr int kDefaultMatchTolerance = 3;

struct EventPoint {
  EventType type = EventType::kHit;
  int frame = 0;
  Point2 position;
};

EventPoint to_point(const RawEvent& event);
EventPoint to_point(const TruthEvent& event);

struct MatchedPair {
  std::size_t detected = 0;
  std::size_t truth = 0;
};

struct EventMatching {
  std::vector<MatchedPair> pairs;
  std::size_t unmatched_detected = 0;
  std::size_t unmatched_truth = 0;
};

// One-to-one matching of same-type events: candidate pairs within
// `tolerance` frames are taken in order of increasing frame distance
// (ties by truth frame, then detected frame).
EventMatching match_events(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                           int tolerance = kDefaultMatchTolerance);

struct ErrorStats {
  std::size_t matched = 0;
  std::size_t unmatched_detected = 0;
  std::size_t unmatched_truth = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double max = 0.0;
};

// |frame_detected - frame_true| over matched pairs.
ErrorStats temporal_error(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                          int tolerance = kDefaultMatchTolerance);

// Euclidean pixel distance over matched pairs.
ErrorStats spatial_error(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                         int tolerance = kDefaultMatchTolerance);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// An empty detection list has precision 1 only if there is nothing to find;
// an empty truth list has recall 1.
PrecisionRecall precision_recall(std::span<const EventPoint> detected,
                                 std::span<const EventPoint> truth,
                                 int tolerance = kDefaultMatchTolerance);

}  // namespace rallyanchor
