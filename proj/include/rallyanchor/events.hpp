#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "rallyanchor/track.hpp"
#include "rallyanchor/types.hpp"

namespace rallyanchor {

struct VelocitySample {
  Point2 position;  // raw (unsmoothed) ball position at this frame
  double vx = 0.0;  // pixels per frame
  double vy = 0.0;
};

// Dense over [first_frame, first_frame + size); undefined entries are empty.
class VelocitySeries {
 public:
  VelocitySeries() = default;
  VelocitySeries(int first_frame, std::vector<std::optional<VelocitySample>> values)
      : first_frame_(first_frame), values_(std::move(values)) {}

  int first_frame() const { return first_frame_; }
  int end_frame() const { return first_frame_ + static_cast<int>(values_.size()); }
  const std::optional<VelocitySample>& at(int frame) const;
  std::size_t defined_count() const;

 private:
  int first_frame_ = 0;
  std::vector<std::optional<VelocitySample>> values_;
};

inline constexpr int kDefaultVelocitySmoothing = 3;

// Central difference of a moving-average smoothed track. A frame is defined
// when every sample the smoothing and the difference touch is present.
VelocitySeries velocity(const BallTrack& track, int smoothing_window = kDefaultVelocitySmoothing);

struct PlayerObservation {
  Point2 center;
  Point2 neck;
  std::vector<Point2> hands;  // zero, one or two
};

struct PlayerFrame {
  int frame = 0;
  std::optional<PlayerObservation> side_a;
  std::optional<PlayerObservation> side_b;

  const std::optional<PlayerObservation>& side(PlayerSide s) const {
    return s == PlayerSide::kA ? side_a : side_b;
  }
};

struct PlayerTracks {
  Point2 center_a;  // cluster means
  Point2 center_b;
  std::vector<PlayerFrame> frames;  // increasing frame order

  const PlayerFrame* find(int frame) const;
};

struct AssignParams {
  double outlier_sigmas = 3.0;
  // Lower bound on the cluster spread. A player who holds still for part of
  // a rally would otherwise shrink the median spread until their own
  // extreme positions count as outliers.
  double min_sigma_px = 40.0;
  int max_iterations = 100;

  bool operator==(const AssignParams&) const = default;
};

// Two-means clustering of box centers, seeded from the mean per-frame
// leftmost and rightmost boxes. Each cluster's spread is estimated robustly
// (median center, scaled MAD) and boxes beyond `outlier_sigmas` of both
// clusters are dropped. Clusters map to sides by mean x against the net.
// The robust spread tolerates distractors that appear in a minority of frames.
// Throws Error(kDegenerateClusters) when both clusters fall on one side or
// there are fewer than two distinct centers.
PlayerTracks assign_players(std::span<const PoseFrame> poses, const CourtRegion& court,
                            const AssignParams& params = {});

// Per frame and side: distance from the ball to the nearer visible hand,
// falling back to the neck.
class DistanceSeries {
 public:
  DistanceSeries() = default;
  DistanceSeries(int first_frame, std::vector<std::array<std::optional<double>, 2>> values)
      : first_frame_(first_frame), values_(std::move(values)) {}

  int first_frame() const { return first_frame_; }
  int end_frame() const { return first_frame_ + static_cast<int>(values_.size()); }
  std::optional<double> at(int frame, PlayerSide side) const;

 private:
  int first_frame_ = 0;
  std::vector<std::array<std::optional<double>, 2>> values_;
};

DistanceSeries hand_distance(const BallTrack& track, const PlayerTracks& players);

struct RawEvent {
  EventType type = EventType::kHit;
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  PlayerSide side = PlayerSide::kNone;
  double confidence = 0.0;

  bool operator==(const RawEvent&) const = default;
};

enum class Axis { kX, kY };

struct DetectParams {
  int smoothing_window = kDefaultVelocitySmoothing;
  int minimum_window = 3;           // +- frames searched for a distance minimum
  double max_hand_distance = 120.0; // at reference_width, scaled with video width
  double reference_width = 1280.0;
  int merge_gap = 4;                // same-type events within this many frames merge
  Axis hit_axis = Axis::kX;

  bool operator==(const DetectParams&) const = default;
};

double scaled_max_distance(const DetectParams& params, int video_width);

// Hits: reversal of the hit-axis velocity with a ball-to-player distance
// minimum of at most `max_distance` within +-minimum_window frames.
// Reversal candidates are merged before gating, so raising `max_distance`
// never removes a hit. Confidence is the reversal strength in [0, 1).
std::vector<RawEvent> detect_hits(const VelocitySeries& vel, const DistanceSeries& dist,
                                  const DetectParams& params, double max_distance);

// Bounces: vy turning from downward to upward with the ball inside the table
// band and the table's x range. Merge happens before gating, so shrinking
// the band never adds a bounce.
std::vector<RawEvent> detect_bounces(const VelocitySeries& vel, const CourtRegion& court,
                                     const DetectParams& params);

// Ball speed in pixels per frame; throws Error(kUndefinedAtFrame).
double estimate_speed(const BallTrack& track, int frame,
                      int smoothing_window = kDefaultVelocitySmoothing);

}  // namespace rallyanchor
