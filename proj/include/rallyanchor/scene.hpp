#pragma once

#include <span>
#include <vector>

#include "rallyanchor/track.hpp"

namespace rallyanchor {

// Inclusive frame range of contiguous in-play footage.
struct InPlaySegment {
  int frame_start = 0;
  int frame_end = 0;

  int length() const { return frame_end - frame_start + 1; }
  bool operator==(const InPlaySegment&) const = default;
};

inline constexpr int kDefaultSmoothingWindow = 9;
inline constexpr int kDefaultMinSegmentLength = 25;

// Majority vote over a centered window of odd width; windows are truncated
// at the ends of the sequence and a tied vote keeps the original label.
// Labels are treated as consecutive frames in the given order.
std::vector<SceneLabel> smooth_labels(std::span<const SceneLabel> labels,
                                      int window = kDefaultSmoothingWindow);

// Maximal in-play runs of at least `min_len` frames. A jump in frame numbers
// ends a run.
std::vector<InPlaySegment> segments(std::span<const SceneLabel> labels,
                                    int min_len = kDefaultMinSegmentLength);

}  // namespace rallyanchor
