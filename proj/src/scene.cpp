#include "rallyanchor/scene.hpp"

#include <algorithm>

#include "rallyanchor/error.hpp"

namespace rallyanchor {

std::vector<SceneLabel> smooth_labels(std::span<const SceneLabel> labels, int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing window must be odd and >= 1");
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(labels.size());
  const std::ptrdiff_t half = window / 2;
  // prefix[i] = number of in-play labels among the first i
  std::vector<int> prefix(labels.size() + 1, 0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (labels[i].in_play ? 1 : 0);

  std::vector<SceneLabel> out(labels.begin(), labels.end());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    const int votes = prefix[hi + 1] - prefix[lo];
    const int total = static_cast<int>(hi - lo + 1);
    if (2 * votes > total) {
      out[i].in_play = true;
    } else if (2 * votes < total) {
      out[i].in_play = false;
    }
  }
  return out;
}

std::vector<InPlaySegment> segments(std::span<const SceneLabel> labels, int min_len) {
  std::vector<InPlaySegment> out;
  std::optional<InPlaySegment> run;
  auto close = [&]() {
    if (run && run->length() >= min_len) out.push_back(*run);
    run.reset();
  };
  for (const auto& label : labels) {
    if (run && label.frame != run->frame_end + 1) close();
    if (!label.in_play) {
      close();
      continue;
    }
    if (run) {
      run->frame_end = label.frame;
    } else {
      run = InPlaySegment{label.frame, label.frame};
    }
  }
  close();
  return out;
}

}  // namespace rallyanchor
