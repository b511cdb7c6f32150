#include "rallyanchor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <tuple>

namespace rallyanchor {

EventPoint to_point(const RawEvent& e) { return {e.type, e.frame, {e.x, e.y}}; }

EventPoint to_point(const TruthEvent& e) { return {e.type, e.frame, e.position}; }

EventMatching match_events(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                           int tolerance) {
  struct Candidate {
    int distance;
    int truth_frame;
    int detected_frame;
    std::size_t d;
    std::size_t t;
  };
  std::vector<Candidate> candidates;
  for (std::size_t d = 0; d < detected.size(); ++d) {
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (detected[d].type != truth[t].type) continue;
      const int dist = std::abs(detected[d].frame - truth[t].frame);
      if (dist <= tolerance) candidates.push_back({dist, truth[t].frame, detected[d].frame, d, t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.truth_frame, a.detected_frame, a.t, a.d) <
           std::tie(b.distance, b.truth_frame, b.detected_frame, b.t, b.d);
  });
  std::vector<bool> used_d(detected.size(), false);
  std::vector<bool> used_t(truth.size(), false);
  EventMatching m;
  for (const auto& c : candidates) {
    if (used_d[c.d] || used_t[c.t]) continue;
    used_d[c.d] = used_t[c.t] = true;
    m.pairs.push_back({c.d, c.t});
  }
  m.unmatched_detected = detected.size() - m.pairs.size();
  m.unmatched_truth = truth.size() - m.pairs.size();
  return m;
}

namespace {

template <typename F>
ErrorStats stats(std::span<const EventPoint> detected, std::span<const EventPoint> truth, int tolerance,
                 F error) {
  const EventMatching m = match_events(detected, truth, tolerance);
  ErrorStats s;
  s.matched = m.pairs.size();
  s.unmatched_detected = m.unmatched_detected;
  s.unmatched_truth = m.unmatched_truth;
  if (m.pairs.empty()) return s;
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& p : m.pairs) {
    const double e = error(detected[p.detected], truth[p.truth]);
    sum += e;
    sq += e * e;
    s.max = std::max(s.max, e);
  }
  const double n = static_cast<double>(m.pairs.size());
  s.mean = sum / n;
  s.stddev = std::sqrt(std::max(0.0, sq / n - s.mean * s.mean));
  return s;
}

}  // namespace

ErrorStats temporal_error(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                          int tolerance) {
  return stats(detected, truth, tolerance, [](const EventPoint& d, const EventPoint& t) {
    return static_cast<double>(std::abs(d.frame - t.frame));
  });
}

ErrorStats spatial_error(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                         int tolerance) {
  return stats(detected, truth, tolerance,
               [](const EventPoint& d, const EventPoint& t) { return distance(d.position, t.position); });
}

PrecisionRecall precision_recall(std::span<const EventPoint> detected, std::span<const EventPoint> truth,
                                 int tolerance) {
  const auto matched = static_cast<double>(match_events(detected, truth, tolerance).pairs.size());
  PrecisionRecall pr;
  pr.precision = detected.empty() ? (truth.empty() ? 1.0 : 0.0) : matched / static_cast<double>(detected.size());
  pr.recall = truth.empty() ? 1.0 : matched / static_cast<double>(truth.size());
  return pr;
}

}  // namespace rallyanchor
