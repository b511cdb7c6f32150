#include "rallyanchor/events.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rallyanchor/error.hpp"

namespace rallyanchor {

const std::optional<VelocitySample>& VelocitySeries::at(int frame) const {
  static const std::optional<VelocitySample> kUndefined;
  if (frame < first_frame_ || frame >= end_frame()) return kUndefined;
  return values_[static_cast<std::size_t>(frame - first_frame_)];
}

std::size_t VelocitySeries::defined_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

VelocitySeries velocity(const BallTrack& track, int smoothing_window) {
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing window must be odd and >= 1");
  }
  if (track.samples.empty()) return {};
  const int first = track.samples.front().frame;
  const int last = track.samples.back().frame;
  const std::size_t n = static_cast<std::size_t>(last - first + 1);

  std::vector<std::optional<Point2>> raw(n);
  for (const auto& s : track.samples) raw[static_cast<std::size_t>(s.frame - first)] = s.position();

  const int half = smoothing_window / 2;
  std::vector<std::optional<Point2>> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < static_cast<std::size_t>(half) || i + half >= n) continue;
    Point2 sum;
    bool complete = true;
    for (std::size_t k = i - half; k <= i + half; ++k) {
      if (!raw[k]) {
        complete = false;
        break;
      }
      sum.x += raw[k]->x;
      sum.y += raw[k]->y;
    }
    if (complete) smooth[i] = Point2{sum.x / smoothing_window, sum.y / smoothing_window};
  }

  std::vector<std::optional<VelocitySample>> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!raw[i] || !smooth[i - 1] || !smooth[i + 1]) continue;
    out[i] = VelocitySample{*raw[i], (smooth[i + 1]->x - smooth[i - 1]->x) / 2.0,
                            (smooth[i + 1]->y - smooth[i - 1]->y) / 2.0};
  }
  return VelocitySeries(first, std::move(out));
}

const PlayerFrame* PlayerTracks::find(int frame) const {
  auto it = std::lower_bound(frames.begin(), frames.end(), frame,
                             [](const PlayerFrame& p, int f) { return p.frame < f; });
  if (it == frames.end() || it->frame != frame) return nullptr;
  return &*it;
}

namespace {

struct BoxRef {
  std::size_t frame_index;
  std::size_t box_index;
  Point2 center;
};

double median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
  }
  return m;
}

struct Spread {
  Point2 center;  // coordinate-wise median
  double sigma = 0.0;
};

Spread robust_spread(const std::vector<Point2>& points, double min_sigma) {
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  Spread s;
  s.center = {median(xs), median(ys)};
  for (auto& x : xs) x = std::abs(x - s.center.x);
  for (auto& y : ys) y = std::abs(y - s.center.y);
  // 1.4826 * MAD estimates a normal standard deviation
  const double sx = 1.4826 * median(xs);
  const double sy = 1.4826 * median(ys);
  s.sigma = std::max(min_sigma, std::hypot(sx, sy));
  return s;
}

}  // namespace

PlayerTracks assign_players(std::span<const PoseFrame> poses, const CourtRegion& court,
                            const AssignParams& params) {
  std::vector<BoxRef> boxes;
  Point2 left_sum, right_sum;
  int paired_frames = 0;
  for (std::size_t f = 0; f < poses.size(); ++f) {
    const auto& pf = poses[f];
    for (std::size_t b = 0; b < pf.boxes.size(); ++b) boxes.push_back({f, b, pf.boxes[b].center()});
    if (pf.boxes.size() >= 2) {
      auto [lo, hi] = std::minmax_element(pf.boxes.begin(), pf.boxes.end(),
                                          [](const PoseBox& l, const PoseBox& r) { return l.cx < r.cx; });
      left_sum.x += lo->cx;
      left_sum.y += lo->cy;
      right_sum.x += hi->cx;
      right_sum.y += hi->cy;
      ++paired_frames;
    }
  }
  if (boxes.size() < 2) throw Error(ErrorCode::kDegenerateClusters, "fewer than two player boxes");

  std::array<Point2, 2> centers;
  if (paired_frames > 0) {
    centers[0] = {left_sum.x / paired_frames, left_sum.y / paired_frames};
    centers[1] = {right_sum.x / paired_frames, right_sum.y / paired_frames};
  } else {
    auto [lo, hi] = std::minmax_element(boxes.begin(), boxes.end(),
                                        [](const BoxRef& l, const BoxRef& r) { return l.center.x < r.center.x; });
    centers = {lo->center, hi->center};
  }
  if (centers[0] == centers[1]) {
    throw Error(ErrorCode::kDegenerateClusters, "all player boxes share one center");
  }

  const std::size_t n = boxes.size();
  std::vector<int> cluster(n, 0);
  std::vector<bool> active(n, true);
  std::array<Spread, 2> spread{};

  auto nearest = [&](const Point2& p) {
    return distance(p, centers[0]) <= distance(p, centers[1]) ? 0 : 1;
  };

  for (int outer = 0; outer < params.max_iterations; ++outer) {
    // Lloyd iterations over the active boxes
    for (int iter = 0; iter < params.max_iterations; ++iter) {
      bool changed = false;
      std::array<Point2, 2> sum{};
      std::array<int, 2> count{};
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const int c = nearest(boxes[i].center);
        changed |= c != cluster[i];
        cluster[i] = c;
        sum[c].x += boxes[i].center.x;
        sum[c].y += boxes[i].center.y;
        ++count[c];
      }
      if (count[0] == 0 || count[1] == 0) {
        throw Error(ErrorCode::kDegenerateClusters, "k-means produced an empty cluster");
      }
      for (int c = 0; c < 2; ++c) centers[c] = {sum[c].x / count[c], sum[c].y / count[c]};
      if (!changed && iter > 0) break;
    }

    for (int c = 0; c < 2; ++c) {
      std::vector<Point2> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i] && cluster[i] == c) members.push_back(boxes[i].center);
      }
      spread[c] = robust_spread(members, params.min_sigma_px);
    }

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      bool inside = false;
      for (int c = 0; c < 2; ++c) {
        inside |= distance(boxes[i].center, spread[c].center) <= params.outlier_sigmas * spread[c].sigma;
      }
      changed |= inside != active[i];
      active[i] = inside;
    }
    if (!changed) break;
  }

  const bool first_left = centers[0].x < court.net_x;
  const bool second_left = centers[1].x < court.net_x;
  if (first_left == second_left) {
    throw Error(ErrorCode::kDegenerateClusters, "both player clusters lie on one side of the net");
  }
  const int cluster_a = first_left ? 0 : 1;

  PlayerTracks out;
  out.center_a = centers[cluster_a];
  out.center_b = centers[1 - cluster_a];
  out.frames.reserve(poses.size());

  auto observe = [](const PoseBox& box) {
    PlayerObservation obs;
    obs.center = box.center();
    obs.neck = box.neck.position();
    if (box.left_hand) obs.hands.push_back(box.left_hand->position());
    if (box.right_hand) obs.hands.push_back(box.right_hand->position());
    return obs;
  };

  std::size_t i = 0;
  for (std::size_t f = 0; f < poses.size(); ++f) {
    PlayerFrame frame;
    frame.frame = poses[f].frame;
    std::array<double, 2> best = {std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity()};
    for (; i < n && boxes[i].frame_index == f; ++i) {
      if (!active[i]) continue;
      // nearest cluster whose radius contains the box
      int c = -1;
      double d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 2; ++k) {
        const double dk = distance(boxes[i].center, centers[k]);
        const bool inside =
            distance(boxes[i].center, spread[k].center) <= params.outlier_sigmas * spread[k].sigma;
        if (inside && dk < d) {
          c = k;
          d = dk;
        }
      }
      if (c < 0 || d >= best[c]) continue;
      best[c] = d;
      auto& slot = c == cluster_a ? frame.side_a : frame.side_b;
      slot = observe(poses[f].boxes[boxes[i].box_index]);
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::optional<double> DistanceSeries::at(int frame, PlayerSide side) const {
  if (frame < first_frame_ || frame >= end_frame() || side == PlayerSide::kNone) return std::nullopt;
  return values_[static_cast<std::size_t>(frame - first_frame_)][side == PlayerSide::kA ? 0 : 1];
}

DistanceSeries hand_distance(const BallTrack& track, const PlayerTracks& players) {
  if (track.samples.empty()) return {};
  const int first = track.samples.front().frame;
  const int last = track.samples.back().frame;
  std::vector<std::array<std::optional<double>, 2>> values(static_cast<std::size_t>(last - first + 1));
  for (const auto& s : track.samples) {
    const PlayerFrame* pf = players.find(s.frame);
    if (!pf) continue;
    auto& slot = values[static_cast<std::size_t>(s.frame - first)];
    for (int k = 0; k < 2; ++k) {
      const auto& obs = k == 0 ? pf->side_a : pf->side_b;
      if (!obs) continue;
      if (obs->hands.empty()) {
        slot[k] = distance(s.position(), obs->neck);
      } else {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& h : obs->hands) d = std::min(d, distance(s.position(), h));
        slot[k] = d;
      }
    }
  }
  return DistanceSeries(first, std::move(values));
}

double scaled_max_distance(const DetectParams& params, int video_width) {
  return params.max_hand_distance * static_cast<double>(video_width) / params.reference_width;
}

namespace {

struct Reversal {
  int frame = 0;
  Point2 position;
  bool rising_to_falling = false;  // velocity went from positive to negative
  double strength = 0.0;
};

double component(const VelocitySample& v, Axis axis) { return axis == Axis::kX ? v.vx : v.vy; }
double coordinate(const Point2& p, Axis axis) { return axis == Axis::kX ? p.x : p.y; }

// Sign changes of one velocity component. Exact zeros are skipped; an
// undefined frame breaks the comparison. The event frame is the extremal
// raw position between the two opposite-sign samples.
std::vector<Reversal> reversals(const VelocitySeries& vel, Axis axis) {
  std::vector<Reversal> out;
  bool have_prev = false;
  int prev_frame = 0;
  double prev_value = 0.0;
  for (int f = vel.first_frame(); f < vel.end_frame(); ++f) {
    const auto& v = vel.at(f);
    if (!v) {
      have_prev = false;
      continue;
    }
    const double c = component(*v, axis);
    if (c == 0.0) continue;
    if (have_prev && (prev_value > 0.0) != (c > 0.0)) {
      Reversal r;
      r.rising_to_falling = prev_value > 0.0;
      r.frame = prev_frame;
      r.position = vel.at(prev_frame)->position;
      for (int t = prev_frame + 1; t <= f; ++t) {
        const Point2& p = vel.at(t)->position;
        const bool better = r.rising_to_falling ? coordinate(p, axis) > coordinate(r.position, axis)
                                                : coordinate(p, axis) < coordinate(r.position, axis);
        if (better) {
          r.frame = t;
          r.position = p;
        }
      }
      const double jump = std::abs(prev_value - c);
      r.strength = jump / (jump + 1.0);
      out.push_back(r);
    }
    have_prev = true;
    prev_frame = f;
    prev_value = c;
  }
  return out;
}

// Keeps the strongest of any candidates within `gap` frames, frame order.
std::vector<Reversal> merge(std::vector<Reversal> candidates, int gap) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Reversal& l, const Reversal& r) {
    if (l.strength != r.strength) return l.strength > r.strength;
    return l.frame < r.frame;
  });
  std::vector<Reversal> kept;
  for (const auto& c : candidates) {
    const bool clash = std::any_of(kept.begin(), kept.end(),
                                   [&](const Reversal& k) { return std::abs(k.frame - c.frame) <= gap; });
    if (!clash) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Reversal& l, const Reversal& r) { return l.frame < r.frame; });
  return kept;
}

bool is_local_minimum(const DistanceSeries& dist, int t, PlayerSide side) {
  const auto d = dist.at(t, side);
  if (!d) return false;
  const auto before = dist.at(t - 1, side);
  const auto after = dist.at(t + 1, side);
  if (!before && !after) return false;
  return (!before || *d <= *before) && (!after || *d <= *after);
}

}  // namespace

std::vector<RawEvent> detect_hits(const VelocitySeries& vel, const DistanceSeries& dist,
                                  const DetectParams& params, double max_distance) {
  std::vector<RawEvent> out;
  for (const auto& r : merge(reversals(vel, params.hit_axis), params.merge_gap)) {
    PlayerSide side = PlayerSide::kNone;
    double closest = std::numeric_limits<double>::infinity();
    for (PlayerSide s : {PlayerSide::kA, PlayerSide::kB}) {
      for (int t = r.frame - params.minimum_window; t <= r.frame + params.minimum_window; ++t) {
        if (!is_local_minimum(dist, t, s)) continue;
        const double d = *dist.at(t, s);
        if (d <= max_distance && d < closest) {
          closest = d;
          side = s;
        }
      }
    }
    if (side == PlayerSide::kNone) continue;
    out.push_back({EventType::kHit, r.frame, r.position.x, r.position.y, side, r.strength});
  }
  return out;
}

std::vector<RawEvent> detect_bounces(const VelocitySeries& vel, const CourtRegion& court,
                                     const DetectParams& params) {
  std::vector<Reversal> downward_to_upward;
  for (const auto& r : reversals(vel, Axis::kY)) {
    if (r.rising_to_falling) downward_to_upward.push_back(r);
  }
  const double x_min = court.table_x_min();
  const double x_max = court.table_x_max();
  std::vector<RawEvent> out;
  for (const auto& r : merge(std::move(downward_to_upward), params.merge_gap)) {
    const Point2& p = r.position;
    if (p.y < court.table_y_min || p.y > court.table_y_max) continue;
    if (p.x < x_min || p.x > x_max) continue;
    const PlayerSide half = p.x < court.net_x ? PlayerSide::kA : PlayerSide::kB;
    out.push_back({EventType::kBounce, r.frame, p.x, p.y, half, r.strength});
  }
  return out;
}

double estimate_speed(const BallTrack& track, int frame, int smoothing_window) {
  const auto& v = velocity(track, smoothing_window).at(frame);
  if (!v) {
    throw Error(ErrorCode::kUndefinedAtFrame,
                "velocity undefined at frame " + std::to_string(frame));
  }
  return std::hypot(v->vx, v->vy);
}

}  // namespace rallyanchor
