#include "rallyanchor/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>

#include "rallyanchor/config.hpp"

namespace rallyanchor {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(name, e);
  }
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

BallTrack slice(const BallTrack& track, int from, int to) {
  BallTrack out;
  for (const auto& s : track.samples) {
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

std::string numbered(const std::string& prefix, char tag, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%02zu", tag, n);
  return prefix + "-" + buf;
}

}  // namespace

std::string match_id_for(std::string_view track_text, const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, track_text);
  h = fnv1a(h, "\n");
  h = fnv1a(h, to_json(config).dump());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "m%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PipelineOutput build_match(std::string_view track_text, const PipelineConfig& config) {
  PipelineOutput out;
  MatchState& state = out.state;
  state.info.match_id = match_id_for(track_text, config);

  const TrackSet tracks = stage("ingest", [&] {
    ParseResult parsed = parse_track_text(track_text);
    for (const auto& issue : parsed.issues) {
      out.warnings.push_back("line " + std::to_string(issue.line) + ": " + issue.message);
    }
    if (!parsed.tracks.court) throw Error(ErrorCode::kMissingCourt, "track file has no court record");
    return std::move(parsed.tracks);
  });
  state.info.meta = tracks.meta;
  const CourtRegion& court = *tracks.court;

  const auto segs = stage("segment", [&] {
    auto smoothed = smooth_labels(tracks.scenes, config.scene_window);
    auto found = segments(smoothed, config.min_segment_length);
    if (found.empty()) throw Error(ErrorCode::kNoSegments, "no in-play segment survived smoothing");
    return found;
  });

  state.rallies = stage("score", [&] {
    auto states = clean_scores(tracks.scores, config.min_score_confidence, config.rally.rules);
    return rally_boundaries(states, segs, config.rally);
  });
  for (auto& r : state.rallies) r.rally_id = state.info.match_id + "-" + r.rally_id;

  stage("detect", [&] {
    const BallTrack ball = interpolate_ball(tracks.ball, config.max_gap);
    const double max_distance = scaled_max_distance(config.detect, tracks.meta.width);
    for (const auto& rally : state.rallies) {
      EventAnchor whole;
      whole.anchor_id = rally.rally_id + "-rally";
      whole.rally_id = rally.rally_id;
      whole.event_type = EventType::kRally;
      whole.frame_start = rally.frame_start;
      whole.frame_end = rally.frame_end;
      state.anchors[whole.anchor_id] = whole;

      const BallTrack rally_ball = slice(ball, rally.frame_start, rally.frame_end);
      const VelocitySeries vel = velocity(rally_ball, config.detect.smoothing_window);
      std::vector<RawEvent> events = detect_bounces(vel, court, config.detect);
      try {
        const PlayerTracks players =
            assign_players(slice(tracks.poses, rally.frame_start, rally.frame_end), court, config.assign);
        const auto hits = detect_hits(vel, hand_distance(rally_ball, players), config.detect, max_distance);
        events.insert(events.end(), hits.begin(), hits.end());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateClusters) throw;
        out.warnings.push_back(rally.rally_id + ": no hits detected: " + e.what());
      }
      std::sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        return std::tie(a.frame, a.type) < std::tie(b.frame, b.type);
      });
      std::size_t hits = 0;
      std::size_t bounces = 0;
      for (const auto& e : events) {
        EventAnchor a;
        a.anchor_id = e.type == EventType::kHit ? numbered(rally.rally_id, 'h', hits++)
                                                : numbered(rally.rally_id, 'b', bounces++);
        a.rally_id = rally.rally_id;
        a.event_type = e.type;
        a.frame_start = a.frame_end = e.frame;
        a.position = Point2{e.x, e.y};
        state.anchors[a.anchor_id] = a;
      }
      out.events.insert(out.events.end(), events.begin(), events.end());
    }
    return 0;
  });
  return out;
}

std::string run_pipeline(Store& store, std::string_view track_text, const PipelineConfig& config) {
  const std::string id = match_id_for(track_text, config);
  if (store.has_match(id)) return id;
  PipelineOutput out = build_match(track_text, config);
  store.add_match(std::move(out.state));
  return id;
}

std::vector<SlowdownWindow> playback_hints(const MatchState& state, std::string_view rally_id,
                                           const PlaybackConfig& config) {
  if (!state.find_rally(rally_id)) {
    throw Error(ErrorCode::kRallyNotFound, "no rally '" + std::string(rally_id) + "'");
  }
  std::vector<SlowdownWindow> windows;
  for (const auto& a : list_anchors(state, rally_id)) {
    if (a.status != AnchorStatus::kUncalibrated || a.event_type == EventType::kRally) continue;
    if (!windows.empty() && windows.back().pause_at == a.frame_start) {
      windows.back().anchor_ids.push_back(a.anchor_id);
      continue;
    }
    SlowdownWindow w;
    w.pause_at = a.frame_end;
    w.frame_to = a.frame_end;
    w.frame_from = std::max(0, a.frame_start - config.lead_frames);
    w.rate = config.rate;
    w.anchor_ids.push_back(a.anchor_id);
    if (!windows.empty() && w.frame_from <= windows.back().frame_to) {
      // Split the overlap at the midpoint between the two pause frames.
      SlowdownWindow& prev = windows.back();
      const int mid = prev.pause_at + (w.pause_at - prev.pause_at) / 2;
      prev.frame_to = mid;
      w.frame_from = mid + 1;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace rallyanchor
