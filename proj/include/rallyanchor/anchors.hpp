#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "rallyanchor/score.hpp"
#include "rallyanchor/track.hpp"
#include "rallyanchor/types.hpp"

namespace rallyanchor {

enum class AnchorStatus { kUncalibrated, kCalibrated, kDeleted };
enum class AnchorOrigin { kDetected, kUserAdded };

std::string_view status_name(AnchorStatus status);
std::string_view origin_name(AnchorOrigin origin);

struct EventAnchor {
  std::string anchor_id;
  std::string rally_id;
  EventType event_type = EventType::kHit;
  int frame_start = 0;
  int frame_end = 0;  // equals frame_start for instantaneous events
  std::optional<Point2> position;
  AnchorStatus status = AnchorStatus::kUncalibrated;
  AnchorOrigin origin = AnchorOrigin::kDetected;

  bool operator==(const EventAnchor&) const = default;
};

struct ContextAnnotation {
  std::string annotation_id;
  std::string context_type;
  std::string event_id;  // anchor or rally id
  std::string value;
  std::string author;
  std::int64_t timestamp = 0;  // ms since epoch

  bool operator==(const ContextAnnotation&) const = default;
};

// Allowed values per context type. Loaded from configuration.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::map<std::string, std::vector<std::string>> types)
      : types_(std::move(types)) {}

  // serve type/effect, receive type/effect, spin, stroke and rally tactic.
  static Vocabulary table_tennis();

  bool has_type(std::string_view type) const;
  bool allows(std::string_view type, std::string_view value) const;
  const std::map<std::string, std::vector<std::string>>& types() const { return types_; }

 private:
  std::map<std::string, std::vector<std::string>> types_;
};

struct QueryRule {
  std::optional<PlayerSide> server;
  std::optional<PlayerSide> winner;
  std::optional<int> min_strokes;
  std::vector<std::pair<std::string, std::string>> context;  // (type, value)

  bool empty() const { return !server && !winner && !min_strokes && context.empty(); }
};

struct MatchInfo {
  std::string match_id;
  VideoMeta meta;

  bool operator==(const MatchInfo&) const = default;
};

struct MatchState {
  MatchInfo info;
  std::vector<RallySpan> rallies;  // frame order
  std::map<std::string, EventAnchor> anchors;
  // Keyed by (event_id, context_type); one annotation per pair.
  std::map<std::pair<std::string, std::string>, ContextAnnotation> annotations;
  std::uint64_t last_sequence = 0;

  const RallySpan* find_rally(std::string_view rally_id) const;
  bool operator==(const MatchState&) const = default;
};

enum class MutationKind { kCalibrate, kAdd, kDelete, kAnnotate };

std::string_view mutation_kind_name(MutationKind kind);

struct CalibratePayload {
  std::string anchor_id;
  int delta = 0;
  bool operator==(const CalibratePayload&) const = default;
};

struct AddPayload {
  std::string rally_id;
  int frame = 0;
  EventType event_type = EventType::kHit;
  std::optional<Point2> position;
  bool operator==(const AddPayload&) const = default;
};

struct DeletePayload {
  std::string anchor_id;
  bool operator==(const DeletePayload&) const = default;
};

struct AnnotatePayload {
  std::string event_id;
  std::string context_type;
  std::string value;
  std::string author;
  bool operator==(const AnnotatePayload&) const = default;
};

using MutationPayload = std::variant<CalibratePayload, AddPayload, DeletePayload, AnnotatePayload>;

struct MutationRecord {
  std::uint64_t sequence = 0;
  MutationPayload payload;
  std::int64_t timestamp = 0;

  MutationKind kind() const { return static_cast<MutationKind>(payload.index()); }
  bool operator==(const MutationRecord&) const = default;
};

// Result of applying one mutation; exactly one member is meaningful.
struct MutationResult {
  std::optional<EventAnchor> anchor;
  std::optional<ContextAnnotation> annotation;
};

// Applies `record` to `state`. Validation errors leave `state` unchanged.
MutationResult apply_mutation(MatchState& state, const MutationRecord& record,
                              const Vocabulary& vocabulary);

// Replays `log` on top of `base`. Throws Error(kCorruptLog) when sequence
// numbers do not continue gap-free from base.last_sequence or a record
// cannot be applied.
MatchState replay(const MatchState& base, std::span<const MutationRecord> log,
                  const Vocabulary& vocabulary);

// Non-deleted HIT anchors in the rally, user-added ones included.
int stroke_count(const MatchState& state, std::string_view rally_id);

std::vector<RallySpan> query_rallies(const MatchState& state, const QueryRule& rule);

// Non-deleted anchors of a rally (or all when `include_deleted`), frame order.
std::vector<EventAnchor> list_anchors(const MatchState& state, std::string_view rally_id,
                                      bool include_deleted = false);

enum class ExportFormat { kAnchors, kAnnotations };

// Deterministic newline-delimited JSON objects with sorted keys.
std::string export_match(const MatchState& state, ExportFormat format);

// Rebuilds match state from one or more exports of the same match.
MatchState import_match(std::span<const std::string_view> exports);

using Clock = std::function<std::int64_t()>;
Clock system_clock_ms();

// One match: immutable base state plus an append-only mutation log.
// Mutations are serialized through a single writer; readers take snapshots.
class MatchStore {
 public:
  MatchStore(MatchState base, std::shared_ptr<const Vocabulary> vocabulary, Clock clock,
             std::optional<std::filesystem::path> log_path = std::nullopt);

  EventAnchor calibrate(std::string_view anchor_id, int delta);
  EventAnchor add_anchor(std::string_view rally_id, int frame, EventType type,
                         std::optional<Point2> position);
  EventAnchor delete_anchor(std::string_view anchor_id);
  ContextAnnotation annotate(std::string_view event_id, std::string_view context_type,
                             std::string_view value, std::string_view author = "anonymous");

  std::shared_ptr<const MatchState> snapshot() const;
  // State after the mutation with sequence number `sequence`.
  MatchState snapshot_at(std::uint64_t sequence) const;

  const MatchState& base() const { return *base_; }
  std::vector<MutationRecord> log() const;

  // Replays existing log records (used when reopening a persisted store).
  void restore(std::vector<MutationRecord> log);

 private:
  MutationResult commit(MutationPayload payload);

  std::shared_ptr<const MatchState> base_;
  std::shared_ptr<const Vocabulary> vocabulary_;
  Clock clock_;
  std::optional<std::filesystem::path> log_path_;

  mutable std::mutex writer_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const MatchState> current_;
  std::vector<MutationRecord> log_;
};

// All matches, optionally persisted under a directory as
// <dir>/<match_id>/base.jsonl and <dir>/<match_id>/log.jsonl.
class Store {
 public:
  explicit Store(Vocabulary vocabulary = Vocabulary::table_tennis(),
                 Clock clock = system_clock_ms());
  Store(std::filesystem::path directory, Vocabulary vocabulary = Vocabulary::table_tennis(),
        Clock clock = system_clock_ms());

  // Adds a match; returns false (and changes nothing) if the id exists.
  bool add_match(MatchState base);
  bool has_match(std::string_view match_id) const;
  std::vector<std::string> match_ids() const;

  MatchStore& match(std::string_view match_id);
  const MatchStore& match(std::string_view match_id) const;
  MatchStore& match_for_rally(std::string_view rally_id);
  MatchStore& match_for_event(std::string_view event_id);

  EventAnchor calibrate(std::string_view anchor_id, int delta);
  EventAnchor add_anchor(std::string_view rally_id, int frame, EventType type,
                         std::optional<Point2> position);
  EventAnchor delete_anchor(std::string_view anchor_id);
  ContextAnnotation annotate(std::string_view event_id, std::string_view context_type,
                             std::string_view value, std::string_view author = "anonymous");

  const Vocabulary& vocabulary() const { return *vocabulary_; }

 private:
  void load_directory();
  void index_match(const std::string& match_id, const MatchState& state);

  std::optional<std::filesystem::path> directory_;
  std::shared_ptr<const Vocabulary> vocabulary_;
  Clock clock_;

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<MatchStore>, std::less<>> matches_;
  // rally and anchor id -> match id
  std::unordered_map<std::string, std::string> owners_;
};

}  // namespace rallyanchor
