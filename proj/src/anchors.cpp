#include "rallyanchor/anchors.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "rallyanchor/codec.hpp"
#include "rallyanchor/error.hpp"

namespace rallyanchor {

std::string_view status_name(AnchorStatus status) {
  switch (status) {
    case AnchorStatus::kUncalibrated: return "UNCALIBRATED";
    case AnchorStatus::kCalibrated: return "CALIBRATED";
    case AnchorStatus::kDeleted: return "DELETED";
  }
  return "UNCALIBRATED";
}

std::string_view origin_name(AnchorOrigin origin) {
  return origin == AnchorOrigin::kDetected ? "DETECTED" : "USER_ADDED";
}

std::string_view mutation_kind_name(MutationKind kind) {
  switch (kind) {
    case MutationKind::kCalibrate: return "calibrate";
    case MutationKind::kAdd: return "add";
    case MutationKind::kDelete: return "delete";
    case MutationKind::kAnnotate: return "annotate";
  }
  return "calibrate";
}

Vocabulary Vocabulary::table_tennis() {
  return Vocabulary({
      {"serve_type", {"pendulum", "reverse_pendulum", "tomahawk", "backhand", "squat"}},
      {"serve_effect", {"direct_point", "advantage", "neutral", "disadvantage", "fault"}},
      {"receive_type", {"push", "flick", "loop", "drop_short", "block"}},
      {"receive_effect", {"direct_point", "advantage", "neutral", "disadvantage", "error"}},
      {"spin_type", {"topspin", "backspin", "sidespin", "no_spin"}},
      {"stroke_type", {"drive", "loop", "push", "flick", "block", "smash", "chop", "lob"}},
      {"rally_tactic", {"serve_and_attack", "receive_and_attack", "stalemate", "defensive"}},
  });
}

bool Vocabulary::has_type(std::string_view type) const {
  return types_.find(std::string(type)) != types_.end();
}

bool Vocabulary::allows(std::string_view type, std::string_view value) const {
  auto it = types_.find(std::string(type));
  if (it == types_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), value) != it->second.end();
}

const RallySpan* MatchState::find_rally(std::string_view rally_id) const {
  for (const auto& r : rallies) {
    if (r.rally_id == rally_id) return &r;
  }
  return nullptr;
}

namespace {

std::string make_id(const MatchState& state, char tag, std::uint64_t sequence) {
  std::string id = state.info.match_id.empty() ? std::string() : state.info.match_id + "-";
  id += tag;
  id += std::to_string(sequence);
  return id;
}

EventAnchor& live_anchor(MatchState& state, const std::string& anchor_id) {
  auto it = state.anchors.find(anchor_id);
  if (it == state.anchors.end()) throw Error(ErrorCode::kNotFound, "no anchor '" + anchor_id + "'");
  return it->second;
}

struct Applier {
  MatchState& state;
  const MutationRecord& record;
  const Vocabulary& vocabulary;

  MutationResult operator()(const CalibratePayload& p) const {
    EventAnchor& anchor = live_anchor(state, p.anchor_id);
    if (anchor.status == AnchorStatus::kDeleted) {
      throw Error(ErrorCode::kDeleted, "anchor '" + p.anchor_id + "' is deleted");
    }
    const RallySpan* rally = state.find_rally(anchor.rally_id);
    if (!rally) throw Error(ErrorCode::kRallyNotFound, "no rally '" + anchor.rally_id + "'");
    const int start = anchor.frame_start + p.delta;
    const int end = anchor.frame_end + p.delta;
    if (start < rally->frame_start || end > rally->frame_end) {
      throw Error(ErrorCode::kOutOfRallyBounds,
                  "frames [" + std::to_string(start) + ", " + std::to_string(end) + "] leave rally '" +
                      rally->rally_id + "'");
    }
    anchor.frame_start = start;
    anchor.frame_end = end;
    anchor.status = AnchorStatus::kCalibrated;
    return {anchor, std::nullopt};
  }

  MutationResult operator()(const AddPayload& p) const {
    const RallySpan* rally = state.find_rally(p.rally_id);
    if (!rally) throw Error(ErrorCode::kRallyNotFound, "no rally '" + p.rally_id + "'");
    if (p.event_type == EventType::kRally) {
      throw Error(ErrorCode::kInvalidArgument, "RALLY anchors cannot be added by hand");
    }
    if (p.frame < rally->frame_start || p.frame > rally->frame_end) {
      throw Error(ErrorCode::kOutOfRallyBounds,
                  "frame " + std::to_string(p.frame) + " outside rally '" + rally->rally_id + "'");
    }
    EventAnchor anchor;
    anchor.anchor_id = make_id(state, 'u', record.sequence);
    anchor.rally_id = p.rally_id;
    anchor.event_type = p.event_type;
    anchor.frame_start = anchor.frame_end = p.frame;
    anchor.position = p.position;
    anchor.status = AnchorStatus::kCalibrated;
    anchor.origin = AnchorOrigin::kUserAdded;
    state.anchors[anchor.anchor_id] = anchor;
    return {anchor, std::nullopt};
  }

  MutationResult operator()(const DeletePayload& p) const {
    EventAnchor& anchor = live_anchor(state, p.anchor_id);
    if (anchor.status == AnchorStatus::kDeleted) {
      throw Error(ErrorCode::kAlreadyDeleted, "anchor '" + p.anchor_id + "' is already deleted");
    }
    anchor.status = AnchorStatus::kDeleted;
    return {anchor, std::nullopt};
  }

  MutationResult operator()(const AnnotatePayload& p) const {
    if (!vocabulary.has_type(p.context_type)) {
      throw Error(ErrorCode::kUnknownContextType, "unknown context type '" + p.context_type + "'");
    }
    if (!vocabulary.allows(p.context_type, p.value)) {
      throw Error(ErrorCode::kValueNotInVocabulary,
                  "'" + p.value + "' is not a " + p.context_type + " value");
    }
    auto anchor = state.anchors.find(p.event_id);
    const bool live_anchor = anchor != state.anchors.end() && anchor->second.status != AnchorStatus::kDeleted;
    if (!live_anchor && !state.find_rally(p.event_id)) {
      throw Error(ErrorCode::kEventNotFound, "no live event '" + p.event_id + "'");
    }
    auto [it, inserted] = state.annotations.try_emplace({p.event_id, p.context_type});
    ContextAnnotation& a = it->second;
    if (inserted) {
      a.annotation_id = make_id(state, 'n', record.sequence);
      a.context_type = p.context_type;
      a.event_id = p.event_id;
    }
    a.value = p.value;
    a.author = p.author;
    a.timestamp = record.timestamp;
    return {std::nullopt, a};
  }
};

}  // namespace

MutationResult apply_mutation(MatchState& state, const MutationRecord& record,
                              const Vocabulary& vocabulary) {
  MutationResult result = std::visit(Applier{state, record, vocabulary}, record.payload);
  state.last_sequence = record.sequence;
  return result;
}

MatchState replay(const MatchState& base, std::span<const MutationRecord> log,
                  const Vocabulary& vocabulary) {
  MatchState state = base;
  for (const auto& record : log) {
    if (record.sequence != state.last_sequence + 1) {
      throw Error(ErrorCode::kCorruptLog, "log sequence jumps from " + std::to_string(state.last_sequence) +
                                              " to " + std::to_string(record.sequence));
    }
    try {
      apply_mutation(state, record, vocabulary);
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruptLog,
                  "record " + std::to_string(record.sequence) + " cannot be applied: " + e.what());
    }
  }
  return state;
}

int stroke_count(const MatchState& state, std::string_view rally_id) {
  int count = 0;
  for (const auto& [id, a] : state.anchors) {
    if (a.rally_id == rally_id && a.event_type == EventType::kHit && a.status != AnchorStatus::kDeleted) {
      ++count;
    }
  }
  return count;
}

namespace {

bool has_context(const MatchState& state, const RallySpan& rally, const std::string& type,
                 const std::string& value) {
  auto matches = [&](const std::string& event_id) {
    auto it = state.annotations.find({event_id, type});
    return it != state.annotations.end() && it->second.value == value;
  };
  if (matches(rally.rally_id)) return true;
  for (const auto& [id, a] : state.anchors) {
    if (a.rally_id == rally.rally_id && a.status != AnchorStatus::kDeleted && matches(id)) return true;
  }
  return false;
}

}  // namespace

std::vector<RallySpan> query_rallies(const MatchState& state, const QueryRule& rule) {
  if (rule.empty()) throw Error(ErrorCode::kEmptyRule, "query rule sets no field");
  std::vector<RallySpan> out;
  for (const auto& rally : state.rallies) {
    if (rule.server && rally.server != *rule.server) continue;
    if (rule.winner && rally.winner != *rule.winner) continue;
    if (rule.min_strokes && stroke_count(state, rally.rally_id) < *rule.min_strokes) continue;
    const bool context_ok = std::all_of(rule.context.begin(), rule.context.end(), [&](const auto& pred) {
      return has_context(state, rally, pred.first, pred.second);
    });
    if (context_ok) out.push_back(rally);
  }
  return out;
}

std::vector<EventAnchor> list_anchors(const MatchState& state, std::string_view rally_id,
                                      bool include_deleted) {
  std::vector<EventAnchor> out;
  for (const auto& [id, a] : state.anchors) {
    if (a.rally_id != rally_id) continue;
    if (!include_deleted && a.status == AnchorStatus::kDeleted) continue;
    out.push_back(a);
  }
  std::sort(out.begin(), out.end(), [](const EventAnchor& l, const EventAnchor& r) {
    return std::tie(l.frame_start, l.event_type, l.anchor_id) < std::tie(r.frame_start, r.event_type, r.anchor_id);
  });
  return out;
}

std::string export_match(const MatchState& state, ExportFormat format) {
  std::string out;
  auto line = [&](Json j, std::string_view kind) {
    j["kind"] = kind;
    out += j.dump();
    out += '\n';
  };
  Json header = to_json(state.info);
  header["last_sequence"] = state.last_sequence;
  line(header, "match");
  if (format == ExportFormat::kAnchors) {
    for (const auto& r : state.rallies) line(to_json(r), "rally");
    std::vector<const EventAnchor*> anchors;
    for (const auto& [id, a] : state.anchors) anchors.push_back(&a);
    std::sort(anchors.begin(), anchors.end(), [](const EventAnchor* l, const EventAnchor* r) {
      return std::tie(l->frame_start, l->event_type, l->anchor_id) <
             std::tie(r->frame_start, r->event_type, r->anchor_id);
    });
    for (const auto* a : anchors) line(to_json(*a), "anchor");
  } else {
    for (const auto& [key, a] : state.annotations) line(to_json(a), "annotation");
  }
  return out;
}

MatchState import_match(std::span<const std::string_view> exports) {
  MatchState state;
  bool have_header = false;
  for (std::string_view text : exports) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      const std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("bad export line: ") + e.what());
      }
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "match") {
        MatchInfo info = match_info_from_json(j);
        const auto seq = j.at("last_sequence").get<std::uint64_t>();
        if (have_header && (info != state.info || seq != state.last_sequence)) {
          throw Error(ErrorCode::kInvalidArgument, "exports belong to different match states");
        }
        state.info = std::move(info);
        state.last_sequence = seq;
        have_header = true;
      } else if (kind == "rally") {
        state.rallies.push_back(rally_from_json(j));
      } else if (kind == "anchor") {
        EventAnchor a = anchor_from_json(j);
        state.anchors[a.anchor_id] = a;
      } else if (kind == "annotation") {
        ContextAnnotation a = annotation_from_json(j);
        state.annotations[{a.event_id, a.context_type}] = a;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown export record kind '" + kind + "'");
      }
    }
  }
  if (!have_header) throw Error(ErrorCode::kInvalidArgument, "export has no match record");
  return state;
}

Clock system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

MatchStore::MatchStore(MatchState base, std::shared_ptr<const Vocabulary> vocabulary, Clock clock,
                       std::optional<std::filesystem::path> log_path)
    : base_(std::make_shared<const MatchState>(std::move(base))),
      vocabulary_(std::move(vocabulary)),
      clock_(std::move(clock)),
      log_path_(std::move(log_path)),
      current_(base_) {}

MutationResult MatchStore::commit(MutationPayload payload) {
  std::lock_guard writer(writer_);
  MutationRecord record;
  record.payload = std::move(payload);
  record.timestamp = clock_();
  auto next = std::make_shared<MatchState>(*current_);
  record.sequence = next->last_sequence + 1;
  MutationResult result = apply_mutation(*next, record, *vocabulary_);
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::app);
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to " + log_path_->string());
  }
  log_.push_back(std::move(record));
  std::lock_guard publish(snapshot_mutex_);
  current_ = std::move(next);
  return result;
}

EventAnchor MatchStore::calibrate(std::string_view anchor_id, int delta) {
  return *commit(CalibratePayload{std::string(anchor_id), delta}).anchor;
}

EventAnchor MatchStore::add_anchor(std::string_view rally_id, int frame, EventType type,
                                   std::optional<Point2> position) {
  return *commit(AddPayload{std::string(rally_id), frame, type, position}).anchor;
}

EventAnchor MatchStore::delete_anchor(std::string_view anchor_id) {
  return *commit(DeletePayload{std::string(anchor_id)}).anchor;
}

ContextAnnotation MatchStore::annotate(std::string_view event_id, std::string_view context_type,
                                       std::string_view value, std::string_view author) {
  return *commit(AnnotatePayload{std::string(event_id), std::string(context_type), std::string(value),
                                 std::string(author)})
              .annotation;
}

std::shared_ptr<const MatchState> MatchStore::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

MatchState MatchStore::snapshot_at(std::uint64_t sequence) const {
  std::vector<MutationRecord> prefix;
  {
    std::lock_guard writer(writer_);
    for (const auto& r : log_) {
      if (r.sequence > sequence) break;
      prefix.push_back(r);
    }
  }
  return replay(*base_, prefix, *vocabulary_);
}

std::vector<MutationRecord> MatchStore::log() const {
  std::lock_guard writer(writer_);
  return log_;
}

void MatchStore::restore(std::vector<MutationRecord> log) {
  std::lock_guard writer(writer_);
  auto state = std::make_shared<const MatchState>(replay(*base_, log, *vocabulary_));
  log_ = std::move(log);
  std::lock_guard publish(snapshot_mutex_);
  current_ = std::move(state);
}

Store::Store(Vocabulary vocabulary, Clock clock)
    : vocabulary_(std::make_shared<const Vocabulary>(std::move(vocabulary))), clock_(std::move(clock)) {}

Store::Store(std::filesystem::path directory, Vocabulary vocabulary, Clock clock)
    : directory_(std::move(directory)),
      vocabulary_(std::make_shared<const Vocabulary>(std::move(vocabulary))),
      clock_(std::move(clock)) {
  std::filesystem::create_directories(*directory_);
  load_directory();
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void Store::load_directory() {
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(*directory_)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "base.jsonl")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const std::string base_text = read_file(dir / "base.jsonl");
    const std::string_view parts[] = {base_text};
    MatchState base = import_match(parts);
    std::vector<MutationRecord> log;
    const std::string log_text = read_file(dir / "log.jsonl");
    std::istringstream lines(log_text);
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      try {
        log.push_back(mutation_from_json(Json::parse(line)));
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kCorruptLog, dir.string() + ": " + e.what());
      }
    }
    const std::string id = base.info.match_id;
    auto store = std::make_unique<MatchStore>(std::move(base), vocabulary_, clock_, dir / "log.jsonl");
    store->restore(std::move(log));
    index_match(id, *store->snapshot());
    matches_.emplace(id, std::move(store));
  }
}

void Store::index_match(const std::string& match_id, const MatchState& state) {
  for (const auto& r : state.rallies) owners_[r.rally_id] = match_id;
  for (const auto& [id, a] : state.anchors) owners_[id] = match_id;
}

bool Store::add_match(MatchState base) {
  std::unique_lock lock(mutex_);
  const std::string id = base.info.match_id;
  if (matches_.count(id) != 0) return false;
  std::optional<std::filesystem::path> log_path;
  if (directory_) {
    const auto dir = *directory_ / id;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "base.jsonl", std::ios::binary | std::ios::trunc);
    out << export_match(base, ExportFormat::kAnchors) << export_match(base, ExportFormat::kAnnotations);
    if (!out) throw std::runtime_error("cannot write " + (dir / "base.jsonl").string());
    std::ofstream(dir / "log.jsonl", std::ios::trunc);
    log_path = dir / "log.jsonl";
  }
  index_match(id, base);
  matches_.emplace(id, std::make_unique<MatchStore>(std::move(base), vocabulary_, clock_, log_path));
  return true;
}

bool Store::has_match(std::string_view match_id) const {
  std::shared_lock lock(mutex_);
  return matches_.find(match_id) != matches_.end();
}

std::vector<std::string> Store::match_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, m] : matches_) ids.push_back(id);
  return ids;
}

MatchStore& Store::match(std::string_view match_id) {
  std::shared_lock lock(mutex_);
  auto it = matches_.find(match_id);
  if (it == matches_.end()) throw Error(ErrorCode::kMatchNotFound, "no match '" + std::string(match_id) + "'");
  return *it->second;
}

const MatchStore& Store::match(std::string_view match_id) const {
  return const_cast<Store*>(this)->match(match_id);
}

MatchStore& Store::match_for_rally(std::string_view rally_id) {
  std::shared_lock lock(mutex_);
  auto it = owners_.find(std::string(rally_id));
  if (it == owners_.end()) throw Error(ErrorCode::kRallyNotFound, "no rally '" + std::string(rally_id) + "'");
  return *matches_.find(it->second)->second;
}

MatchStore& Store::match_for_event(std::string_view event_id) {
  std::shared_lock lock(mutex_);
  auto it = owners_.find(std::string(event_id));
  if (it == owners_.end()) throw Error(ErrorCode::kEventNotFound, "no event '" + std::string(event_id) + "'");
  return *matches_.find(it->second)->second;
}

EventAnchor Store::calibrate(std::string_view anchor_id, int delta) {
  MatchStore* m = nullptr;
  try {
    m = &match_for_event(anchor_id);
  } catch (const Error&) {
    throw Error(ErrorCode::kNotFound, "no anchor '" + std::string(anchor_id) + "'");
  }
  return m->calibrate(anchor_id, delta);
}

EventAnchor Store::add_anchor(std::string_view rally_id, int frame, EventType type,
                              std::optional<Point2> position) {
  EventAnchor anchor = match_for_rally(rally_id).add_anchor(rally_id, frame, type, position);
  std::unique_lock lock(mutex_);
  owners_[anchor.anchor_id] = owners_[std::string(rally_id)];
  return anchor;
}

EventAnchor Store::delete_anchor(std::string_view anchor_id) {
  MatchStore* m = nullptr;
  try {
    m = &match_for_event(anchor_id);
  } catch (const Error&) {
    throw Error(ErrorCode::kNotFound, "no anchor '" + std::string(anchor_id) + "'");
  }
  return m->delete_anchor(anchor_id);
}

ContextAnnotation Store::annotate(std::string_view event_id, std::string_view context_type,
                                  std::string_view value, std::string_view author) {
  if (!vocabulary_->has_type(context_type)) {
    throw Error(ErrorCode::kUnknownContextType, "unknown context type '" + std::string(context_type) + "'");
  }
  if (!vocabulary_->allows(context_type, value)) {
    throw Error(ErrorCode::kValueNotInVocabulary,
                "'" + std::string(value) + "' is not a " + std::string(context_type) + " value");
  }
  return match_for_event(event_id).annotate(event_id, context_type, value, author);
}

}  // namespace rallyanchor
