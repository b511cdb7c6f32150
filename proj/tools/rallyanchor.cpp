// Command line front end: synth, ingest, detect, export, query, eval, serve.

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rallyanchor/codec.hpp"
#include "rallyanchor/config.hpp"
#include "rallyanchor/error.hpp"
#include "rallyanchor/metrics.hpp"
#include "rallyanchor/oracle.hpp"
#include "rallyanchor/pipeline.hpp"
#include "rallyanchor/server.hpp"

using namespace rallyanchor;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

// Config file plus `--set section.key=value` overrides; values are parsed as
// JSON and fall back to plain strings.
AppConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = path.empty() ? Json::object() : Json::parse(read_file(path));
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::kInvalidArgument, "override needs key=value: " + o);
    std::string pointer = "/" + o.substr(0, eq);
    for (auto& c : pointer) {
      if (c == '.') c = '/';
    }
    const std::string raw = o.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    j[Json::json_pointer(pointer)] = value;
  }
  return parse_config(j.dump());
}

std::vector<EventPoint> points_from_anchors(const MatchState& state) {
  std::vector<EventPoint> out;
  for (const auto& [id, a] : state.anchors) {
    if (a.event_type == EventType::kRally || a.status == AnchorStatus::kDeleted) continue;
    out.push_back({a.event_type, a.frame_start, a.position.value_or(Point2{})});
  }
  return out;
}

std::vector<EventPoint> points_from_events(const std::string& text) {
  std::vector<EventPoint> out;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    const auto type = parse_event_type(j.at("type").get<std::string>());
    if (!type) throw Error(ErrorCode::kInvalidArgument, "bad event type in " + line);
    out.push_back({*type, j.at("frame").get<int>(), {j.at("x").get<double>(), j.at("y").get<double>()}});
  }
  return out;
}

Json stats_json(const ErrorStats& s) {
  return {{"matched", s.matched},
          {"unmatched_detected", s.unmatched_detected},
          {"unmatched_truth", s.unmatched_truth},
          {"mean", s.mean},
          {"stddev", s.stddev},
          {"max", s.max}};
}

Json event_report(const std::vector<EventPoint>& detected, const std::vector<EventPoint>& truth, int tolerance) {
  const auto pr = precision_recall(detected, truth, tolerance);
  return {{"detected", detected.size()},
          {"truth", truth.size()},
          {"precision", pr.precision},
          {"recall", pr.recall},
          {"temporal_error", stats_json(temporal_error(detected, truth, tolerance))},
          {"spatial_error", stats_json(spatial_error(detected, truth, tolerance))}};
}

std::vector<EventPoint> of_type(const std::vector<EventPoint>& all, EventType type) {
  std::vector<EventPoint> out;
  for (const auto& p : all) {
    if (p.type == type) out.push_back(p);
  }
  return out;
}

Json rally_report(const MatchState& state, const GroundTruth& truth) {
  int exact = 0;
  int exact_with_winner = 0;
  int within_one = 0;
  for (const auto& t : truth.rallies) {
    bool hit_exact = false;
    bool hit_winner = false;
    bool hit_near = false;
    for (const auto& r : state.rallies) {
      const bool same = r.frame_start == t.frame_start && r.frame_end == t.frame_end;
      hit_exact = hit_exact || same;
      hit_winner = hit_winner || (same && r.winner == t.winner);
      hit_near = hit_near || (std::abs(r.frame_start - t.frame_start) <= 1 && std::abs(r.frame_end - t.frame_end) <= 1);
    }
    exact += hit_exact;
    exact_with_winner += hit_winner;
    within_one += hit_near;
  }
  const double n = truth.rallies.empty() ? 1.0 : static_cast<double>(truth.rallies.size());
  return {{"truth", truth.rallies.size()},
          {"detected", state.rallies.size()},
          {"exact_boundaries", exact},
          {"exact_boundaries_and_winner", exact_with_winner},
          {"within_one_frame", within_one},
          {"accuracy", exact_with_winner / n}};
}

HttpService* g_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event anchors for racket-sport video annotation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override a config value, e.g. --set pipeline.max_gap=8");

  auto* synth = app.add_subcommand("synth", "generate a synthetic match and its ground truth");
  std::string tracks_out;
  std::string truth_out;
  std::optional<std::uint64_t> seed;
  synth->add_option("--tracks", tracks_out, "track file to write")->required();
  synth->add_option("--truth", truth_out, "ground truth file to write");
  synth->add_option("--seed", seed, "overrides synth.seed");

  auto* ingest = app.add_subcommand("ingest", "run the pipeline on a track file and store the match");
  std::string track_path;
  std::string store_dir;
  ingest->add_option("track", track_path, "track file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--store", store_dir, "store directory (default: service.store_dir)");

  auto* detect = app.add_subcommand("detect", "print detected events of a track file as JSON lines");
  std::string events_out;
  detect->add_option("track", track_path, "track file")->required()->check(CLI::ExistingFile);
  detect->add_option("-o,--out", events_out, "output file (default stdout)");

  auto* exporter = app.add_subcommand("export", "export a stored match");
  std::string match_id;
  std::string format = "anchors";
  std::string export_out;
  exporter->add_option("match", match_id, "match id")->required();
  exporter->add_option("--store", store_dir, "store directory (default: service.store_dir)");
  exporter->add_option("--format", format, "anchors or annotations")->check(CLI::IsMember({"anchors", "annotations"}));
  exporter->add_option("-o,--out", export_out, "output file (default stdout)");

  auto* query = app.add_subcommand("query", "list rallies of a stored match matching a rule");
  std::string rule_text;
  query->add_option("match", match_id, "match id")->required();
  query->add_option("rule", rule_text, "rule as JSON, e.g. {\"server\":\"A\",\"min_strokes\":3}")->required();
  query->add_option("--store", store_dir, "store directory (default: service.store_dir)");

  auto* eval = app.add_subcommand("eval", "score detections against ground truth");
  std::string truth_path;
  std::string anchors_path;
  std::string events_path;
  std::string report_out;
  eval->add_option("--truth", truth_path, "ground truth file")->required()->check(CLI::ExistingFile);
  auto* anchors_opt = eval->add_option("--anchors", anchors_path, "anchor export")->check(CLI::ExistingFile);
  auto* events_opt = eval->add_option("--events", events_path, "detect output")->check(CLI::ExistingFile);
  anchors_opt->excludes(events_opt);
  eval->add_option("-o,--out", report_out, "output file (default stdout)");

  auto* serve = app.add_subcommand("serve", "serve the store over HTTP");
  std::optional<int> port;
  serve->add_option("--store", store_dir, "store directory (default: service.store_dir)");
  serve->add_option("--port", port, "overrides service.port; 0 picks a free port");

  CLI11_PARSE(app, argc, argv);

  try {
    AppConfig config = resolve_config(config_path, overrides);
    if (store_dir.empty()) store_dir = config.service.store_dir;

    if (*synth) {
      if (seed) config.synth.seed = *seed;
      const SynthMatch match = generate_match(config.synth);
      write_output(tracks_out, serialize_track_file(match.tracks));
      if (!truth_out.empty()) write_output(truth_out, serialize_ground_truth(match.truth));
    } else if (*ingest) {
      Store store(store_dir, config.vocabulary);
      const std::string text = read_file(track_path);
      const std::string id = match_id_for(text, config.pipeline);
      if (!store.has_match(id)) {
        PipelineOutput out = build_match(text, config.pipeline);
        for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
        store.add_match(std::move(out.state));
      }
      std::cout << id << "\n";
    } else if (*detect) {
      const PipelineOutput out = build_match(read_file(track_path), config.pipeline);
      for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
      std::string text;
      for (const auto& e : out.events) text += to_json(e).dump() + "\n";
      write_output(events_out, text);
    } else if (*exporter) {
      Store store(store_dir, config.vocabulary);
      const auto state = store.match(match_id).snapshot();
      write_output(export_out,
                   export_match(*state, format == "anchors" ? ExportFormat::kAnchors : ExportFormat::kAnnotations));
    } else if (*query) {
      Store store(store_dir, config.vocabulary);
      const auto state = store.match(match_id).snapshot();
      const QueryRule rule = query_rule_from_json(Json::parse(rule_text));
      for (const auto& r : query_rallies(*state, rule)) {
        Json j = to_json(r);
        j["strokes"] = stroke_count(*state, r.rally_id);
        std::cout << j.dump() << "\n";
      }
    } else if (*eval) {
      if (anchors_path.empty() && events_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "eval needs --anchors or --events");
      }
      const GroundTruth truth = parse_ground_truth(read_file(truth_path));
      std::vector<EventPoint> expected;
      for (const auto& e : truth.events) expected.push_back(to_point(e));
      Json report;
      std::vector<EventPoint> found;
      if (!anchors_path.empty()) {
        const std::string text = read_file(anchors_path);
        const std::string_view parts[] = {text};
        const MatchState state = import_match(parts);
        found = points_from_anchors(state);
        report["rallies"] = rally_report(state, truth);
      } else {
        found = points_from_events(read_file(events_path));
      }
      const int g = config.match_tolerance;
      report["tolerance"] = g;
      report["events"] = {{"all", event_report(found, expected, g)},
                          {"HIT", event_report(of_type(found, EventType::kHit), of_type(expected, EventType::kHit), g)},
                          {"BOUNCE", event_report(of_type(found, EventType::kBounce),
                                                  of_type(expected, EventType::kBounce), g)}};
      write_output(report_out, report.dump(2) + "\n");
    } else if (*serve) {
      if (port) config.service.port = *port;
      Store store(store_dir, config.vocabulary);
      HttpService service(store, config);
      const int bound = service.bind();
      std::cout << "listening on " << config.service.host << ":" << bound << std::endl;
      g_service = &service;
      std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
      });
      service.listen();
      g_service = nullptr;
    }
  } catch (const PipelineError& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "] stage " << e.stage() << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
