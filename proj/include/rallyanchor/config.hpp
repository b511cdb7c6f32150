#pragma once

#include <filesystem>
#include <string>

#include "rallyanchor/anchors.hpp"
#include "rallyanchor/codec.hpp"
#include "rallyanchor/oracle.hpp"
#include "rallyanchor/pipeline.hpp"

namespace rallyanchor {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_dir = "store";
  std::string static_dir;  // served under /ui when set
};

// Everything the CLI reads from its single JSON config file. Every section
// and key is optional; missing values keep their defaults.
struct AppConfig {
  PipelineConfig pipeline;
  PlaybackConfig playback;
  ServiceConfig service;
  SynthConfig synth;
  Vocabulary vocabulary = Vocabulary::table_tennis();
  int match_tolerance = 3;  // frames, for eval metrics
};

Json to_json(const PipelineConfig& config);
Json to_json(const SynthConfig& config);

AppConfig parse_config(std::string_view json_text);
AppConfig load_config(const std::filesystem::path& path);
std::string dump_config(const AppConfig& config);

}  // namespace rallyanchor
