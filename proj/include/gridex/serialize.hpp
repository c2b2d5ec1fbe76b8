#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridex/episode.hpp"

namespace gridex {

using Json = nlohmann::ordered_json;

/// Rounds to 9 significant digits so that every float on the wire and in
/// logs prints with at most 9.
double quantize(double v);

Json config_to_json(const EnvConfig& cfg);
/// Keys absent from `j` keep the value in `base`. Unknown keys and wrong
/// types raise ProtocolError; invalid values surface later as ConfigError.
EnvConfig config_from_json(const Json& j, EnvConfig base = {});

Json observation_to_json(const Observation& obs);
Json info_to_json(const StepInfo& info);
Json metrics_to_json(const Metrics& m);
/// {"obs":...,"reward":...,"done":...,"info":{...}}
Json response_json(const Observation& obs, double reward, bool done, const Json& info);

/// FNV-1a 64 over the compact observation JSON, as 16 hex digits.
std::string observation_digest(const Observation& obs);

/// gzip JSON-lines episode log: header, one record per transition, metrics.
class EpisodeLogWriter {
 public:
  explicit EpisodeLogWriter(const std::filesystem::path& path);
  ~EpisodeLogWriter();
  EpisodeLogWriter(const EpisodeLogWriter&) = delete;
  EpisodeLogWriter& operator=(const EpisodeLogWriter&) = delete;

  void header(const std::string& policy, const EnvConfig& cfg, const Observation& first);
  void transition(const Transition& tr, const Observation& next);
  void footer(const Metrics& m);
  void close();

 private:
  void line(const Json& j);
  void* gz_ = nullptr;
};

struct EpisodeLog {
  Json header;
  std::vector<Json> transitions;
  Json footer;  // null when the episode did not finish
};

EpisodeLog read_episode_log(const std::filesystem::path& path);

struct ReplayReport {
  bool metrics_match = false;
  bool observations_match = false;
  Json recorded;
  Json replayed;
  bool ok() const { return metrics_match && observations_match; }
};

/// Re-runs the logged config with the logged action sequence.
ReplayReport replay_log(const std::filesystem::path& path);

}  // namespace gridex
