#include "gridex/serialize.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstdlib>

#include "gridex/policies.hpp"

namespace gridex {

double quantize(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

namespace {

Json num(double v) { return quantize(v); }

Json opt(const std::optional<double>& v) { return v ? Json(quantize(*v)) : Json(nullptr); }
Json opt(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

Json pos(Pose2 p) { return Json::array({num(p.x), num(p.y)}); }

template <typename T>
T read_as(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("config field '" + key + "' has the wrong type");
  }
}

}  // namespace

Json config_to_json(const EnvConfig& c) {
  Json j;
  j["width"] = c.width;
  j["height"] = c.height;
  j["map_resolution"] = num(c.map_resolution);
  j["sensor_range"] = num(c.sensor_range);
  j["node_resolution"] = num(c.node_resolution);
  j["neighbor_threshold"] = opt(c.neighbor_threshold);
  j["local_size"] = num(c.local_size);
  j["utility_range"] = opt(c.utility_range);
  j["community_cap"] = opt(c.community_cap);
  j["beta"] = num(c.beta);
  j["restarts"] = c.restarts;
  j["max_steps"] = c.max_steps;
  j["seed"] = c.seed;
  j["rooms"] = c.rooms;
  j["room_min"] = c.room_min;
  j["room_max"] = c.room_max;
  j["corridor_width"] = opt(c.corridor_width);
  j["expert"] = c.expert;
  return j;
}

EnvConfig config_from_json(const Json& j, EnvConfig c) {
  if (!j.is_object()) throw ProtocolError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    auto dbl = [&](double& out) { out = read_as<double>(v, key); };
    auto integer = [&](int& out) { out = read_as<int>(v, key); };
    auto opt_dbl = [&](std::optional<double>& out) {
      if (v.is_null()) out.reset();
      else out = read_as<double>(v, key);
    };
    auto opt_int = [&](std::optional<int>& out) {
      if (v.is_null()) out.reset();
      else out = read_as<int>(v, key);
    };
    if (key == "width") integer(c.width);
    else if (key == "height") integer(c.height);
    else if (key == "map_resolution") dbl(c.map_resolution);
    else if (key == "sensor_range") dbl(c.sensor_range);
    else if (key == "node_resolution") dbl(c.node_resolution);
    else if (key == "neighbor_threshold") opt_dbl(c.neighbor_threshold);
    else if (key == "local_size") dbl(c.local_size);
    else if (key == "utility_range") opt_dbl(c.utility_range);
    else if (key == "community_cap") opt_int(c.community_cap);
    else if (key == "beta") dbl(c.beta);
    else if (key == "restarts") integer(c.restarts);
    else if (key == "max_steps") integer(c.max_steps);
    else if (key == "seed") {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ProtocolError("config field 'seed' must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "rooms") integer(c.rooms);
    else if (key == "room_min") integer(c.room_min);
    else if (key == "room_max") integer(c.room_max);
    else if (key == "corridor_width") opt_int(c.corridor_width);
    else if (key == "expert") c.expert = read_as<bool>(v, key);
    else throw ProtocolError("unknown config field '" + key + "'");
  }
  return c;
}

Json observation_to_json(const Observation& obs) {
  Json nodes = Json::array();
  for (const auto& row : obs.nodes) {
    Json r = Json::array();
    for (double v : row) r.push_back(num(v));
    nodes.push_back(std::move(r));
  }
  Json edges = Json::array();
  for (auto [a, b] : obs.edges) edges.push_back(Json::array({a, b}));
  Json j;
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  j["current"] = obs.current;
  j["neighbors"] = obs.neighbors;
  return j;
}

Json info_to_json(const StepInfo& i) {
  Json j;
  j["step"] = i.step;
  j["node"] = i.node;
  j["position"] = pos(i.position);
  j["expert_waypoint"] = i.expert_waypoint ? pos(*i.expert_waypoint) : Json(nullptr);
  j["d"] = num(i.d);
  j["c_move"] = num(i.c_move);
  j["c_prev"] = num(i.c_prev);
  j["c_next"] = num(i.c_next);
  j["f"] = num(i.f);
  j["distance"] = num(i.distance);
  j["explored"] = num(i.explored);
  j["splits"] = i.splits;
  j["termination"] = i.termination.empty() ? Json(nullptr) : Json(i.termination);
  return j;
}

Json metrics_to_json(const Metrics& m) {
  Json j;
  j["distance"] = num(m.distance);
  j["steps"] = m.steps;
  j["termination"] = m.termination;
  j["explored"] = num(m.explored);
  j["unexplored_free"] = num(m.unexplored_free);
  j["sum_reward"] = num(m.sum_reward);
  j["sum_f"] = num(m.sum_f);
  j["initial_expert_cost"] = num(m.initial_expert_cost);
  j["final_expert_cost"] = num(m.final_expert_cost);
  j["splits"] = m.splits;
  Json curve = Json::array();
  for (auto [d, e] : m.curve) curve.push_back(Json::array({num(d), num(e)}));
  j["curve"] = std::move(curve);
  return j;
}

Json response_json(const Observation& obs, double reward, bool done, const Json& info) {
  Json j;
  j["obs"] = observation_to_json(obs);
  j["reward"] = num(reward);
  j["done"] = done;
  j["info"] = info;
  return j;
}

std::string observation_digest(const Observation& obs) {
  const std::string text = observation_to_json(obs).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EpisodeLogWriter::EpisodeLogWriter(const std::filesystem::path& path) {
  gz_ = gzopen(path.string().c_str(), "wb9");
  if (!gz_) throw InputError("cannot open log " + path.string());
}

EpisodeLogWriter::~EpisodeLogWriter() { close(); }

void EpisodeLogWriter::close() {
  if (gz_) gzclose(static_cast<gzFile>(gz_));
  gz_ = nullptr;
}

void EpisodeLogWriter::line(const Json& j) {
  if (!gz_) throw StateError("log already closed");
  const std::string text = j.dump() + "\n";
  if (gzwrite(static_cast<gzFile>(gz_), text.data(), static_cast<unsigned>(text.size())) != static_cast<int>(text.size()))
    throw InputError("short write to episode log");
}

void EpisodeLogWriter::header(const std::string& policy, const EnvConfig& cfg, const Observation& first) {
  Json j;
  j["type"] = "header";
  j["format"] = 1;
  j["policy"] = policy;
  j["seed"] = cfg.seed;
  j["config"] = config_to_json(cfg);
  j["obs_digest"] = observation_digest(first);
  line(j);
}

void EpisodeLogWriter::transition(const Transition& tr, const Observation& next) {
  Json j;
  j["type"] = "step";
  j["action"] = tr.action;
  j["reward"] = num(tr.reward);
  j["done"] = tr.done;
  j["info"] = info_to_json(tr.info);
  j["obs_digest"] = observation_digest(next);
  line(j);
}

void EpisodeLogWriter::footer(const Metrics& m) {
  Json j;
  j["type"] = "metrics";
  j["metrics"] = metrics_to_json(m);
  line(j);
}

EpisodeLog read_episode_log(const std::filesystem::path& path) {
  gzFile gz = gzopen(path.string().c_str(), "rb");
  if (!gz) throw InputError("cannot open log " + path.string());
  std::string text;
  char buf[1 << 15];
  int n = 0;
  while ((n = gzread(gz, buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(gz);
  if (failed) throw InputError("corrupt episode log " + path.string());

  EpisodeLog log;
  std::size_t at = 0;
  while (at < text.size()) {
    std::size_t end = text.find('\n', at);
    if (end == std::string::npos) end = text.size();
    if (end > at) {
      Json j;
      try {
        j = Json::parse(text.begin() + static_cast<std::ptrdiff_t>(at), text.begin() + static_cast<std::ptrdiff_t>(end));
      } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad log line: ") + e.what());
      }
      const std::string type = j.value("type", "");
      if (type == "header") log.header = std::move(j);
      else if (type == "step") log.transitions.push_back(std::move(j));
      else if (type == "metrics") log.footer = std::move(j);
      else throw InputError("unknown log record '" + type + "'");
    }
    at = end + 1;
  }
  if (log.header.is_null()) throw InputError("log has no header");
  return log;
}

ReplayReport replay_log(const std::filesystem::path& path) {
  const auto log = read_episode_log(path);
  const EnvConfig cfg = config_from_json(log.header.at("config"));
  Environment env(cfg);
  const auto& first = env.reset();
  bool obs_ok = observation_digest(first) == log.header.at("obs_digest").get<std::string>();
  for (const auto& rec : log.transitions) {
    env.step(rec.at("action").get<int>());
    obs_ok = obs_ok && observation_digest(env.observation()) == rec.at("obs_digest").get<std::string>();
  }
  ReplayReport report;
  report.observations_match = obs_ok;
  report.replayed = metrics_to_json(env.metrics());
  if (!log.footer.is_null()) report.recorded = log.footer.at("metrics");
  report.metrics_match = !log.footer.is_null() && report.recorded == report.replayed;
  return report;
}

}  // namespace gridex
