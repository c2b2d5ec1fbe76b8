#include "gridex/protocol.hpp"

#include <istream>
#include <ostream>

#include "gridex/serialize.hpp"

namespace gridex {

namespace {

const char* kind_of(const std::exception& e) {
  if (dynamic_cast<const ProtocolError*>(&e)) return "protocol";
  if (dynamic_cast<const StateError*>(&e)) return "state";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const IntegrityError*>(&e)) return "integrity";
  return "internal";
}

Json error_json(const char* kind, const std::string& message) {
  Json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  return j;
}

}  // namespace

ProtocolSession::ProtocolSession(EnvConfig defaults) : defaults_(std::move(defaults)) {}
ProtocolSession::~ProtocolSession() = default;

std::string ProtocolSession::handle(const std::string& line) {
  try {
    Json req;
    try {
      req = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string()) throw ProtocolError("missing \"cmd\"");
    const std::string cmd = req["cmd"].get<std::string>();
    if (closed_) throw StateError("session is closed");

    if (cmd == "reset") {
      const Json cfg = req.contains("config") ? req["config"] : Json::object();
      auto env = std::make_unique<Environment>(config_from_json(cfg, defaults_));
      const auto& obs = env->reset();
      Json info;
      info["step"] = 0;
      info["node"] = env->robot_node();
      info["position"] = Json::array({quantize(env->robot_pose().x), quantize(env->robot_pose().y)});
      info["distance"] = 0.0;
      info["explored"] = quantize(env->explored_fraction());
      info["d_n"] = quantize(env->config().d_n());
      const auto out = response_json(obs, 0.0, env->done(), info).dump();
      env_ = std::move(env);
      return out;
    }
    if (cmd == "step") {
      if (!env_) throw StateError("step before reset");
      if (!req.contains("action") || !req["action"].is_number_integer()) throw ProtocolError("\"action\" must be an integer");
      const auto tr = env_->step(req["action"].get<int>());
      Json info = info_to_json(tr.info);
      info["d_n"] = quantize(env_->config().d_n());
      return response_json(env_->observation(), tr.reward, tr.done, info).dump();
    }
    if (cmd == "close") {
      closed_ = true;
      env_.reset();
      Json j;
      j["closed"] = true;
      return j.dump();
    }
    throw ProtocolError("unknown cmd '" + cmd + "'");
  } catch (const Error& e) {
    return error_json(kind_of(e), e.what()).dump();
  }
}

int serve_stream(std::istream& in, std::ostream& out, const EnvConfig& defaults) {
  ProtocolSession session(defaults);
  std::string line;
  int handled = 0;
  while (!session.closed() && std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    out << session.handle(line) << '\n';
    out.flush();
    ++handled;
  }
  return handled;
}

}  // namespace gridex
