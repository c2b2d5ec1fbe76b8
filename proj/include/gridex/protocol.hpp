#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "gridex/episode.hpp"

namespace gridex {

/// One wire-protocol session: newline-delimited JSON requests in, one JSON
/// line out per request. Owns at most one environment.
///   {"cmd":"reset","config":{...}} | {"cmd":"step","action":k} | {"cmd":"close"}
/// Failures answer {"error":{"kind":...,"message":...}} and keep the session open.
class ProtocolSession {
 public:
  explicit ProtocolSession(EnvConfig defaults = {});
  ~ProtocolSession();

  std::string handle(const std::string& line);
  bool closed() const { return closed_; }
  const Environment* environment() const { return env_.get(); }

 private:
  EnvConfig defaults_;
  std::unique_ptr<Environment> env_;
  bool closed_ = false;
};

/// Serves requests from `in` until close or end of input. Returns the number of requests handled.
int serve_stream(std::istream& in, std::ostream& out, const EnvConfig& defaults = {});

}  // namespace gridex
