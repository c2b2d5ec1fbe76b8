#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridex/episode.hpp"

namespace gridex {

/// Chooses an action index into the current observation's neighbor list.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(Environment& env) = 0;
  virtual void begin_episode() {}
};

/// Steps toward the privileged expert's next waypoint (nearest advertised neighbor).
class ExpertFollowPolicy : public Policy {
 public:
  int act(Environment& env) override;
};

/// Same sample-and-route planner, fed belief frontiers only.
class CoveragePolicy : public Policy {
 public:
  explicit CoveragePolicy(int restarts = 10) : restarts_(restarts) {}
  int act(Environment& env) override;

 private:
  int restarts_;
};

/// First hop of the shortest path to the nearest node with positive utility.
class GreedyFrontierPolicy : public Policy {
 public:
  int act(Environment& env) override;
};

/// Neighbor with e = 1 (fewest visits first), then b = 1, then fewest
/// visits, then smallest id. Visit counts break the back-and-forth between
/// two local targets.
/// Staying is only chosen when no other neighbor exists.
class GuidepostPolicy : public Policy {
 public:
  int act(Environment& env) override;
  void begin_episode() override { visits_.clear(); }

 private:
  std::vector<int> visits_;
};

/// "expert-follow", "coverage", "greedy-frontier", "guidepost-heuristic".
/// "remote" is driven over the wire protocol and has no local implementation.
std::unique_ptr<Policy> make_policy(const std::string& name, const EnvConfig& cfg);
const std::vector<std::string>& builtin_policies();

struct EpisodeResult {
  std::string policy;
  Metrics metrics;
  std::vector<Transition> transitions;
};

struct RunOptions {
  std::optional<std::filesystem::path> log_path;
  /// Steps without any Unknown cell resolved before giving up; 0 derives
  /// 3 * d_local / node_resolution.
  int livelock_window = 0;
};

/// Runs one episode to termination. Throws LivelockError (after writing the
/// log, when requested) if the policy stops making progress.
EpisodeResult run_policy(const std::string& name, const EnvConfig& cfg, const RunOptions& opts = {});
EpisodeResult run_policy(Policy& policy, const std::string& name, const EnvConfig& cfg, const RunOptions& opts = {});

}  // namespace gridex
