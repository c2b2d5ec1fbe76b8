#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "gridex/policies.hpp"
#include "gridex/protocol.hpp"
#include "gridex/serialize.hpp"

using namespace gridex;
namespace fs = std::filesystem;

namespace {

struct ConfigFlags {
  EnvConfig cfg;
  double neighbor_threshold = 0, utility_range = 0;
  int community_cap = 0, corridor_width = 0;
  bool no_expert = false;

  void attach(CLI::App* app) {
    app->add_option("--width", cfg.width, "map width in cells")->capture_default_str();
    app->add_option("--height", cfg.height, "map height in cells")->capture_default_str();
    app->add_option("--map-resolution", cfg.map_resolution, "meters per cell")->capture_default_str();
    app->add_option("--sensor-range", cfg.sensor_range, "meters")->capture_default_str();
    app->add_option("--node-resolution", cfg.node_resolution, "roadmap lattice spacing, meters")->capture_default_str();
    app->add_option("--neighbor-threshold", neighbor_threshold, "d_n in meters (default 2*sqrt(2)*node resolution)");
    app->add_option("--local-size", cfg.local_size, "local window side, meters")->capture_default_str();
    app->add_option("--utility-range", utility_range, "meters (default 0.8*sensor range)");
    app->add_option("--community-cap", community_cap, "max nodes per community");
    app->add_option("--beta", cfg.beta, "modularity resolution")->capture_default_str();
    app->add_option("--restarts", cfg.restarts, "expert sampling restarts")->capture_default_str();
    app->add_option("--max-steps", cfg.max_steps, "episode step limit")->capture_default_str();
    app->add_option("--rooms", cfg.rooms)->capture_default_str();
    app->add_option("--room-min", cfg.room_min)->capture_default_str();
    app->add_option("--room-max", cfg.room_max)->capture_default_str();
    app->add_option("--corridor-width", corridor_width, "cells (default 2*node resolution)");
    app->add_flag("--no-expert", no_expert, "skip the privileged expert (no reward signal)");
  }

  EnvConfig get() const {
    EnvConfig c = cfg;
    if (neighbor_threshold > 0) c.neighbor_threshold = neighbor_threshold;
    if (utility_range > 0) c.utility_range = utility_range;
    if (community_cap > 0) c.community_cap = community_cap;
    if (corridor_width > 0) c.corridor_width = corridor_width;
    c.expert = !no_expert;
    return c;
  }
};

std::pair<std::uint64_t, std::uint64_t> parse_seeds(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    const auto a = std::stoull(s.substr(0, dots)), b = std::stoull(s.substr(dots + 2));
    if (b < a) throw ConfigError("empty seed range " + s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError("bad seed range '" + s + "' (expected A..B)");
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

void write_plot(const fs::path& path, const std::vector<std::pair<std::uint64_t, Metrics>>& runs, const std::string& title) {
  double max_d = 1.0;
  for (const auto& [s, m] : runs)
    for (auto [d, e] : m.curve) max_d = std::max(max_d, d);
  const double W = 640, H = 400, L = 60, R = 20, T = 30, B = 50;
  auto px = [&](double d) { return L + (W - L - R) * d / max_d; };
  auto py = [&](double e) { return H - B - (H - T - B) * e; };
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (W / 2) << "\" y=\"" << H - 15 << "\" font-size=\"12\">distance (m), max " << max_d << "</text>\n"
      << "<text x=\"5\" y=\"" << py(1) << "\" font-size=\"12\">1.0</text>\n"
      << "<text x=\"5\" y=\"" << py(0) << "\" font-size=\"12\">0.0</text>\n";
  for (const auto& [s, m] : runs) {
    out << "<polyline fill=\"none\" stroke=\"hsl(" << (s * 47) % 360 << ",70%,45%)\" points=\"";
    for (auto [d, e] : m.curve) out << px(d) << ',' << py(e) << ' ';
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

void serve_socket(int port, const EnvConfig& defaults) {
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw InputError("socket() failed");
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw InputError("cannot bind 127.0.0.1:" + std::to_string(port));
  if (listen(fd, 16) != 0) throw InputError("listen() failed");
  socklen_t len = sizeof addr;
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  std::cerr << "listening on 127.0.0.1:" << ntohs(addr.sin_port) << std::endl;
  while (true) {
    const int client = accept(fd, nullptr, nullptr);
    if (client < 0) continue;
    // one session per connection, sharing nothing
    std::thread([client, defaults] {
      ProtocolSession session(defaults);
      std::string pending;
      char buf[4096];
      ssize_t n = 0;
      while (!session.closed() && (n = recv(client, buf, sizeof buf, 0)) > 0) {
        pending.append(buf, static_cast<std::size_t>(n));
        std::size_t nl;
        while (!session.closed() && (nl = pending.find('\n')) != std::string::npos) {
          std::string line = pending.substr(0, nl);
          pending.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty()) continue;
          const std::string reply = session.handle(line) + "\n";
          std::size_t sent = 0;
          while (sent < reply.size()) {
            const ssize_t k = send(client, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
            if (k <= 0) break;
            sent += static_cast<std::size_t>(k);
          }
        }
      }
      close(client);
    }).detach();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridex: grid-world exploration engine"};
  app.require_subcommand(1);

  ConfigFlags gen_flags, run_flags, serve_flags, bench_flags;

  auto* gen = app.add_subcommand("gen-map", "generate a dungeon map and write it as PGM + .meta");
  std::uint64_t gen_seed = 0;
  std::string gen_out = "map.pgm";
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("-o,--out", gen_out)->capture_default_str();
  gen_flags.attach(gen);

  auto* run = app.add_subcommand("run", "run a built-in policy over a seed range");
  std::string policy = "expert-follow", seeds = "0..0", out_dir, csv_path, plot_path;
  run->add_option("--policy", policy, "expert-follow | coverage | greedy-frontier | guidepost-heuristic")->capture_default_str();
  run->add_option("--seeds", seeds, "A..B inclusive")->capture_default_str();
  run->add_option("--log-dir", out_dir, "write <policy>_<seed>.jsonl.gz episode logs here");
  run->add_option("--csv", csv_path, "metrics CSV (default stdout)");
  run->add_option("--plot", plot_path, "explored fraction vs distance, SVG");
  run_flags.attach(run);

  auto* serve = app.add_subcommand("serve", "serve the environment protocol");
  std::string transport = "stdio";
  int port = 5555;
  serve->add_option("--transport", transport)->check(CLI::IsMember({"stdio", "socket"}))->capture_default_str();
  serve->add_option("--port", port, "TCP port on 127.0.0.1 (0 picks one)")->capture_default_str();
  serve_flags.attach(serve);

  auto* replay = app.add_subcommand("replay", "re-run a logged episode and compare metrics");
  std::string replay_path;
  replay->add_option("log", replay_path)->required();

  auto* bench = app.add_subcommand("bench", "per-step pipeline and expert timings");
  std::string bench_policy = "expert-follow";
  std::uint64_t bench_seed = 0;
  bench->add_option("--policy", bench_policy)->capture_default_str();
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench_flags.attach(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      EnvConfig cfg = gen_flags.get();
      cfg.seed = gen_seed;
      cfg.validate();
      const auto map = generate_dungeon(gen_seed, cfg.dungeon());
      save_grid_image(map.truth, gen_out);
      std::cout << gen_out << ' ' << map.truth.width() << 'x' << map.truth.height() << " rooms=" << map.rooms.size()
                << " free=" << map.truth.count(CellState::Free) << '\n';
      return 0;
    }
    if (*run) {
      const auto [a, b] = parse_seeds(seeds);
      if (!out_dir.empty()) fs::create_directories(out_dir);
      std::ofstream csv_file;
      if (!csv_path.empty()) {
        csv_file.open(csv_path);
        if (!csv_file) throw InputError("cannot write " + csv_path);
      }
      std::ostream& csv = csv_path.empty() ? std::cout : csv_file;
      csv << "policy,seed,distance,steps,termination,explored,unexplored_free,sum_reward,sum_f,"
             "initial_expert_cost,final_expert_cost,splits,median_pipeline_ms,max_expert_ms\n";
      std::vector<std::pair<std::uint64_t, Metrics>> runs;
      int failures = 0;
      for (std::uint64_t s = a; s <= b; ++s) {
        EnvConfig cfg = run_flags.get();
        cfg.seed = s;
        RunOptions opts;
        if (!out_dir.empty()) opts.log_path = fs::path(out_dir) / (policy + "_" + std::to_string(s) + ".jsonl.gz");
        try {
          const auto res = run_policy(policy, cfg, opts);
          const auto& m = res.metrics;
          char line[512];
          std::snprintf(line, sizeof line, "%s,%llu,%.9g,%d,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.3f,%.3f\n", policy.c_str(),
                        static_cast<unsigned long long>(s), m.distance, m.steps, m.termination.c_str(), m.explored,
                        m.unexplored_free, m.sum_reward, m.sum_f, m.initial_expert_cost, m.final_expert_cost, m.splits,
                        median(m.pipeline_ms), max_of(m.expert_ms));
          csv << line;
          runs.emplace_back(s, m);
        } catch (const LivelockError& e) {
          std::cerr << "seed " << s << ": " << e.what() << '\n';
          ++failures;
        }
        if (s == b) break;
      }
      if (!plot_path.empty()) write_plot(plot_path, runs, policy);
      return failures ? 3 : 0;
    }
    if (*serve) {
      const EnvConfig defaults = serve_flags.get();
      if (transport == "stdio") {
        std::ios::sync_with_stdio(false);
        serve_stream(std::cin, std::cout, defaults);
      } else {
        serve_socket(port, defaults);
      }
      return 0;
    }
    if (*replay) {
      const auto report = replay_log(replay_path);
      std::cout << report.replayed.dump() << '\n';
      if (!report.metrics_match) std::cerr << "metrics differ from the log\n";
      if (!report.observations_match) std::cerr << "observation digests differ from the log\n";
      return report.ok() ? 0 : 4;
    }
    if (*bench) {
      EnvConfig cfg = bench_flags.get();
      cfg.seed = bench_seed;
      const auto res = run_policy(bench_policy, cfg);
      const auto& m = res.metrics;
      std::printf("steps %d  distance %.1f m  termination %s\n", m.steps, m.distance, m.termination.c_str());
      std::printf("pipeline ms: median %.2f  max %.2f\n", median(m.pipeline_ms), max_of(m.pipeline_ms));
      std::printf("expert ms:   median %.2f  max %.2f\n", median(m.expert_ms), max_of(m.expert_ms));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
