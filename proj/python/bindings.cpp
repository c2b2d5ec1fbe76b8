#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridex/community.hpp"
#include "gridex/policies.hpp"
#include "gridex/protocol.hpp"
#include "gridex/serialize.hpp"
#include "gridex/tsp.hpp"

namespace py = pybind11;
using namespace gridex;

namespace {

py::object to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return py::none();
    case Json::value_t::boolean: return py::bool_(j.get<bool>());
    case Json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float: return py::float_(j.get<double>());
    case Json::value_t::string: return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
    default: return py::none();
  }
}

py::array_t<std::uint8_t> grid_array(const OccupancyGrid& g) {
  py::array_t<std::uint8_t> arr({g.height(), g.width()});
  auto view = arr.mutable_unchecked<2>();
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) view(y, x) = static_cast<std::uint8_t>(g.at(CellIndex{x, y}));
  return arr;
}

EnvConfig config_from_kwargs(const py::kwargs& kw) {
  Json j = Json::object();
  for (auto item : kw) {
    const auto key = py::cast<std::string>(item.first);
    const py::handle v = item.second;
    if (v.is_none()) j[key] = nullptr;
    else if (py::isinstance<py::bool_>(v)) j[key] = v.cast<bool>();
    else if (py::isinstance<py::int_>(v)) j[key] = v.cast<std::int64_t>();
    else j[key] = v.cast<double>();
  }
  return config_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "grid-world exploration engine";

  static py::exception<Error> base(m, "GridexError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<UndefinedScoreError>(m, "UndefinedScoreError", base.ptr());
  py::register_exception<LivelockError>(m, "LivelockError", base.ptr());

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def(py::init(&config_from_kwargs))
      .def_readwrite("width", &EnvConfig::width)
      .def_readwrite("height", &EnvConfig::height)
      .def_readwrite("map_resolution", &EnvConfig::map_resolution)
      .def_readwrite("sensor_range", &EnvConfig::sensor_range)
      .def_readwrite("node_resolution", &EnvConfig::node_resolution)
      .def_readwrite("neighbor_threshold", &EnvConfig::neighbor_threshold)
      .def_readwrite("local_size", &EnvConfig::local_size)
      .def_readwrite("utility_range", &EnvConfig::utility_range)
      .def_readwrite("community_cap", &EnvConfig::community_cap)
      .def_readwrite("beta", &EnvConfig::beta)
      .def_readwrite("restarts", &EnvConfig::restarts)
      .def_readwrite("max_steps", &EnvConfig::max_steps)
      .def_readwrite("seed", &EnvConfig::seed)
      .def_readwrite("rooms", &EnvConfig::rooms)
      .def_readwrite("room_min", &EnvConfig::room_min)
      .def_readwrite("room_max", &EnvConfig::room_max)
      .def_readwrite("corridor_width", &EnvConfig::corridor_width)
      .def_readwrite("expert", &EnvConfig::expert)
      .def_property_readonly("d_n", &EnvConfig::d_n)
      .def_property_readonly("d_utility", &EnvConfig::d_utility)
      .def_property_readonly("cap", &EnvConfig::cap)
      .def("validate", &EnvConfig::validate)
      .def("to_dict", [](const EnvConfig& c) { return to_py(config_to_json(c)); })
      .def("__eq__", [](const EnvConfig& a, const EnvConfig& b) { return a == b; });

  py::class_<Environment>(m, "Environment")
      .def(py::init<EnvConfig>(), py::arg("config") = EnvConfig{})
      .def("reset", [](Environment& env) { return to_py(observation_to_json(env.reset())); })
      .def("step",
           [](Environment& env, int action) {
             const auto tr = env.step(action);
             return py::make_tuple(to_py(observation_to_json(env.observation())), tr.reward, tr.done,
                                   to_py(info_to_json(tr.info)));
           },
           py::arg("action"))
      .def_property_readonly("observation", [](const Environment& env) { return to_py(observation_to_json(env.observation())); })
      .def_property_readonly("done", &Environment::done)
      .def_property_readonly("steps", &Environment::steps)
      .def_property_readonly("robot_node", &Environment::robot_node)
      .def_property_readonly("robot_position", [](const Environment& env) { return py::make_tuple(env.robot_pose().x, env.robot_pose().y); })
      .def_property_readonly("explored_fraction", &Environment::explored_fraction)
      .def_property_readonly("metrics", [](const Environment& env) { return to_py(metrics_to_json(env.metrics())); })
      .def("truth", [](const Environment& env) { return grid_array(env.truth()); })
      .def("belief", [](const Environment& env) { return grid_array(env.belief()); });

  m.def("generate_map",
        [](std::uint64_t seed, const EnvConfig& cfg) {
          cfg.validate();
          return grid_array(generate_dungeon_map(seed, cfg.dungeon()));
        },
        py::arg("seed"), py::arg("config") = EnvConfig{},
        "Truth grid as a (height, width) uint8 array: 0 unknown, 1 free, 2 obstacle.");

  m.def("expert_reward", &expert_reward_from_distance, py::arg("d"), py::arg("d_n"));
  m.def("coverage_gap", &coverage_gap, py::arg("c_move"), py::arg("c_next"), py::arg("c_prev"));

  m.def("modularity",
        [](const std::vector<std::pair<int, int>>& edges, const std::vector<int>& labels, double beta) {
          SimpleGraph g;
          g.adj.resize(labels.size());
          for (auto [a, b] : edges) {
            if (a < 0 || b < 0 || a >= g.size() || b >= g.size()) throw InputError("edge endpoint out of range");
            g.add_edge(a, b);
          }
          return modularity(g, labels, beta);
        },
        py::arg("edges"), py::arg("labels"), py::arg("beta") = 1.0);

  m.def("solve_open_tsp",
        [](const std::vector<std::vector<double>>& matrix, int start) {
          const int n = static_cast<int>(matrix.size());
          CostMatrix cost(n);
          for (int i = 0; i < n; ++i) {
            if (static_cast<int>(matrix[static_cast<std::size_t>(i)].size()) != n) throw InputError("cost matrix is not square");
            for (int j = 0; j < n; ++j) cost(i, j) = matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          }
          const auto order = solve_open_tsp(cost, start);
          return py::make_tuple(order, open_path_cost(cost, order));
        },
        py::arg("matrix"), py::arg("start") = 0);

  m.def("run_policy",
        [](const std::string& policy, const EnvConfig& cfg, std::optional<std::string> log_path) {
          RunOptions opts;
          if (log_path) opts.log_path = *log_path;
          return to_py(metrics_to_json(run_policy(policy, cfg, opts).metrics));
        },
        py::arg("policy"), py::arg("config") = EnvConfig{}, py::arg("log_path") = py::none());

  m.def("replay_log",
        [](const std::string& path) {
          const auto r = replay_log(path);
          py::dict out;
          out["metrics_match"] = r.metrics_match;
          out["observations_match"] = r.observations_match;
          out["metrics"] = to_py(r.replayed);
          return out;
        },
        py::arg("path"));

  m.def("builtin_policies", &builtin_policies);

  py::class_<ProtocolSession>(m, "ProtocolSession")
      .def(py::init<EnvConfig>(), py::arg("defaults") = EnvConfig{})
      .def("handle", &ProtocolSession::handle, py::arg("line"))
      .def_property_readonly("closed", &ProtocolSession::closed);
}
