import json
import math
import os
import subprocess

import numpy as np
import pytest

import gridex

SMALL = dict(width=50, height=50, node_resolution=1.6, sensor_range=8.0, local_size=16.0,
             rooms=4, room_min=8, room_max=16, max_steps=300)
CLI = os.environ.get("GRIDEX_CLI")


def small(**over):
    return gridex.EnvConfig(**{**SMALL, **over})


def test_config_defaults_and_errors():
    cfg = gridex.EnvConfig()
    assert cfg.width == 250 and cfg.map_resolution == pytest.approx(0.4)
    assert cfg.d_n == pytest.approx(2 * math.sqrt(2) * 4)
    assert cfg.d_utility == pytest.approx(16.0)
    assert cfg.cap == 10
    d = small(seed=3).to_dict()
    assert d["seed"] == 3 and d["utility_range"] is None
    with pytest.raises(gridex.ProtocolError):
        gridex.EnvConfig(widht=10)
    with pytest.raises(gridex.ConfigError):
        gridex.EnvConfig(width=5).validate()
    assert issubclass(gridex.ConfigError, gridex.GridexError)


def test_generate_map():
    a = gridex.generate_map(4, small())
    b = gridex.generate_map(4, small())
    assert a.shape == (50, 50) and a.dtype == np.uint8
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {gridex.FREE, gridex.OBSTACLE}
    assert (a[0, :] == gridex.OBSTACLE).all()


def test_environment_loop():
    env = gridex.Environment(small(seed=2))
    obs = env.reset()
    assert set(obs) == {"nodes", "edges", "current", "neighbors"}
    assert obs["neighbors"][0] == obs["current"]
    assert all(len(row) == 5 for row in obs["nodes"])
    steps = 0
    while not env.done:
        obs, reward, done, info = env.step(min(1, len(obs["neighbors"]) - 1))
        assert -1.0 <= reward <= 0.0
        assert info["f"] == pytest.approx(info["c_move"] + info["c_next"] - info["c_prev"])
        steps += 1
        if steps > 300:
            break
    with pytest.raises(gridex.StateError):
        env.step(0)
    truth, belief = env.truth(), env.belief()
    assert truth.shape == belief.shape == (50, 50)
    known = belief != gridex.UNKNOWN
    assert (belief[known] == truth[known]).all()


def test_math_helpers():
    assert gridex.expert_reward(0.0, 4.0) == 0.0
    assert gridex.expert_reward(8.0, 4.0) == -1.0
    assert gridex.expert_reward(4.0, 4.0) == pytest.approx(-(math.exp(0.5) - 1) / (math.e - 1), abs=1e-9)
    with pytest.raises(gridex.PreconditionError):
        gridex.expert_reward(9.0, 4.0)
    assert gridex.coverage_gap(1.0, 5.0, 6.0) == 0.0
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
    assert gridex.modularity(edges, [0, 0, 0, 1, 1, 1]) == pytest.approx(5 / 14, abs=1e-15)
    with pytest.raises(gridex.UndefinedScoreError):
        gridex.modularity([], [0, 1])
    xs = [0.0, 3.0, 1.0, 4.0, 2.0]
    order, cost = gridex.solve_open_tsp([[abs(a - b) for b in xs] for a in xs], 0)
    assert order == [0, 2, 4, 1, 3] and cost == pytest.approx(4.0)


def test_run_and_replay(tmp_path):
    log = tmp_path / "ep.jsonl.gz"
    metrics = gridex.run_policy("greedy-frontier", small(seed=1), str(log))
    assert metrics["termination"] == "complete"
    rep = gridex.replay_log(str(log))
    assert rep["metrics_match"] and rep["observations_match"]
    assert rep["metrics"]["distance"] == metrics["distance"]
    assert gridex.builtin_policies() == ["expert-follow", "coverage", "greedy-frontier", "guidepost-heuristic"]


def test_protocol_session():
    s = gridex.ProtocolSession(small())
    r = json.loads(s.handle(json.dumps({"cmd": "reset", "config": {"seed": 5}})))
    assert r["done"] is False and r["reward"] == 0.0
    bad = json.loads(s.handle(json.dumps({"cmd": "step", "action": 99})))
    assert bad["error"]["kind"] == "protocol"
    r = json.loads(s.handle(json.dumps({"cmd": "step", "action": 0})))
    assert abs(r["reward"] - gridex.expert_reward(r["info"]["d"], r["info"]["d_n"])) <= 1e-6
    assert json.loads(s.handle('{"cmd":"close"}')) == {"closed": True}
    assert s.closed


@pytest.mark.skipif(not CLI, reason="GRIDEX_CLI not set")
def test_stdio_client():
    client = gridex.StdioClient((CLI, "serve", "--transport", "stdio"))
    try:
        r = client.reset(**{**SMALL, "seed": 6})
        n = len(r["obs"]["neighbors"])
        r = client.step(n - 1)
        assert -1.0 <= r["reward"] <= 0.0
        with pytest.raises(gridex.ProtocolError):
            client.step(n + 30)
    finally:
        client.close()
    assert client.proc.returncode == 0


@pytest.mark.skipif(not CLI, reason="GRIDEX_CLI not set")
def test_cli_logs_are_reproducible(tmp_path):
    flags = ["--width", "50", "--height", "50", "--node-resolution", "1.6", "--sensor-range", "8",
             "--local-size", "16", "--rooms", "4", "--room-min", "8", "--room-max", "16"]
    for d in ("a", "b"):
        subprocess.run([CLI, "run", "--policy", "coverage", "--seeds", "0..1", "--log-dir", str(tmp_path / d),
                        "--csv", str(tmp_path / f"{d}.csv"), *flags], check=True)
    for name in ("coverage_0.jsonl.gz", "coverage_1.jsonl.gz"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        subprocess.run([CLI, "replay", str(tmp_path / "a" / name)], check=True, capture_output=True)
    # last two columns are wall-clock timings
    rows = [[r.split(",")[:-2] for r in (tmp_path / f"{d}.csv").read_text().splitlines()] for d in ("a", "b")]
    assert rows[0] == rows[1] and len(rows[0]) == 3
