"""Grid-world exploration engine (C++ core)."""

import json
import subprocess

from ._core import (
    ConfigError,
    EnvConfig,
    Environment,
    GridexError,
    IntegrityError,
    InputError,
    LivelockError,
    PreconditionError,
    ProtocolError,
    ProtocolSession,
    StateError,
    UndefinedScoreError,
    builtin_policies,
    coverage_gap,
    expert_reward,
    generate_map,
    modularity,
    replay_log,
    run_policy,
    solve_open_tsp,
)

UNKNOWN, FREE, OBSTACLE = 0, 1, 2


class StdioClient:
    """Talks to `gridex serve --transport stdio` in a child process."""

    def __init__(self, argv=("gridex", "serve", "--transport", "stdio")):
        self.proc = subprocess.Popen(list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)

    def request(self, msg):
        self.proc.stdin.write(json.dumps(msg) + "\n")
        self.proc.stdin.flush()
        reply = json.loads(self.proc.stdout.readline())
        if "error" in reply:
            raise ProtocolError(reply["error"]["message"])
        return reply

    def reset(self, **config):
        return self.request({"cmd": "reset", "config": config})

    def step(self, action):
        return self.request({"cmd": "step", "action": action})

    def close(self):
        try:
            self.request({"cmd": "close"})
        finally:
            self.proc.stdin.close()
            self.proc.wait()
