"""Config-driven policy sweeps over channel quality or grid size.

Sweep files are INI documents with a ``[sweep]`` section and an optional
``[rl]`` section::

    [sweep]
    scenario = fire            ; fire | grid | file
    grids = 3x3, 4x4           ; grid scenario only
    boundary = renormalize     ; grid scenario only: renormalize | stay
    model_file = model.txt     ; file scenario only
    policies = random, rr, ea-rr, mpc-wtc:1, mpc-wtc:2, rl-mpc:1
    rho_s = 0.6, 0.8, 1.0
    episodes = 5
    slots = 100000
    seed = 0
    dmax = 15
    initial_state = 0
    output = results.csv
    timing = true              ; false writes wall_ms as 0 (byte-stable output)

    [rl]
    iterations = 4
    samples = 10000
    epochs = 20
    lr = 1e-3
    hidden = 64
    batch_size = 1
    seed = 0
    checkpoint = net.txt       ; use a trained net instead of training per point

A policy entry is ``name`` or ``name:lookahead``. Every (policy, point) pair
runs with the same base seed, so policies at one point share ground-truth and
erasure draws.
"""

from __future__ import annotations

import configparser
import csv
import io
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .policies import POLICY_NAMES
from .rlmpc import RlMpcConfig, train_rl_mpc
from .scenarios import build_scenario_fire, build_scenario_grid
from .sim import EpisodeConfig, PolicySpec, run_batch
from .source import ChannelModel, load_model
from .valuenet import load_net

CSV_HEADER = ["scenario", "param", "policy", "lookahead", "episodes", "slots", "seed",
              "maoii", "stderr", "erasure_rate", "wall_ms"]


@dataclass
class SweepSpec:
    scenario: str
    policies: list
    rho_s: list
    grids: list = field(default_factory=list)
    boundary: str = "renormalize"
    model_file: Optional[str] = None
    episodes: int = 10
    slots: int = 100_000
    seed: int = 0
    dmax: int = 15
    initial_state: int = 0
    output: Optional[str] = None
    timing: bool = True
    rl: RlMpcConfig = field(default_factory=RlMpcConfig)
    rl_checkpoint: Optional[str] = None

    def __post_init__(self):
        if not self.policies:
            raise ValueError("a sweep needs at least one policy")
        if not self.rho_s:
            raise ValueError("a sweep needs at least one rho_s value")
        if self.scenario == "grid" and not self.grids:
            raise ValueError("grid sweeps need at least one grid size")
        if self.scenario not in ("fire", "grid", "file"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        for name, _ in self.policies:
            if name not in POLICY_NAMES:
                raise ValueError(f"unknown policy {name!r}")

    def points(self):
        """``(model_builder_args, rho_s, param_label)`` in output order."""
        grids = self.grids if self.scenario == "grid" else [None]
        out = []
        for g in grids:
            for r in self.rho_s:
                if g is None:
                    label = repr(r)
                elif len(self.rho_s) == 1:
                    label = f"{g[0]}x{g[1]}"
                else:
                    label = f"{g[0]}x{g[1]}@{r!r}"
                out.append((g, r, label))
        return out

    def build_model(self, grid):
        if self.scenario == "fire":
            return build_scenario_fire()
        if self.scenario == "grid":
            return build_scenario_grid(grid[0], grid[1], self.boundary)
        return load_model(self.model_file)


def _list(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_policy(entry: str):
    name, _, look = entry.partition(":")
    return name.strip(), int(look) if look else 1


def parse_grid(entry: str):
    lx, _, ly = entry.lower().partition("x")
    return int(lx), int(ly)


def loads_sweep(text: str) -> SweepSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    if "sweep" not in cp:
        raise ValueError("sweep file needs a [sweep] section")
    s = cp["sweep"]
    rl_kw = {}
    checkpoint = None
    if "rl" in cp:
        r = cp["rl"]
        names = {"iterations": ("iterations", int), "samples": ("samples_per_iteration", int),
                 "epochs": ("epochs", int), "lr": ("learning_rate", float),
                 "hidden": ("hidden_width", int), "batch_size": ("batch_size", int),
                 "seed": ("seed", int), "episode_slots": ("episode_slots", int)}
        for key, (attr, conv) in names.items():
            if key in r:
                rl_kw[attr] = conv(r[key])
        checkpoint = r.get("checkpoint")
    return SweepSpec(
        scenario=s.get("scenario", "fire"),
        policies=[parse_policy(p) for p in _list(s.get("policies", ""))],
        rho_s=[float(v) for v in _list(s.get("rho_s", "0.8"))],
        grids=[parse_grid(g) for g in _list(s.get("grids", ""))],
        boundary=s.get("boundary", "renormalize"),
        model_file=s.get("model_file"),
        episodes=s.getint("episodes", 10),
        slots=s.getint("slots", 100_000),
        seed=s.getint("seed", 0),
        dmax=s.getint("dmax", 15),
        initial_state=s.getint("initial_state", 0),
        output=s.get("output"),
        timing=s.getboolean("timing", True),
        rl=RlMpcConfig(**rl_kw),
        rl_checkpoint=checkpoint,
    )


def load_sweep(path) -> SweepSpec:
    return loads_sweep(Path(path).read_text())


def run_sweep(spec: SweepSpec, progress=None) -> list:
    """One row dict per (sweep point, policy), in spec order."""
    rows = []
    checkpoint_net = load_net(spec.rl_checkpoint) if spec.rl_checkpoint else None
    for grid, rho, label in spec.points():
        model = spec.build_model(grid)
        channel = ChannelModel(rho)
        nets = {}
        for name, look in spec.policies:
            start = time.perf_counter()
            net = None
            if name == "rl-mpc":
                if checkpoint_net is not None:
                    net = checkpoint_net
                else:
                    if look not in nets:
                        cfg = replace(spec.rl, horizon=look, d_max=spec.dmax,
                                      initial_state=spec.initial_state)
                        nets[look] = train_rl_mpc(cfg, model, channel).net
                    net = nets[look]
            ep = EpisodeConfig(model, channel, PolicySpec(name, look, net), slots=spec.slots,
                               d_max=spec.dmax, seed=spec.seed,
                               initial_state=spec.initial_state)
            res = run_batch(ep, spec.episodes)
            wall = (time.perf_counter() - start) * 1000.0 if spec.timing else 0.0
            row = {
                "scenario": spec.scenario, "param": label, "policy": name,
                "lookahead": look if name in ("mpc-wtc", "rl-mpc") else 0,
                "episodes": spec.episodes, "slots": spec.slots, "seed": spec.seed,
                "maoii": res.maoii, "stderr": res.stderr,
                "erasure_rate": res.erasure_rate, "wall_ms": round(wall, 1),
            }
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def write_csv(rows, path) -> None:
    Path(path).write_text(rows_to_csv(rows))
