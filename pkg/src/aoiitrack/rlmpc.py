"""Iterative terminal-cost learning for look-ahead MPC.

Iteration ``d`` fits a fresh zero-output net to the ``horizon``-step look-ahead
values whose leaves are priced by the net from iteration ``d - 1`` (zero for
``d = 1``), so the learned cost covers roughly ``d * horizon`` steps.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .belief import Belief
from .policies import LookaheadConfig, MPCPolicy, tree_values, mpc_action
from .sim import EpisodeConfig, PolicySpec, simulate
from .source import ChannelModel, JointSourceModel
from .valuenet import ValueNet, init_net, save_net, train_batch


@dataclass(frozen=True)
class RlMpcConfig:
    horizon: int = 1
    iterations: int = 4
    samples_per_iteration: int = 10_000
    learning_rate: float = 1e-3
    epochs: int = 20
    batch_size: int = 1
    hidden_width: int = 64
    seed: int = 0
    d_max: int = 15
    initial_state: int = 0
    episode_slots: int = 1_000  # restart period while collecting beliefs

    def __post_init__(self):
        if self.iterations < 1 or self.samples_per_iteration < 1:
            raise ValueError("iterations and samples_per_iteration must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass
class TrainingResult:
    net: ValueNet
    losses: list
    wall_times: list
    nets: list


def collect_beliefs(model: JointSourceModel, channel: ChannelModel, policy, count: int,
                    rng: np.random.Generator, d_max: int = 15, initial_state: int = 0,
                    episode_slots: Optional[int] = None) -> list:
    """Beliefs visited by ``policy`` in simulated episodes from the known start.

    ``policy`` is a :class:`PolicySpec`; episodes of ``episode_slots`` slots
    (default: one episode of ``count`` slots) are run until ``count`` beliefs
    have been recorded.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    length = episode_slots or count
    seed = int(rng.integers(2**63))
    out = []
    episode = 0
    while len(out) < count:
        n = min(length, count - len(out))
        cfg = EpisodeConfig(model, channel, policy, slots=n, d_max=d_max, seed=seed,
                            initial_state=initial_state)
        out.extend(step[1] for step in simulate(cfg, episode))
        episode += 1
    return out


def lookahead_targets(masses: np.ndarray, horizon: int, prev_net: Optional[ValueNet],
                      model: JointSourceModel, channel: ChannelModel,
                      chunk: int = 1024) -> np.ndarray:
    """Look-ahead value of every belief with leaves priced by ``prev_net``."""
    cfg = LookaheadConfig(horizon, None if prev_net is None else prev_net.terminal_cost)
    parts = [tree_values(masses[s:s + chunk], 0, cfg, model, channel)[0]
             for s in range(0, len(masses), chunk)]
    return np.concatenate(parts)


def rl_iteration(d: int, prev_net: Optional[ValueNet], beliefs, cfg: RlMpcConfig,
                 model: JointSourceModel, channel: ChannelModel):
    """Fit a fresh net to look-ahead targets; returns ``(net, final_loss, targets)``."""
    masses = np.stack([b.mass if isinstance(b, Belief) else b for b in beliefs])
    targets = lookahead_targets(masses, cfg.horizon, prev_net if d > 1 else None, model, channel)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(d, 1)))
    net = init_net(masses[0].size, cfg.hidden_width, rng=rng)
    net.seed = cfg.seed
    net, loss = train_batch(net, masses.reshape(len(masses), -1), targets,
                            cfg.learning_rate, cfg.epochs, cfg.batch_size, rng)
    net.iteration = d
    return net, loss, targets


def train_rl_mpc(cfg: RlMpcConfig, model: JointSourceModel, channel: ChannelModel,
                 checkpoint_dir=None, log_path=None, progress=None) -> TrainingResult:
    """Run ``cfg.iterations`` rounds; beliefs are gathered under the current policy."""
    net = None
    losses, walls, nets = [], [], []
    for d in range(1, cfg.iterations + 1):
        start = time.perf_counter()
        spec = PolicySpec("mpc-wtc", cfg.horizon) if net is None else \
            PolicySpec("rl-mpc", cfg.horizon, net)
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(d, 0)))
        beliefs = collect_beliefs(model, channel, spec, cfg.samples_per_iteration, rng,
                                  cfg.d_max, cfg.initial_state, cfg.episode_slots)
        net, loss, _ = rl_iteration(d, net, beliefs, cfg, model, channel)
        losses.append(loss)
        walls.append(time.perf_counter() - start)
        nets.append(net)
        if checkpoint_dir is not None:
            Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)
            save_net(net, Path(checkpoint_dir) / f"iter{d}.net")
        if progress is not None:
            progress(d, loss, walls[-1])
    if log_path is not None:
        write_training_log(log_path, losses, walls)
    return TrainingResult(net, losses, walls, nets)


def write_training_log(path, losses, walls) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "mean_loss", "wall_time"])
        for d, (loss, wall) in enumerate(zip(losses, walls), 1):
            w.writerow([d, repr(loss), f"{wall:.3f}"])


def rl_mpc_action(b: Belief, net: ValueNet, horizon: int, model: JointSourceModel,
                  channel: ChannelModel) -> int:
    return mpc_action(b, LookaheadConfig(horizon, net.terminal_cost), model, channel)


def rl_mpc_policy(net: ValueNet, horizon: int, model, channel) -> MPCPolicy:
    return MPCPolicy(model, channel, LookaheadConfig(horizon, net.terminal_cost), "rl-mpc")
