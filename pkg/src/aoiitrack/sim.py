"""Closed-loop simulator measuring the mean AoII of a scheduling policy.

Each episode owns three independent random streams (source, channel, policy)
spawned from ``(seed, episode)``, so two policies simulated with the same seed
see identical ground-truth trajectories and identical erasure draws.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .belief import initial_belief, observation_posterior, propagate, expected_cost
from .policies import make_policy
from .source import ChannelModel, JointSourceModel, project, step_source, transmit


@dataclass(frozen=True)
class PolicySpec:
    name: str
    lookahead: int = 1
    net: object = None

    def build(self, model, channel):
        return make_policy(self.name, model, channel, self.lookahead, self.net)


@dataclass(frozen=True)
class EpisodeConfig:
    model: JointSourceModel
    channel: ChannelModel
    policy: PolicySpec
    slots: int = 100_000
    d_max: int = 15
    seed: int = 0
    initial_state: int = 0
    record_trace: bool = False

    def __post_init__(self):
        if self.slots < 1:
            raise ValueError("slots must be >= 1")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")


@dataclass
class EpisodeResult:
    maoii: float
    slots: int
    action_histogram: np.ndarray
    erasure_count: int
    mean_expected_cost: float
    aoii_trace: Optional[np.ndarray] = None
    action_trace: Optional[np.ndarray] = None

    @property
    def erasure_rate(self) -> float:
        return self.erasure_count / self.slots


@dataclass
class BatchResult:
    maoii: float
    stderr: float
    slots: int
    erasure_rate: float
    action_histogram: np.ndarray
    episodes: list = field(default_factory=list)


def episode_streams(seed: int, episode: int = 0):
    """``(source, channel, policy)`` generators for one episode."""
    ss = np.random.SeedSequence(seed, spawn_key=(episode,))
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def simulate(cfg: EpisodeConfig, episode: int = 0, policy=None):
    """Run the closed loop, yielding
    ``(t, belief, map_state, true_state, aoii, action, packet)`` for every slot
    ``t = 1 .. cfg.slots``.

    ``packet`` is the observation delivered at the start of slot ``t`` and
    ``action`` the sensor queried during it.
    """
    model, channel = cfg.model, cfg.channel
    src, chan, pol = episode_streams(cfg.seed, episode)
    if policy is None:
        policy = cfg.policy.build(model, channel)

    x = cfg.initial_state
    b = initial_belief(model, x, cfg.d_max)
    aoii = 0
    a = policy.act(b, pol)
    policy.record(a)
    packet = transmit(channel, a, project(model, x, a), chan)
    x = step_source(model, x, src)
    for t in range(1, cfg.slots + 1):
        if not packet.erased:
            policy.delivered(a)
        b, xhat = propagate(observation_posterior(b, packet, model), model)
        aoii = 0 if xhat == x else min(aoii + 1, cfg.d_max)
        a = policy.act(b, pol)
        policy.record(a)
        yield t, b, xhat, x, aoii, a, packet
        packet = transmit(channel, a, project(model, x, a), chan)
        x = step_source(model, x, src)


def run_episode(cfg: EpisodeConfig, episode: int = 0) -> EpisodeResult:
    K = cfg.model.n_sensors
    hist = np.zeros(K, dtype=np.int64)
    erased = 0
    total_age = 0
    total_cost = 0.0
    trace = np.empty(cfg.slots, dtype=np.int64) if cfg.record_trace else None
    actions = np.empty(cfg.slots, dtype=np.int64) if cfg.record_trace else None
    for t, b, xhat, x, aoii, a, packet in simulate(cfg, episode):
        assert 0 <= aoii <= cfg.d_max
        total_age += aoii
        total_cost += expected_cost(b)
        hist[a] += 1
        erased += packet.erased
        if trace is not None:
            trace[t - 1] = aoii
            actions[t - 1] = a
    n = cfg.slots
    return EpisodeResult(total_age / n, n, hist, erased, total_cost / n, trace, actions)


def _run_one(args):
    cfg, episode = args
    return run_episode(cfg, episode)


def run_batch(cfg: EpisodeConfig, episodes: int = 10, slots: Optional[int] = None,
              workers: int = 1) -> BatchResult:
    """Independent episodes, each restarted from the initial state.

    ``slots`` overrides ``cfg.slots`` as the per-episode length. The aggregate
    is the slot-weighted mean; ``stderr`` is the standard error of the
    per-episode means (0 for a single episode).
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if slots is not None:
        cfg = replace(cfg, slots=slots)
    jobs = [(cfg, e) for e in range(episodes)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return aggregate(results)


def aggregate(results) -> BatchResult:
    slots = sum(r.slots for r in results)
    maoii = sum(r.maoii * r.slots for r in results) / slots
    means = np.array([r.maoii for r in results])
    stderr = float(means.std(ddof=1) / math.sqrt(len(means))) if len(means) > 1 else 0.0
    erasure = sum(r.erasure_count for r in results) / slots
    hist = np.sum([r.action_histogram for r in results], axis=0)
    return BatchResult(maoii, stderr, slots, erasure, hist, list(results))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.start) * 1000.0
