"""Sensor-scheduling rules: belief-agnostic benchmarks and look-ahead MPC."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .belief import Belief, expand_many, propagate_many, stage_costs
from .source import ChannelModel, JointSourceModel

POLICY_NAMES = ("random", "rr", "ea-rr", "mpc-wtc", "rl-mpc")


@dataclass
class PolicyState:
    last_action: int
    last_success_action: int

    @classmethod
    def fresh(cls, K: int) -> "PolicyState":
        # both round-robin variants then start at sensor 0
        return cls(K - 1, K - 1)


def random_action(K: int, rng: np.random.Generator) -> int:
    return int(rng.integers(K))


def round_robin_action(state: PolicyState, K: int) -> int:
    return (state.last_action + 1) % K


def erasure_aware_rr_action(state: PolicyState, K: int) -> int:
    return (state.last_success_action + 1) % K


# ---------------------------------------------------------------------------
# look-ahead
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LookaheadConfig:
    """Horizon and terminal cost of the look-ahead tree.

    ``terminal_cost`` maps a stack of belief masses ``(B, N, D1)`` to ``(B,)``
    costs; ``None`` is the zero terminal cost.
    """

    horizon: int = 1
    terminal_cost: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def tree_values(masses: np.ndarray, m: int, cfg: LookaheadConfig,
                model: JointSourceModel, channel: ChannelModel):
    """Values and minimising actions at depth ``m`` for a stack of beliefs.

    ``masses`` has shape ``(B, N, D1)``; returns ``(values, actions)``. The
    one-step costs of every action come from :func:`stage_costs`; deeper levels
    or the terminal cost are added on top branch by branch.
    """
    B = masses.shape[0]
    q = stage_costs(masses, model, channel)
    leaf = m + 1 == cfg.horizon
    if not leaf or cfg.terminal_cost is not None:
        for a in range(model.n_sensors):
            b_hat, probs = expand_many(masses, a, model, channel)
            keep = probs > 0
            nxt, _, _ = propagate_many(b_hat[keep], model.transition)
            if leaf:
                tail = cfg.terminal_cost(nxt)
            else:
                tail = tree_values(nxt, m + 1, cfg, model, channel)[0]
            weighted = np.zeros(probs.shape)
            weighted[keep] = probs[keep] * tail
            q[:, a] += weighted.sum(axis=1)
    best = q.argmin(axis=1)
    return q[np.arange(B), best], best


def lookahead_cost(b: Belief, m: int, cfg: LookaheadConfig,
                   model: JointSourceModel, channel: ChannelModel):
    """Expected cost over the remaining ``horizon - m`` steps; ``(value, best_action)``."""
    if not 0 <= m < cfg.horizon:
        raise ValueError(f"depth {m} outside [0, {cfg.horizon})")
    v, a = tree_values(b.mass[None], m, cfg, model, channel)
    return float(v[0]), int(a[0])


def mpc_action(b: Belief, cfg: LookaheadConfig, model: JointSourceModel,
               channel: ChannelModel) -> int:
    return lookahead_cost(b, 0, cfg, model, channel)[1]


# ---------------------------------------------------------------------------
# closed-loop policy objects used by the simulator
# ---------------------------------------------------------------------------

class Policy:
    name = "policy"
    lookahead = 0

    def __init__(self, K: int):
        self.K = K
        self.state = PolicyState.fresh(K)

    def act(self, b: Belief, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def record(self, action: int) -> None:
        self.state.last_action = action

    def delivered(self, action: int) -> None:
        """Called when the packet requested with ``action`` arrived."""
        self.state.last_success_action = action


class RandomPolicy(Policy):
    name = "random"

    def act(self, b, rng):
        return random_action(self.K, rng)


class RoundRobinPolicy(Policy):
    name = "rr"

    def act(self, b, rng):
        return round_robin_action(self.state, self.K)


class ErasureAwareRRPolicy(Policy):
    name = "ea-rr"

    def act(self, b, rng):
        return erasure_aware_rr_action(self.state, self.K)


class MPCPolicy(Policy):
    name = "mpc-wtc"

    def __init__(self, model, channel, cfg: LookaheadConfig, name: str = None):
        super().__init__(model.n_sensors)
        self.model, self.channel, self.cfg = model, channel, cfg
        self.lookahead = cfg.horizon
        if name:
            self.name = name

    def act(self, b, rng):
        return mpc_action(b, self.cfg, self.model, self.channel)


def make_policy(name: str, model: JointSourceModel, channel: ChannelModel,
                lookahead: int = 1, net=None) -> Policy:
    """Build a fresh policy from its CLI name."""
    K = model.n_sensors
    if name == "random":
        return RandomPolicy(K)
    if name == "rr":
        return RoundRobinPolicy(K)
    if name == "ea-rr":
        return ErasureAwareRRPolicy(K)
    if name == "mpc-wtc":
        return MPCPolicy(model, channel, LookaheadConfig(lookahead))
    if name == "rl-mpc":
        if net is None:
            raise ValueError("rl-mpc needs a trained value net")
        return MPCPolicy(model, channel, LookaheadConfig(lookahead, net.terminal_cost), "rl-mpc")
    raise ValueError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
