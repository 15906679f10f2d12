"""Joint (state, AoII) belief calculus.

A belief is an ``N x (d_max + 1)`` matrix whose entry ``(i, age)`` is the
probability that the source is in joint state ``i`` and the monitor's AoII
equals ``age``. Ages saturate at ``d_max``.

The scalar operations (:func:`observation_posterior`, :func:`propagate`,
:func:`successors`) and the batched kernels used by the look-ahead tree share
one implementation: the scalar forms call the batched ones on a stack of one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .source import ChannelModel, JointSourceModel, Observation, ERASED, consistency_mask

MASS_TOL = 1e-9


class ImpossibleObservation(RuntimeError):
    """The observation has zero likelihood under the current belief."""


@dataclass(frozen=True, eq=False)
class Belief:
    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        if m.ndim != 2 or m.shape[1] < 2:
            raise ValueError(f"belief mass must be N x (d_max+1) with d_max >= 1, got {m.shape}")
        if m.flags.writeable:
            m = m.copy()
            m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def d_max(self) -> int:
        return self.mass.shape[1] - 1

    @property
    def n_states(self) -> int:
        return self.mass.shape[0]

    def marginal(self) -> np.ndarray:
        """State distribution, summing out the age."""
        return self.mass.sum(axis=1)

    def age_distribution(self) -> np.ndarray:
        return self.mass.sum(axis=0)

    def flat(self) -> np.ndarray:
        return self.mass.reshape(-1)

    def total(self) -> float:
        return float(self.mass.sum())


@dataclass(frozen=True)
class Successor:
    observation: Observation
    belief: Belief
    probability: float


class SuccessorSet(tuple):
    """Tuple of :class:`Successor` entries for one action."""

    @property
    def total_probability(self) -> float:
        return float(sum(s.probability for s in self))


def initial_belief(model: JointSourceModel, i0: int, d_max: int = 15) -> Belief:
    if not 0 <= i0 < model.n_states:
        raise IndexError(f"joint index {i0} out of range")
    m = np.zeros((model.n_states, d_max + 1))
    m[i0, 0] = 1.0
    return Belief(m)


def map_estimate(pi) -> int:
    # np.argmax returns the first maximiser: lowest index wins ties
    return int(np.argmax(pi))


def expected_cost(b: Belief) -> float:
    return float(b.age_distribution() @ np.arange(b.d_max + 1))


# ---------------------------------------------------------------------------
# batched kernels: stacks of beliefs with shape (B, N, D1)
# ---------------------------------------------------------------------------

def expected_cost_many(masses: np.ndarray) -> np.ndarray:
    return masses.sum(axis=1) @ np.arange(masses.shape[-1], dtype=float)


def propagate_many(b_hat: np.ndarray, P: np.ndarray):
    """One-slot prediction of a stack of observation-updated beliefs.

    Returns ``(beliefs, map_states, pi)``.
    """
    B, N, D1 = b_hat.shape
    pi = b_hat.sum(axis=2) @ P
    xhat = pi.argmax(axis=1)
    shifted = np.zeros_like(b_hat)
    shifted[:, :, 1:] = b_hat[:, :, :-1]
    shifted[:, :, -1] += b_hat[:, :, -1]
    out = np.matmul(P.T, shifted)
    rows = np.arange(B)
    out[rows, xhat, :] = 0.0
    out[rows, xhat, 0] = pi[rows, xhat]
    return out, xhat, pi


def propagated_cost_many(b_hat: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Expected cost of ``propagate_many(b_hat)`` without forming the beliefs.

    Every non-MAP state ages by one (saturating), so the cost is
    ``sum_m g(m) (1 - P[m, xhat])`` with ``g(m) = sum_age min(age+1, d_max) b_hat(m, age)``.
    """
    D1 = b_hat.shape[-1]
    ages = np.minimum(np.arange(1, D1 + 1), D1 - 1).astype(float)
    pi = b_hat.sum(axis=2) @ P
    xhat = pi.argmax(axis=1)
    g = b_hat @ ages
    return g.sum(axis=1) - np.einsum("bm,mb->b", g, P[:, xhat])


def stage_costs(masses: np.ndarray, model: JointSourceModel, channel: ChannelModel) -> np.ndarray:
    """One-step expected cost ``sum_o T(o) r(b^o)`` for every belief and action.

    Returns shape ``(B, K)``. Each symbol term is evaluated on the unnormalised
    posterior, since ``T(o) r(b^o)`` is linear in it.
    """
    P = model.transition
    M = model.all_masks
    D1 = masses.shape[-1]
    ages = np.minimum(np.arange(1, D1 + 1), D1 - 1).astype(float)
    pi_hat = masses.sum(axis=2)
    g = masses @ ages
    xs = ((pi_hat[:, None, :] * M) @ P).argmax(axis=2)
    gs = g[:, None, :] * M
    obs = gs.sum(axis=2) - (gs * P.T[xs]).sum(axis=2)
    q = np.zeros((masses.shape[0], model.n_sensors))
    for k in range(model.n_sensors):
        q[:, k] = obs[:, model.mask_sensor == k].sum(axis=1)
    q *= channel.rho_s
    xe = (pi_hat @ P).argmax(axis=1)
    erased = g.sum(axis=1) - np.einsum("bm,mb->b", g, P[:, xe])
    return q + channel.rho_e * erased[:, None]


def posterior_many(masses: np.ndarray, obs_masks: np.ndarray):
    """Bayes update of every belief in the stack by every symbol of one sensor.

    Returns ``(posteriors, likelihood)`` of shapes ``(B, S, N, D1)`` and
    ``(B, S)``; posteriors with zero likelihood are left as zeros.
    """
    like = masses.sum(axis=2) @ obs_masks.T
    w = np.divide(1.0, like, out=np.zeros_like(like), where=like > 0)
    post = masses[:, None, :, :] * (obs_masks[None, :, :] * w[:, :, None])[..., None]
    return post, like


def expand_many(masses: np.ndarray, a: int, model: JointSourceModel, channel: ChannelModel):
    """Observation-updated beliefs and branch probabilities under action ``a``.

    Branches are the symbols of sensor ``a`` in order, then the erasure.
    Returns ``(b_hat, probs)`` of shapes ``(B, S+1, N, D1)`` and ``(B, S+1)``.
    """
    post, like = posterior_many(masses, model.masks[a])
    b_hat = np.concatenate([post, masses[:, None]], axis=1)
    probs = np.concatenate(
        [channel.rho_s * like, np.full((masses.shape[0], 1), channel.rho_e)], axis=1)
    return b_hat, probs


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def observation_posterior(b: Belief, o: Observation, model: JointSourceModel) -> Belief:
    """Condition the belief about the previous slot on a delivered packet.

    Normalisation is over all consistent mass, so the result is a distribution
    and its marginal is the updated state distribution.
    """
    if o.erased:
        return b
    delta = consistency_mask(model, o)
    z = float(b.marginal() @ delta)
    if z <= 0.0:
        raise ImpossibleObservation(
            f"{o!r} is inconsistent with every believed state (marginal {b.marginal()})")
    post, _ = posterior_many(b.mass[None], delta[None])
    return Belief(post[0, 0])


def propagate(b_hat: Belief, model: JointSourceModel):
    """Advance an observation-updated belief by one slot; returns ``(belief, map_state)``."""
    out, xhat, _ = propagate_many(b_hat.mass[None], model.transition)
    before, after = b_hat.total(), float(out.sum())
    assert abs(after - before) <= MASS_TOL, f"belief mass {before} -> {after}"
    return Belief(out[0]), int(xhat[0])


def successors(b: Belief, a: int, model: JointSourceModel, channel: ChannelModel) -> SuccessorSet:
    if not 0 <= a < model.n_sensors:
        raise IndexError(f"sensor index {a} out of range")
    b_hat, probs = expand_many(b.mass[None], a, model, channel)
    symbols = model.components[a].values
    labels = [Observation(a, s) for s in symbols] + [ERASED]
    keep = np.flatnonzero(probs[0] > 0)
    nxt, _, _ = propagate_many(b_hat[0, keep], model.transition)
    return SuccessorSet(
        Successor(labels[j], Belief(nxt[n]), float(probs[0, j])) for n, j in enumerate(keep))


def dump_belief(b: Belief, model: JointSourceModel = None, precision: int = 6) -> str:
    """Plain-text matrix with state labels as rows and ages as columns."""
    labels = ([model.label(i) for i in range(b.n_states)] if model is not None
              else [str(i) for i in range(b.n_states)])
    width = max(precision + 3, 4)
    lw = max(len(s) for s in labels + ["state"])
    head = "state".ljust(lw) + "".join(f" {'d=' + str(d):>{width}}" for d in range(b.d_max + 1))
    lines = [head]
    for lab, row in zip(labels, b.mass):
        lines.append(lab.ljust(lw) + "".join(f" {x:>{width}.{precision}f}" for x in row))
    return "\n".join(lines) + "\n"
