"""Joint Markov source, sensor projections and the one-slot erasure channel.

States and sensors are indexed from 0. The joint state ordering is frozen when
the model is built; every belief matrix and transition row indexes against it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

ROW_TOL = 1e-9


class ModelError(ValueError):
    """Raised for malformed source models or model files."""


@dataclass(frozen=True)
class ComponentSpec:
    name: str
    values: tuple

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if len(values) < 1:
            raise ModelError(f"component {self.name!r} has no values")
        if len(set(values)) != len(values):
            raise ModelError(f"component {self.name!r} has duplicate values")

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class JointSourceModel:
    """Immutable joint source: component specs, ordered joint states and P.

    Use :func:`build_joint_space` rather than constructing directly.
    """

    components: tuple
    states: tuple
    transition: np.ndarray
    # codes[i, k] = index of states[i][k] in components[k].values
    codes: np.ndarray = field(repr=False)
    # masks[k][s, i] = 1.0 iff joint state i shows symbol s on sensor k
    masks: tuple = field(repr=False)
    cumulative: np.ndarray = field(repr=False)
    # all sensors' symbol masks stacked, and the sensor owning each row
    all_masks: np.ndarray = field(repr=False)
    mask_sensor: np.ndarray = field(repr=False)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_sensors(self) -> int:
        return len(self.components)

    def index(self, state: Sequence) -> int:
        return self.states.index(tuple(state))

    def project(self, i: int, k: int):
        return project(self, i, k)

    def label(self, i: int) -> str:
        return "(" + ",".join(str(v) for v in self.states[i]) + ")"


def _product_order(components):
    # first component varies fastest: {(a,α),(b,α),(a,β),(b,β)}
    rev = [c.values for c in reversed(components)]
    return [tuple(reversed(t)) for t in itertools.product(*rev)]


def build_joint_space(components, transition, reachable=None) -> JointSourceModel:
    """Build a joint source model.

    If ``reachable`` is given it fixes both the retained joint states and their
    order; otherwise all combinations are used, first component fastest.
    """
    components = tuple(components)
    if not components:
        raise ModelError("at least one component is required")
    if reachable is None:
        states = _product_order(components)
    else:
        states = [tuple(s) for s in reachable]
    if len(set(states)) != len(states):
        raise ModelError("duplicate joint state")
    for s in states:
        if len(s) != len(components):
            raise ModelError(f"joint state {s} does not have {len(components)} entries")
        for v, c in zip(s, components):
            if v not in c.values:
                raise ModelError(f"{v!r} is not a value of component {c.name!r}")

    P = np.array(transition, dtype=float)
    n = len(states)
    if P.shape != (n, n):
        raise ModelError(f"transition has shape {P.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(P)) or P.min() < 0.0 or P.max() > 1.0:
        raise ModelError("transition entries must lie in [0, 1]")
    dev = np.abs(P.sum(axis=1) - 1.0)
    if dev.max() > ROW_TOL:
        bad = int(dev.argmax())
        raise ModelError(f"row {bad} of transition sums to {P[bad].sum()!r}")
    P.setflags(write=False)

    codes = np.array([[c.values.index(v) for v, c in zip(s, components)] for s in states],
                     dtype=np.intp).reshape(n, len(components))
    codes.setflags(write=False)
    masks = []
    for k, c in enumerate(components):
        m = np.zeros((c.size, n))
        m[codes[:, k], np.arange(n)] = 1.0
        m.setflags(write=False)
        masks.append(m)
    cum = np.cumsum(P, axis=1)
    cum.setflags(write=False)
    all_masks = np.concatenate(masks, axis=0)
    all_masks.setflags(write=False)
    owner = np.repeat(np.arange(len(components)), [c.size for c in components])
    owner.setflags(write=False)
    return JointSourceModel(components, tuple(states), P, codes, tuple(masks), cum,
                            all_masks, owner)


def project(model: JointSourceModel, i: int, k: int):
    if not 0 <= i < model.n_states:
        raise IndexError(f"joint index {i} out of range")
    if not 0 <= k < model.n_sensors:
        raise IndexError(f"sensor index {k} out of range")
    return model.states[i][k]


@dataclass(frozen=True)
class Observation:
    """A delivered packet ``(sensor, symbol)``, or an erasure when both are None."""

    sensor: Optional[int] = None
    symbol: object = None

    @property
    def erased(self) -> bool:
        return self.sensor is None

    def __repr__(self):
        if self.erased:
            return "Erased"
        return f"Value({self.sensor}, {self.symbol!r})"


ERASED = Observation()


def value(model: JointSourceModel, k: int, symbol) -> Observation:
    """Checked constructor for a delivered observation."""
    if symbol not in model.components[k].values:
        raise ModelError(f"{symbol!r} is not a value of sensor {k}")
    return Observation(k, symbol)


def consistent(model: JointSourceModel, o: Observation, i: int) -> bool:
    if o.erased:
        raise ValueError("an erased observation carries no consistency information")
    return project(model, i, o.sensor) == o.symbol


def consistency_mask(model: JointSourceModel, o: Observation) -> np.ndarray:
    """0/1 vector over joint states; the indicator of the observation update."""
    if o.erased:
        raise ValueError("an erased observation carries no consistency information")
    s = model.components[o.sensor].values.index(o.symbol)
    return model.masks[o.sensor][s]


def step_source(model: JointSourceModel, i: int, rng: np.random.Generator) -> int:
    row = model.cumulative[i]
    j = int(np.searchsorted(row, rng.random(), side="right"))
    return min(j, model.n_states - 1)


@dataclass(frozen=True)
class ChannelModel:
    """Erasure channel with a fixed one-slot delay."""

    rho_s: float

    def __post_init__(self):
        if not 0.0 <= self.rho_s <= 1.0:
            raise ValueError(f"rho_s={self.rho_s} outside [0, 1]")

    @property
    def rho_e(self) -> float:
        return 1.0 - self.rho_s


def transmit(channel: ChannelModel, k: int, symbol, rng: np.random.Generator) -> Observation:
    # always consume one draw so channel streams stay aligned across policies
    if rng.random() < channel.rho_s:
        return Observation(k, symbol)
    return ERASED


# ---------------------------------------------------------------------------
# model files
#
#   # comment
#   component <name> <value> <value> ...     (one line per sensor, in order)
#   state <value_1> ... <value_K>            (optional; ordered reachable states)
#   row <p_1> ... <p_N>                      (one line per state, in order)
#
# Tokens are whitespace separated, so names and values may not contain spaces.
# Probabilities are written with repr() and round-trip exactly.
# ---------------------------------------------------------------------------

def dumps_model(model: JointSourceModel) -> str:
    lines = ["# joint Markov source model"]
    for c in model.components:
        lines.append(" ".join(["component", c.name, *map(str, c.values)]))
    for s in model.states:
        lines.append(" ".join(["state", *map(str, s)]))
    for r in model.transition:
        lines.append(" ".join(["row", *(repr(float(p)) for p in r)]))
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> JointSourceModel:
    components, states, rows = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "component":
            if len(rest) < 2:
                raise ModelError(f"line {lineno}: component needs a name and values")
            components.append(ComponentSpec(rest[0], tuple(rest[1:])))
        elif key == "state":
            states.append(tuple(rest))
        elif key == "row":
            try:
                rows.append([float(x) for x in rest])
            except ValueError as exc:
                raise ModelError(f"line {lineno}: {exc}") from None
        else:
            raise ModelError(f"line {lineno}: unknown keyword {key!r}")
    return build_joint_space(components, rows, reachable=states or None)


def save_model(model: JointSourceModel, path) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path) -> JointSourceModel:
    return loads_model(Path(path).read_text())
