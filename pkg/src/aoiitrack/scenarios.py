"""The two benchmark sources: temperature/fire/freeze events and a 2-D random walk."""

from __future__ import annotations

import numpy as np

from .source import ComponentSpec, build_joint_space

FIRE_STATES = [
    ("H", "e1", "~e2"),
    ("H", "~e1", "~e2"),
    ("M", "~e1", "~e2"),
    ("L", "~e1", "e2"),
    ("L", "~e1", "~e2"),
]

FIRE_TRANSITION = [
    [0.1, 0.7, 0.1, 0.05, 0.05],
    [0.4, 0.4, 0.1, 0.05, 0.05],
    [0.05, 0.05, 0.8, 0.05, 0.05],
    [0.05, 0.05, 0.1, 0.1, 0.7],
    [0.05, 0.05, 0.1, 0.4, 0.4],
]

GRID_STAY = 0.5
GRID_HORIZONTAL = 0.4
GRID_VERTICAL = 0.1


def build_scenario_fire():
    """Temperature {H, M, L} with fire (only at H) and freeze (only at L) events."""
    components = [
        ComponentSpec("temperature", ("H", "M", "L")),
        ComponentSpec("fire", ("e1", "~e1")),
        ComponentSpec("freeze", ("e2", "~e2")),
    ]
    return build_joint_space(components, FIRE_TRANSITION, reachable=FIRE_STATES)


def grid_transition(lx: int, ly: int, boundary: str = "renormalize") -> np.ndarray:
    """Random-walk matrix over cells ordered x fastest: index = x + lx * y.

    At edges the infeasible moves are removed and either the whole row is
    renormalised (``"renormalize"``) or their mass is added to staying put
    (``"stay"``).
    """
    if lx < 1 or ly < 1:
        raise ValueError("grid dimensions must be >= 1")
    if boundary not in ("renormalize", "stay"):
        raise ValueError(f"unknown boundary rule {boundary!r}")
    h, v = GRID_HORIZONTAL / 2, GRID_VERTICAL / 2
    moves = [(-1, 0, h), (1, 0, h), (0, -1, v), (0, 1, v)]
    n = lx * ly
    P = np.zeros((n, n))
    for y in range(ly):
        for x in range(lx):
            i = x + lx * y
            P[i, i] = GRID_STAY
            lost = 0.0
            for dx, dy, p in moves:
                nx, ny = x + dx, y + dy
                if 0 <= nx < lx and 0 <= ny < ly:
                    P[i, nx + lx * ny] += p
                else:
                    lost += p
            if boundary == "stay":
                P[i, i] += lost
            else:
                P[i] /= P[i].sum()
    return P


def build_scenario_grid(lx: int, ly: int, boundary: str = "renormalize"):
    """Object on an ``lx x ly`` grid; sensor 0 reads x, sensor 1 reads y."""
    components = [
        ComponentSpec("x", tuple(str(i) for i in range(lx))),
        ComponentSpec("y", tuple(str(j) for j in range(ly))),
    ]
    return build_joint_space(components, grid_transition(lx, ly, boundary))
