"""Feed-forward terminal-cost approximator with two ReLU hidden layers."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class TrainingDivergence(RuntimeError):
    pass


def relu(x):
    return np.maximum(x, 0.0)


def drelu(x):
    return np.where(x > 0, 1.0, 0.0)


PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")


class ValueNet:
    """Q(b) = W3 relu(W2 relu(W1 b + b1) + b2) + b3, weights stored as (in, out)."""

    def __init__(self, params: dict, seed=None, iteration: int = 0):
        self.params = {k: np.array(params[k], dtype=float) for k in PARAM_NAMES}
        self.seed = seed
        self.iteration = iteration

    @property
    def dims(self):
        W1, W2, W3 = self.params["W1"], self.params["W2"], self.params["W3"]
        return [W1.shape[0], W1.shape[1], W2.shape[1], W3.shape[1]]

    @property
    def input_dim(self) -> int:
        return self.params["W1"].shape[0]

    def copy(self) -> "ValueNet":
        return ValueNet(self.params, self.seed, self.iteration)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"input has length {x.shape[-1]}, net expects {self.input_dim}")
        return x

    def _forward(self, x):
        p = self.params
        z1 = x @ p["W1"] + p["b1"]
        a1 = relu(z1)
        z2 = a1 @ p["W2"] + p["b2"]
        a2 = relu(z2)
        y = a2 @ p["W3"] + p["b3"]
        return y[..., 0], (x, z1, a1, z2, a2)

    def forward(self, x):
        """Scalar for a single flattened belief, vector for a stack."""
        y, _ = self._forward(self._check(x))
        return float(y) if y.ndim == 0 else y

    def terminal_cost(self, masses: np.ndarray) -> np.ndarray:
        return self._forward(self._check(masses.reshape(masses.shape[0], -1)))[0]

    def gradient(self, x, target):
        """Parameter gradients of the mean of ``(Q(x) - target)**2 / 2``."""
        x = self._check(x)
        single = x.ndim == 1
        X = x[None] if single else x
        t = np.atleast_1d(np.asarray(target, dtype=float))
        y, (X, z1, a1, z2, a2) = self._forward(X)
        p = self.params
        dy = (y - t)[:, None] / X.shape[0]
        g = {"W3": a2.T @ dy, "b3": dy.sum(axis=0)}
        dz2 = (dy @ p["W3"].T) * drelu(z2)
        g["W2"] = a1.T @ dz2
        g["b2"] = dz2.sum(axis=0)
        dz1 = (dz2 @ p["W2"].T) * drelu(z1)
        g["W1"] = X.T @ dz1
        g["b1"] = dz1.sum(axis=0)
        return g

    def loss(self, X, targets) -> float:
        r = self._forward(self._check(X))[0] - np.asarray(targets, dtype=float)
        return float(np.mean(r * r))


def init_net(input_dim: int, hidden_width: int = 64, rng=None, seed=None) -> ValueNet:
    """He-initialised hidden layers; zero output layer so Q is identically 0."""
    if input_dim < 1 or hidden_width < 1:
        raise ValueError("dimensions must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    H = hidden_width
    params = {
        "W1": rng.normal(0.0, np.sqrt(2.0 / input_dim), (input_dim, H)),
        "b1": np.zeros(H),
        "W2": rng.normal(0.0, np.sqrt(2.0 / H), (H, H)),
        "b2": np.zeros(H),
        "W3": np.zeros((H, 1)),
        "b3": np.zeros(1),
    }
    return ValueNet(params, seed=seed)


def train_batch(net: ValueNet, X, targets, learning_rate: float = 1e-3, epochs: int = 1,
                batch_size: int = 1, rng=None):
    """Plain minibatch SGD on the squared residual; returns ``(net, final_mse)``.

    Each epoch visits the samples in a fresh permutation drawn from ``rng``.
    The input net is left untouched.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(targets, dtype=float)
    if len(X) == 0:
        raise ValueError("no training samples")
    if rng is None:
        rng = np.random.default_rng(0)
    net = net.copy()
    n = len(X)
    for _ in range(epochs):
        order = rng.permutation(n)
        for s in range(0, n, batch_size):
            idx = order[s:s + batch_size]
            g = net.gradient(X[idx], y[idx])
            for k in PARAM_NAMES:
                net.params[k] -= learning_rate * g[k]
        loss = net.loss(X, y)
        if not np.isfinite(loss):
            raise TrainingDivergence(f"training loss became {loss}")
    return net, net.loss(X, y)


# ---------------------------------------------------------------------------
# checkpoints
#
#   valuenet v1
#   dims <in> <h1> <h2> <out>
#   seed <int or none>
#   iteration <d>
#   W1 <row-major floats> ... (one line per parameter, in PARAM_NAMES order)
# ---------------------------------------------------------------------------

def save_net(net: ValueNet, path) -> None:
    lines = ["valuenet v1",
             "dims " + " ".join(map(str, net.dims)),
             f"seed {net.seed if net.seed is not None else 'none'}",
             f"iteration {net.iteration}"]
    for k in PARAM_NAMES:
        lines.append(k + " " + " ".join(repr(float(v)) for v in net.params[k].ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def load_net(path) -> ValueNet:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "valuenet v1":
        raise ValueError(f"{path}: not a value-net checkpoint")
    fields = {}
    for line in lines[1:]:
        if line.strip():
            key, *rest = line.split()
            fields[key] = rest
    d_in, h1, h2, d_out = map(int, fields["dims"])
    shapes = {"W1": (d_in, h1), "b1": (h1,), "W2": (h1, h2), "b2": (h2,),
              "W3": (h2, d_out), "b3": (d_out,)}
    params = {k: np.array([float(v) for v in fields[k]]).reshape(shapes[k]) for k in PARAM_NAMES}
    seed = fields["seed"][0]
    return ValueNet(params, seed=None if seed == "none" else int(seed),
                    iteration=int(fields["iteration"][0]))
