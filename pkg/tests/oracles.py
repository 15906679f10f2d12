"""Independent reference computations used by the tests.

Everything here works on plain Python lists with explicit loops and never
imports the belief kernels it checks.
"""

import itertools

import numpy as np


def states_showing(states, k, symbol):
    return [i for i, s in enumerate(states) if s[k] == symbol]


def bayes_update(b, states, k, symbol):
    """Condition b[i][age] on sensor k having shown ``symbol``; loops only."""
    z = 0.0
    for i, row in enumerate(b):
        if states[i][k] == symbol:
            z += sum(row)
    out = [[0.0] * len(row) for row in b]
    if z == 0.0:
        return out, 0.0
    for i, row in enumerate(b):
        if states[i][k] == symbol:
            out[i] = [x / z for x in row]
    return out, z


def predict(b_hat, P):
    """One-slot age/state prediction with a MAP estimate; loops only."""
    n, d1 = len(b_hat), len(b_hat[0])
    dmax = d1 - 1
    pi = [sum(sum(b_hat[m]) * P[m][i] for m in range(n)) for i in range(n)]
    best = 0
    for i in range(1, n):
        if pi[i] > pi[best]:
            best = i
    out = [[0.0] * d1 for _ in range(n)]
    for i in range(n):
        if i == best:
            out[i][0] = pi[i]
            continue
        for m in range(n):
            for age in range(d1):
                out[i][min(age + 1, dmax)] += b_hat[m][age] * P[m][i]
    return out, best


def cost(b):
    return sum(age * b[i][age] for i in range(len(b)) for age in range(len(b[0])))


def branches(b, k, states, symbols, P, rho_s):
    """(probability, successor) for every non-zero observation branch of sensor k."""
    out = []
    for s in symbols[k]:
        post, z = bayes_update(b, states, k, s)
        if rho_s * z > 0:
            out.append((rho_s * z, predict(post, P)[0]))
    if rho_s < 1.0:
        out.append((1.0 - rho_s, predict(b, P)[0]))
    return out


def tree_value(b, depth, states, symbols, P, rho_s, terminal=None):
    """Exhaustive closed-loop tree: min over actions at every observation node."""
    best_v, best_a = None, None
    for k in range(len(symbols)):
        v = 0.0
        for p, nxt in branches(b, k, states, symbols, P, rho_s):
            tail = (tree_value(nxt, depth - 1, states, symbols, P, rho_s, terminal)[0]
                    if depth > 1 else (terminal(nxt) if terminal else 0.0))
            v += p * (cost(nxt) + tail)
        if best_v is None or v < best_v:
            best_v, best_a = v, k
    return best_v, best_a


def open_loop_value(b, actions, states, symbols, P, rho_s):
    """Expected path cost of a fixed action sequence (no observation feedback)."""
    frontier = [(1.0, b)]
    total = 0.0
    for k in actions:
        nxt_frontier = []
        for w, bb in frontier:
            for p, nxt in branches(bb, k, states, symbols, P, rho_s):
                total += w * p * cost(nxt)
                nxt_frontier.append((w * p, nxt))
        frontier = nxt_frontier
    return total


def best_open_loop(b, horizon, states, symbols, P, rho_s):
    return min(open_loop_value(b, seq, states, symbols, P, rho_s)
               for seq in itertools.product(range(len(symbols)), repeat=horizon))


def history_belief(i0, dmax, history, states, P, rho_s):
    """Joint (state, age) posterior recomputed from the whole history.

    ``history`` is a list of ``(action, observation)`` pairs, where observation
    is a symbol or None for an erasure and refers to the state in the slot the
    action was taken. The monitor's estimate at every slot is re-derived from a
    state-only forward filter over the prefix of the history, then an
    unnormalised forward pass over (state, age) accumulates the likelihood of
    every observation; normalisation happens once at the end.
    """
    n = len(states)
    d1 = dmax + 1
    P = np.asarray(P, dtype=float)

    def likelihood(k, obs):
        if obs is None:
            return np.full(n, 1.0 - rho_s)
        return np.array([rho_s if states[j][k] == obs else 0.0 for j in range(n)])

    # alpha[j, age] = P(x_t = j, age_t = age, observations delivered so far)
    alpha = np.zeros((n, d1))
    alpha[i0, 0] = 1.0
    for t, (k, obs) in enumerate(history, 1):
        # state-only filter restarted from scratch on the prefix
        f = np.zeros(n)
        f[i0] = 1.0
        for kk, oo in history[:t]:
            f = (f * likelihood(kk, oo)) @ P
        xhat = int(np.argmax(f / f.sum()))
        weighted = alpha * likelihood(k, obs)[:, None]
        nxt = np.zeros((n, d1))
        for j in range(n):
            for m in range(n):
                for age in range(d1):
                    w = weighted[m, age] * P[m, j]
                    if j == xhat:
                        nxt[j, 0] += w
                    else:
                        nxt[j, min(age + 1, dmax)] += w
        alpha = nxt
    return alpha / alpha.sum()


def blind_chain_mean_age(P, i0, dmax, burn=10_000):
    """Stationary mean AoII when no packet is ever delivered.

    The estimate is then a deterministic function of time (the MAP of
    ``e_{i0} P^t``); once it settles to a constant the (state, estimate, age)
    chain is finite and time-homogeneous and its stationary law is solved for.
    """
    P = np.asarray(P, dtype=float)
    n = len(P)
    f = np.zeros(n)
    f[i0] = 1.0
    estimates = []
    for _ in range(burn):
        f = f @ P
        estimates.append(int(np.argmax(f)))
    xhat = estimates[-1]
    assert all(e == xhat for e in estimates[-burn // 2:]), "estimate did not settle"
    d1 = dmax + 1
    size = n * d1
    T = np.zeros((size, size))
    for x in range(n):
        for age in range(d1):
            for y in range(n):
                nage = 0 if y == xhat else min(age + 1, dmax)
                T[x * d1 + age, y * d1 + nage] += P[x, y]
    A = np.vstack([T.T - np.eye(size), np.ones(size)])
    rhs = np.zeros(size + 1)
    rhs[-1] = 1.0
    stat = np.linalg.lstsq(A, rhs, rcond=None)[0]
    ages = np.tile(np.arange(d1), n)
    return float(stat @ ages)
