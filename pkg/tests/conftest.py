import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aoiitrack.source import ComponentSpec, build_joint_space  # noqa: E402

RING_ROW = [0.6, 0.1, 0.1, 0.2]


def two_binary_components():
    return [ComponentSpec("s1", ("a", "b")), ComponentSpec("s2", ("alpha", "beta"))]


def ring_transition():
    return np.array([np.roll(RING_ROW, i) for i in range(4)])


@pytest.fixture
def ring_model():
    return build_joint_space(two_binary_components(), ring_transition())


def random_model(rng, max_states=8, max_sensors=3, sparse=False):
    """Random joint source with at most ``max_states`` reachable states."""
    K = int(rng.integers(1, max_sensors + 1))
    comps = [ComponentSpec(f"c{k}", tuple(f"v{k}{j}" for j in range(int(rng.integers(1, 4)))))
             for k in range(K)]
    full = list(np.ndindex(*[c.size for c in comps]))
    n = int(rng.integers(1, min(max_states, len(full)) + 1))
    pick = rng.choice(len(full), size=n, replace=False)
    states = [tuple(comps[k].values[full[p][k]] for k in range(K)) for p in pick]
    P = rng.dirichlet(np.ones(n) * 0.7, size=n)
    if sparse and n > 1:
        P[rng.random((n, n)) < 0.3] = 0.0
        P[np.arange(n), rng.integers(n, size=n)] += 1e-3
        P /= P.sum(axis=1, keepdims=True)
    return build_joint_space(comps, P, reachable=states)


def random_belief(rng, n, d1):
    m = rng.dirichlet(np.ones(n * d1) * 0.5).reshape(n, d1)
    return m


def as_lists(model):
    symbols = [c.values for c in model.components]
    return list(model.states), symbols, model.transition.tolist()


# ---------------------------------------------------------------------------
# acceptance reporting: one line per criterion at the end of the run
# ---------------------------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, text = mark.args
    key = (num, text)
    if rep.when == "call" or rep.failed or rep.skipped:
        status = "FAIL" if rep.failed else ("SKIP" if rep.skipped else "PASS")
        if _criteria.get(key) != "FAIL":
            _criteria[key] = status


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (num, text), status in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {text}")
