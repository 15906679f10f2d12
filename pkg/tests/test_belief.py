from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aoiitrack.belief import (Belief, ImpossibleObservation, dump_belief, expected_cost,
                              initial_belief, map_estimate, observation_posterior, propagate,
                              successors)
from aoiitrack.source import ERASED, ChannelModel, ComponentSpec, Observation, build_joint_space

import oracles
from conftest import as_lists, random_belief, random_model

GOLDEN = Path(__file__).parent / "golden"


def ring_b1(model, d_max=15):
    b, xhat = propagate(initial_belief(model, 0, d_max), model)
    return b, xhat


def test_initial_belief(ring_model):
    b = initial_belief(ring_model, 0)
    assert b.mass.shape == (4, 16)
    assert b.mass[0, 0] == 1.0 and b.total() == 1.0
    np.testing.assert_array_equal(b.marginal(), [1, 0, 0, 0])
    assert expected_cost(b) == 0.0


def test_posterior_erased_is_identity(ring_model):
    b = Belief(random_belief(np.random.default_rng(0), 4, 16))
    assert observation_posterior(b, ERASED, ring_model) is b


def test_posterior_hand_example(ring_model):
    m = np.zeros((4, 16))
    m[0, 0], m[1, 1], m[2, 2] = 0.5, 0.3, 0.2
    post = observation_posterior(Belief(m), Observation(0, "a"), ring_model).mass
    expected = np.zeros((4, 16))
    expected[0, 0], expected[2, 2] = 5 / 7, 2 / 7
    np.testing.assert_allclose(post, expected, atol=1e-15)


def test_posterior_full_observability():
    model = build_joint_space([ComponentSpec("s", ("x", "y", "z"))], np.full((3, 3), 1 / 3))
    rng = np.random.default_rng(1)
    b = random_belief(rng, 3, 6)
    post = observation_posterior(Belief(b), Observation(0, "y"), model).mass
    np.testing.assert_allclose(post[1], b[1] / b[1].sum(), atol=1e-15)
    assert post[[0, 2]].sum() == 0.0


def test_posterior_impossible_observation(ring_model):
    b = initial_belief(ring_model, 0)
    with pytest.raises(ImpossibleObservation):
        observation_posterior(b, Observation(0, "b"), ring_model)


def test_propagate_identity():
    model = build_joint_space([ComponentSpec("s", ("x", "y", "z"))], np.eye(3))
    b, xhat = propagate(initial_belief(model, 0), model)
    assert xhat == 0
    np.testing.assert_array_equal(b.mass, initial_belief(model, 0).mass)


def test_propagate_ring(ring_model):
    b, xhat = ring_b1(ring_model)
    assert xhat == 0
    expected = np.zeros((4, 16))
    expected[0, 0], expected[1, 1], expected[2, 1], expected[3, 1] = 0.6, 0.1, 0.1, 0.2
    np.testing.assert_allclose(b.mass, expected, atol=1e-15)
    assert expected_cost(b) == pytest.approx(0.4, abs=1e-15)


def test_propagate_age_saturation():
    model = build_joint_space([ComponentSpec("s", ("x", "y"))], [[0.0, 1.0], [0.0, 1.0]])
    # all mass on state 0 at the cap; it moves to state 1, which is the MAP
    m = np.zeros((2, 4))
    m[0, 3] = 0.7
    m[1, 3] = 0.3
    b, xhat = propagate(Belief(m), model)
    assert xhat == 1 and b.mass[1, 0] == pytest.approx(1.0)
    P = [[0.5, 0.5], [0.4, 0.6]]
    model = build_joint_space([ComponentSpec("s", ("x", "y"))], P)
    m = np.zeros((2, 4))
    m[0, 2], m[0, 3] = 0.5, 0.5
    b, xhat = propagate(Belief(m), model)
    # the two upper-age cells both land on the cap for the non-MAP state
    assert xhat == 0
    assert b.mass[1, 3] == pytest.approx(0.5)
    assert b.total() == pytest.approx(1.0, abs=1e-15)


def test_propagate_matches_loop_oracle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        model = random_model(rng)
        b = random_belief(rng, model.n_states, 6)
        got, xhat = propagate(Belief(b), model)
        want, best = oracles.predict(b.tolist(), model.transition.tolist())
        assert xhat == best
        np.testing.assert_allclose(got.mass, want, atol=1e-14)


def test_map_estimate():
    assert map_estimate([0.6, 0.1, 0.1, 0.2]) == 0
    assert map_estimate([0.5, 0.5]) == 0
    assert map_estimate(np.eye(5)[3]) == 3


def test_expected_cost_examples():
    m = np.zeros((4, 16))
    m[2, 15] = 1.0
    assert expected_cost(Belief(m)) == 15.0


def test_successors_ring(ring_model):
    b1, _ = ring_b1(ring_model)
    succ = successors(b1, 0, ring_model, ChannelModel(1.0))
    assert [s.observation for s in succ] == [Observation(0, "a"), Observation(0, "b")]
    assert [s.probability for s in succ] == pytest.approx([0.7, 0.3], abs=1e-15)
    # cost of the o=a branch evaluated by hand
    assert expected_cost(succ[0].belief) == pytest.approx(0.6, abs=1e-14)


def test_successors_pure_erasure(ring_model):
    b1, _ = ring_b1(ring_model)
    succ = successors(b1, 1, ring_model, ChannelModel(0.0))
    assert len(succ) == 1 and succ[0].observation.erased and succ[0].probability == 1.0


def test_successors_match_oracle_branches():
    rng = np.random.default_rng(4)
    for _ in range(30):
        model = random_model(rng)
        rho = float(rng.uniform(0.05, 1.0))
        b = random_belief(rng, model.n_states, 5)
        states, symbols, P = as_lists(model)
        for a in range(model.n_sensors):
            got = successors(Belief(b), a, model, ChannelModel(rho))
            want = oracles.branches(b.tolist(), a, states, symbols, P, rho)
            assert len(got) == len(want)
            for s, (p, nb) in zip(got, want):
                assert s.probability == pytest.approx(p, abs=1e-14)
                np.testing.assert_allclose(s.belief.mass, nb, atol=1e-14)


def test_dump_golden(ring_model):
    b1, _ = ring_b1(ring_model, d_max=3)
    text = dump_belief(b1, ring_model)
    assert text == (GOLDEN / "ring_b1.txt").read_text()


# ---------------------------------------------------------------------------
# properties over random models and observation sequences
# ---------------------------------------------------------------------------

@st.composite
def model_and_steps(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    model = random_model(rng, sparse=draw(st.booleans()))
    rho = draw(st.floats(0.0, 1.0))
    d_max = draw(st.integers(1, 15))
    return model, rho, d_max, rng


@settings(max_examples=60, deadline=None)
@given(model_and_steps())
def test_belief_invariants(args):
    model, rho, d_max, rng = args
    ch = ChannelModel(rho)
    b = initial_belief(model, int(rng.integers(model.n_states)), d_max)
    P = model.transition
    for _ in range(25):
        a = int(rng.integers(model.n_sensors))
        succ = successors(b, a, model, ch)
        assert abs(succ.total_probability - 1.0) <= 1e-9
        pick = succ[int(rng.choice(len(succ), p=[s.probability for s in succ]
                                   / np.sum([s.probability for s in succ])))]
        b_hat = b if pick.observation.erased else observation_posterior(b, pick.observation, model)
        b, xhat = propagate(b_hat, model)
        assert abs(b.total() - 1.0) <= 1e-9
        np.testing.assert_allclose(b.marginal(), b_hat.marginal() @ P, atol=1e-12)
        nonzero_fresh = np.flatnonzero(b.mass[:, 0])
        assert set(nonzero_fresh) <= {xhat}
        assert b.mass.min() >= 0.0
