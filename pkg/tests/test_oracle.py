import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fjsignal import examples, lp, optimizer, oracle
from fjsignal.errors import TooLarge, WrongStateCount
from fjsignal.model import make_instance
from fjsignal.objectives import Objective, expected_value
from helpers import random_instance


def test_grid_points():
    g = oracle.simplex_grid(3, 4)
    assert len(g) == math.comb(6, 2)
    assert np.allclose(g.sum(axis=1), 1) and np.all(g >= 0)
    assert len(np.unique(g, axis=0)) == len(g)


def test_default_resolutions():
    assert [oracle.default_resolution(m) for m in (2, 3, 4)] == [240, 20, 10]
    r = oracle.default_resolution(7)
    assert math.comb(r + 6, 6) <= oracle.GRID_BUDGET < math.comb(r + 7, 6)


def test_grid_spec_checks():
    with pytest.raises(ValueError):
        oracle.GridSpec(0)
    with pytest.raises(ValueError):
        oracle.GridSpec(4, [[0.5, 0.6]])


def test_two_friends_on_twelfths():
    value, scheme = oracle.grid_oracle(examples.two_friends(), oracle.GridSpec(12))
    assert value == pytest.approx(1.5)
    assert scheme.bayes_residual() <= 1e-9


def test_four_stubborn_on_tenths():
    assert oracle.grid_oracle(examples.four_stubborn(), oracle.GridSpec(10))[0] == pytest.approx(3.5)
    sep = examples.four_stubborn(examples.FOUR_STUBBORN_SEPARATED)
    assert oracle.grid_oracle(sep, oracle.GridSpec(10))[0] == pytest.approx(10 / 3)


def test_convex_min_grid_value_brackets_no_signal():
    inst = examples.two_friends("norm")
    ns = optimizer.optimize_convex(inst).value
    for r in (3, 7):
        assert oracle.grid_oracle(inst, oracle.GridSpec(r))[0] >= ns - 1e-12
    assert oracle.grid_oracle(inst, oracle.GridSpec(2))[0] == pytest.approx(ns)


def test_deterministic_prior_equals_full_revelation():
    inst = examples.two_friends().replace(prior=np.array([0.0, 1.0]))
    full = expected_value(inst, optimizer.full_revelation_scheme(inst))
    assert oracle.grid_oracle(inst)[0] == pytest.approx(full)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_refinement_never_hurts(seed, r):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 3, 3)
    coarse = oracle.grid_oracle(inst, oracle.GridSpec(r))[0]
    fine, scheme = oracle.grid_oracle(inst, oracle.GridSpec(2 * r))
    assert fine >= coarse - 1e-9
    assert scheme.bayes_residual() <= 1e-9
    assert expected_value(inst, scheme) == pytest.approx(fine, abs=1e-8)


def test_exhaustive_two_signal():
    sep = examples.four_stubborn(examples.FOUR_STUBBORN_SEPARATED)
    assert oracle.exhaustive_two_signal(sep, 0.01) == pytest.approx(10 / 3)
    flat = make_instance([[0.5, 0.5]], [0.4, 0.6], [[(0.2, 0.6)]], Objective.range_count())
    assert oracle.exhaustive_two_signal(flat) == pytest.approx(1)
    with pytest.raises(WrongStateCount):
        oracle.exhaustive_two_signal(make_instance([[0.5, 0.5, 0.5]], [0.2, 0.3, 0.5], [[]], Objective.range_count()))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exhaustive_two_signal_matches_breakpoint_search(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 4)), 2)
    if inst.k == 0:
        return
    assert oracle.exhaustive_two_signal(inst) == pytest.approx(optimizer.optimize_two_state(inst).value, abs=1e-6)


def test_vertices_of_square_and_simplex():
    sq = lp.LPProblem(2, [0, 0], [([1, 0], "<=", 1), ([0, 1], "<=", 1)])
    assert len(oracle.enumerate_lp_vertices(sq)) == 4
    tri = lp.LPProblem(3, [0, 0, 0], [([1, 1, 1], "=", 1)])
    np.testing.assert_allclose(sorted(map(tuple, oracle.enumerate_lp_vertices(tri))), [(0, 0, 1), (0, 1, 0), (1, 0, 0)])
    with pytest.raises(TooLarge):
        oracle.enumerate_lp_vertices(lp.LPProblem(9, np.zeros(9)))


@pytest.mark.parametrize(
    "adj, size",
    [
        (np.ones((3, 3)) - np.eye(3), 1),
        (np.zeros((5, 5)), 5),
    ],
)
def test_max_independent_set_sizes(adj, size):
    assert oracle.max_independent_set(adj)[0] == size


def test_max_independent_set_path():
    adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
    assert oracle.max_independent_set(adj) == (2, frozenset({0, 2}))
    with pytest.raises(TooLarge):
        oracle.max_independent_set(np.zeros((21, 21)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_max_independent_set_matches_subset_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    adj = np.triu(rng.random((n, n)) < 0.4, 1)
    adj = adj | adj.T
    size, witness = oracle.max_independent_set(adj)
    assert not any(adj[u, v] for u in witness for v in witness)
    brute = max(
        bin(mask).count("1")
        for mask in range(1 << n)
        if not any(adj[u, v] and mask >> u & 1 and mask >> v & 1 for u in range(n) for v in range(n))
    )
    assert size == brute == len(witness)


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 3), (1, 7), (2, 7), (2, 9), (4, 6)],
        [(0, 1), (0, 4), (0, 5), (0, 7), (1, 2), (1, 4), (1, 6), (1, 7), (1, 8), (1, 9), (2, 3), (2, 4),
         (2, 6), (2, 7), (2, 8), (2, 9), (3, 5), (4, 5), (4, 6), (4, 7), (4, 9), (5, 7), (6, 7), (7, 9), (8, 9)],
    ],
)
def test_degenerate_grid_lps_terminate(edges):
    # these ten-state grids used to make the simplex cycle
    from fjsignal import hardness

    g = hardness.Graph(10, frozenset(edges))
    hi = hardness.generate(g)
    value, scheme = oracle.grid_oracle(hi.instance)
    size, witness = oracle.max_independent_set(g.adjacency)
    assert value >= expected_value(hi.instance, hardness.witness_scheme(hi, witness)) - 1e-9
    assert expected_value(hi.instance, scheme) == pytest.approx(value, abs=1e-8)
