import itertools

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings, strategies as st

from cuspcert.lp import linprog, lp_feasible


def test_lp_feasible_examples():
    assert lp_feasible([([1.0], 1.0), ([-1.0], 0.0)]) is None
    x = lp_feasible([([1.0], 1.0)])
    assert x is not None and x[0] >= 1 - 1e-9
    x = lp_feasible([([1, 1], 1), ([1, -1], 1), ([-1, 0], -2)])
    assert x is not None
    A = np.array([[1, 1], [1, -1], [-1, 0]], dtype=float)
    assert np.all(A @ x >= np.array([1, 1, -2]) - 1e-9)


def test_lp_feasible_malformed():
    with pytest.raises(ValueError):
        lp_feasible([([1.0, np.nan], 0.0)])
    with pytest.raises(ValueError):
        lp_feasible([])


def _vertex_oracle(A, b):
    """Feasibility of A x >= b by enumerating all basic solutions.

    A nonempty polyhedron {A x >= b} either contains a vertex or contains a
    line; in both cases adding box constraints |x_i| <= R keeps a basic
    feasible point when R is large.
    """
    d = A.shape[1]
    R = 1e4
    A2 = np.vstack([A, np.eye(d), -np.eye(d)])
    b2 = np.concatenate([b, -R * np.ones(d), -R * np.ones(d)])
    for rows in itertools.combinations(range(A2.shape[0]), d):
        M = A2[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, b2[list(rows)])
        if np.all(A2 @ x >= b2 - 1e-7):
            return True
    return False


@settings(max_examples=120, deadline=None)
@given(st.integers(2, 3), st.integers(1, 7), st.integers(0, 10 ** 6))
def test_lp_feasible_agrees_with_vertex_enumeration(d, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-4, 5, size=(m, d)).astype(float)
    b = rng.integers(-4, 5, size=m).astype(float)
    x = lp_feasible(A, b)
    truth = _vertex_oracle(A, b)
    assert (x is not None) == truth
    if x is not None:
        assert np.all(A @ x >= b - 1e-7)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.integers(2, 8), st.integers(0, 10 ** 6))
def test_linprog_matches_scipy(d, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, d))
    b = rng.uniform(0.5, 2.0, size=m)  # origin feasible
    c = rng.normal(size=d)
    bounds = [(-3.0, 3.0)] * d
    ours = linprog(c, A_ub=A, b_ub=b, bounds=bounds)
    ref = scipy.optimize.linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    assert ours.status == "optimal" and ref.status == 0
    assert ours.fun == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(A @ ours.x <= b + 1e-7)


def test_linprog_unbounded_and_equalities():
    res = linprog([-1.0], A_ub=[[-1.0]], b_ub=[0.0], bounds=[(0, None)])
    assert res.status == "unbounded"
    res = linprog([1.0, 1.0], A_eq=[[1.0, -1.0]], b_eq=[1.0], bounds=[(0, None), (0, None)])
    assert res.status == "optimal"
    assert res.x == pytest.approx([1.0, 0.0])


def test_degenerate_lp_terminates():
    # many redundant constraints through one vertex
    A = np.array([[np.cos(t), np.sin(t)] for t in np.linspace(0, np.pi / 2, 40)])
    res = linprog([-1.0, -1.0], A_ub=A, b_ub=np.ones(40), bounds=[(0, None), (0, None)])
    assert res.status == "optimal"
    ref = scipy.optimize.linprog([-1.0, -1.0], A_ub=A, b_ub=np.ones(40), bounds=[(0, None)] * 2, method="highs")
    assert res.fun == pytest.approx(ref.fun, abs=1e-9)
    assert res.fun <= -np.sqrt(2)
