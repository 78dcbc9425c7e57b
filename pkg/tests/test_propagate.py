import itertools

import numpy as np
import pytest

from stlsynth.solver.bnb import BnBOptions, solve_milp
from stlsynth.solver.propagate import Propagator

from .oracles import enumerate_milp, random_milp


def _integer_points(d):
    """Feasible points with binaries enumerated and continuous parts on a small grid."""
    n = d.c.shape[0]
    grids = []
    for j in range(n):
        grids.append(np.linspace(d.lo[j], d.hi[j], 3 if j not in set(d.binaries) else 2))
    for x in itertools.product(*grids):
        x = np.array(x)
        r = d.A @ x - d.b
        if np.all(np.where(d.is_eq, np.abs(r), r) <= 1e-9):
            yield x


@pytest.mark.parametrize("seed", range(30))
def test_propagation_keeps_every_feasible_point(seed):
    rng = np.random.default_rng(seed)
    d = random_milp(rng, max_binaries=4)
    while d.c.shape[0] > 7:  # keep the grid small
        d = random_milp(rng, max_binaries=4)
    lo, hi = d.lo.copy(), d.hi.copy()
    ok = Propagator(d.A, d.b, d.is_eq, d.binaries).run(lo, hi)
    for x in _integer_points(d):
        assert ok, "a feasible point exists but propagation reported infeasible"
        assert np.all(x >= lo - 1e-9) and np.all(x <= hi + 1e-9)


def test_chain_of_implications_fixes_binaries():
    # x0 >= 1 (as -x0 <= -1), x1 >= x0, x2 >= x1
    A = np.array([[-1.0, 0, 0], [1, -1, 0], [0, 1, -1]])
    lo, hi = np.zeros(3), np.ones(3)
    assert Propagator(A, np.array([-1.0, 0, 0]), np.zeros(3, bool), [0, 1, 2]).run(lo, hi)
    assert lo.tolist() == [1.0, 1.0, 1.0]


def test_contradiction_is_detected():
    A = np.array([[1.0, 1.0]])
    lo, hi = np.array([1.0, 1.0]), np.array([1.0, 1.0])
    assert not Propagator(A, np.array([1.0]), np.array([False]), [0, 1]).run(lo, hi)


def test_cutoff_row_takes_part():
    # minimise -x with x <= 3; a cutoff c x <= -4 leaves nothing
    A = np.array([[1.0]])
    lo, hi = np.array([0.0]), np.array([10.0])
    p = Propagator(A, np.array([3.0]), np.array([False]), [])
    assert p.run(lo.copy(), hi.copy())
    assert not p.run(lo, hi, cutoff=(np.array([-1.0]), -4.0))


@pytest.mark.parametrize("seed", range(15))
def test_search_without_propagation_agrees(seed):
    d = random_milp(np.random.default_rng(500 + seed), max_binaries=8)
    best = enumerate_milp(d)
    for flag in (True, False):
        out = solve_milp(d, BnBOptions(propagate=flag))
        got = out.objective if out.x is not None else np.inf
        assert got == pytest.approx(best, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_numerical_failure_falls_back_to_integer_bounds(seed, monkeypatch):
    import stlsynth.solver.bnb as bnb
    from stlsynth.solver.lp import NumericalError

    calls = {"n": 0}

    class Flaky(bnb.Tableau):
        def dual(self, *args, **kwargs):
            # the first child LP fails, as a stalled simplex would
            calls["n"] += 1
            if calls["n"] == 1:
                raise NumericalError("stalled")
            return super().dual(*args, **kwargs)

    rng = np.random.default_rng(700 + seed)
    d = random_milp(rng, max_binaries=8)
    while solve_milp(d).nodes < 3:
        d = random_milp(rng, max_binaries=8)
    monkeypatch.setattr(bnb, "Tableau", Flaky)
    best = enumerate_milp(d)
    out = solve_milp(d)
    got = out.objective if out.x is not None else np.inf
    assert got == pytest.approx(best, abs=1e-6)
    assert calls["n"] >= 2
