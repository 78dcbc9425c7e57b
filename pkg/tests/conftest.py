"""Shared fixtures and random generators for the test suite."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from stlsynth.formula import Always, And, Eventually, Or, Pred, Predicate, Until
from stlsynth.parser import RegionDef

settings.register_profile("stlsynth", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("stlsynth")


def random_predicate(rng: np.random.Generator, dim: int = 2) -> Predicate:
    a = rng.integers(-3, 4, size=dim).astype(float)
    if not a.any():
        a[rng.integers(dim)] = 1.0
    return Predicate(tuple(a), float(rng.integers(-5, 6)))


def random_formula(rng: np.random.Generator, depth: int, max_window: int = 3, dim: int = 2,
                   preds=None, min_children: int = 1):
    """Random PNF formula; ``depth`` bounds the operator nesting."""
    if depth == 0 or rng.random() < 0.2:
        if preds is not None:
            return Pred(preds[rng.integers(len(preds))])
        return Pred(random_predicate(rng, dim))
    kind = rng.integers(5)
    sub = lambda: random_formula(rng, depth - 1, max_window, dim, preds, min_children)  # noqa: E731
    if kind < 2:
        n = int(rng.integers(min_children, 4))
        cls = And if kind == 0 else Or
        return cls(tuple(sub() for _ in range(n)))
    t1 = int(rng.integers(0, max_window + 1))
    t2 = t1 + int(rng.integers(0, max_window + 1))
    if kind == 2:
        return Always(t1, t2, sub())
    if kind == 3:
        return Eventually(t1, t2, sub())
    return Until(t1, t2, sub(), sub())


@st.composite
def formulas(draw, max_depth: int = 3, max_window: int = 3, min_children: int = 1):
    seed = draw(st.integers(0, 2**32 - 1))
    depth = draw(st.integers(0, max_depth))
    return random_formula(np.random.default_rng(seed), depth, max_window, min_children=min_children)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def box_a():
    return RegionDef.box("A", 1.5, 3.0, 0.0, 2.5)


def pytest_terminal_summary(terminalreporter):
    from .acceptance_lib import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
