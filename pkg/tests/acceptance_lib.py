"""Instance generators and bookkeeping shared by the acceptance suite."""
from __future__ import annotations

import math

import numpy as np

from stlsynth.formula import And, Always, Eventually, Formula, Or, Pred, Until
from stlsynth.parser import RegionDef, parse

# criterion number -> (passed, detail); printed at the end of the pytest run
RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def independent_binary_count(f: Formula) -> int:
    """Sum of ceil(log2(N+1)) over disjunctions, computed on the formula itself.

    Counts do not depend on the evaluation time, so each temporal operator
    simply multiplies the count of its operand by its window length.
    """
    bits = lambda n: math.ceil(math.log2(n + 1))  # noqa: E731
    if isinstance(f, Pred):
        return 0
    if isinstance(f, And):
        return sum(independent_binary_count(c) for c in f.children)
    if isinstance(f, Or):
        return bits(len(f.children)) + sum(independent_binary_count(c) for c in f.children)
    k = f.t2 - f.t1 + 1
    if isinstance(f, Always):
        return k * independent_binary_count(f.child)
    if isinstance(f, Eventually):
        return bits(k) + k * independent_binary_count(f.child)
    if isinstance(f, Until):
        right, left = independent_binary_count(f.right), independent_binary_count(f.left)
        # the witness at offset s needs the left operand at s earlier samples
        return bits(k) + sum(right + s * left for s in range(f.t1, f.t2 + 1))
    raise TypeError(f)


# R1 and R2 are targets and R3 is an obstacle, so no template asks to be both
# inside and outside the same region (which pins the optimum at exactly 0)
TEMPLATES = [
    "F[0,{T}] in(R1)",
    "G[0,{T}] out(R3)",
    "F[0,{T}] in(R1) & G[0,{T}] out(R3)",
    "F[0,{T}] (in(R1) | in(R2))",
    "(out(R3) U[0,{T}] in(R2))",
    "G[0,{a}] F[0,{b}] in(R1)",
    "F[0,{a}] G[0,{b}] in(R2)",
    "(F[0,{T}] in(R1) | F[0,{T}] in(R2)) & G[0,{T}] out(R3)",
    "F[{a},{T}] in(R1) & F[0,{b}] in(R2)",
]


def random_instance(rng: np.random.Generator, max_T: int = 10):
    """Random (formula, x0, T) on the double integrator, built from ``TEMPLATES``.

    Region centres are drawn within roughly the distance the robot can cover
    in ``T`` steps, so that most instances are feasible and have to be
    settled by the encodings rather than by reachability alone.
    """
    T = int(rng.integers(2, max_T + 1))
    x0 = np.array([*rng.uniform(1.0, 9.0, size=2).round(2), 0.0, 0.0])
    reach = max(1.0, 0.6 * (T - 1))
    regions = {}
    for name in ("R1", "R2", "R3"):
        w, h = rng.uniform(1.5, 4.0, size=2)
        cx, cy = np.clip(x0[:2] + rng.uniform(-reach, reach, size=2), [w / 2, h / 2],
                         [10 - w / 2, 10 - h / 2])
        regions[name] = RegionDef.box(name, round(cx - w / 2, 2), round(cx + w / 2, 2),
                                      round(cy - h / 2, 2), round(cy + h / 2, 2))
    a = int(rng.integers(0, T // 2 + 1))
    b = T - a
    while True:
        picks = rng.choice(len(TEMPLATES), size=int(rng.integers(1, 3)), replace=False)
        text = " & ".join(TEMPLATES[i].format(T=T, a=a, b=b) for i in picks)
        # two boxes at most, i.e. no more than 8 halfspace predicates
        if sum(name in text for name in regions) <= 2:
            break
    return text, parse(text, regions), x0, T
