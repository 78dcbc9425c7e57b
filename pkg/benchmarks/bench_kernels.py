"""Time the compiled simplex kernel against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each case solves the same model with both kernels and checks that the
objectives agree before reporting the timings.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from stlsynth.bench.scenarios import scenario_narrow_passage, scenario_two_target
from stlsynth.encoder import EncoderConfig, encode
from stlsynth.solver import lp
from stlsynth.solver.bnb import solve_milp


def _model(factory, T):
    sc = factory(T)
    m, _ = encode(sc.formula(), sc.system, sc.x0, T, EncoderConfig(flatten=True, rho_max=sc.rho_max))
    return m.dense()


def cases():
    yield "root LP, two_target T=10", _model(scenario_two_target, 10), "lp"
    yield "root LP, narrow_passage T=10", _model(scenario_narrow_passage, 10), "lp"
    yield "B&B, two_target T=10", _model(scenario_two_target, 10), "milp"


def run(data, kind):
    start = time.perf_counter()
    if kind == "lp":
        res = lp.solve_lp(data)
        obj = res.objective
    else:
        obj = solve_milp(data).objective
    return time.perf_counter() - start, obj


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        lp.use_kernel("compiled")
    except ImportError:
        print("compiled kernel not built; nothing to compare")
        return 1
    print(f"{'case':<32}{'compiled s':>12}{'python s':>12}{'speed-up':>10}")
    for name, data, kind in cases():
        best = {}
        objs = {}
        for kernel in ("compiled", "python"):
            lp.use_kernel(kernel)
            times = []
            for _ in range(args.repeat):
                t, objs[kernel] = run(data, kind)
                times.append(t)
            best[kernel] = min(times)
        if not np.isclose(objs["compiled"], objs["python"], atol=1e-6):
            raise SystemExit(f"{name}: kernels disagree ({objs})")
        print(f"{name:<32}{best['compiled']:>12.3f}{best['python']:>12.3f}"
              f"{best['python'] / best['compiled']:>9.1f}x")
    lp.use_kernel("compiled")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
