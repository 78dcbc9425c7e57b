"""``stl-synth`` command line: solve, bench and count.

Exit codes: 0 solved (or nothing to solve), 2 infeasible, 3 node or time
limit reached, 1 any error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..encoder import PROPOSED, STANDARD, EncoderConfig, encode
from ..formula import build_tree, count_disjunctions, flatten, leaf_count, predicted_binaries
from ..parser import ParseError, parse, regions_from_json
from ..solver.bnb import BnBOptions
from ..solver.lpfile import export_lp, import_solution, write_solution
from ..solver.solve import INFEASIBLE, NODE_LIMIT, OPTIMAL, TIME_LIMIT, branch_and_bound
from ..system import double_integrator
from .plot import plot_trajectory
from .runner import COUNTS, INTERNAL, LPFILE, format_table, run_benchmarks
from .scenarios import SCENARIOS, Scenario

EXIT = {OPTIMAL: 0, INFEASIBLE: 2, NODE_LIMIT: 3, TIME_LIMIT: 3}

_KIND_PREFIX = {"O": "obstacle", "G": "goal", "T": "target", "K": "key", "D": "door"}


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _load_problem(args) -> tuple[Scenario, object]:
    layout = json.loads(Path(args.regions).read_text()) if args.regions else {"regions": []}
    regions = regions_from_json(layout)
    text = Path(args.spec).read_text()
    sys_ = double_integrator()
    x0 = np.asarray(_floats(args.x0) if args.x0 else layout.get("x0", [0.0] * sys_.n), dtype=float)
    rho_max = args.rho_max if args.rho_max is not None else layout.get("rho_max")
    kinds = {n: _KIND_PREFIX.get(n[:1], "region") for n in regions}
    sc = Scenario(Path(args.spec).stem, regions, text, sys_, x0, args.horizon,
                  Q=tuple(layout.get("Q", (0.0,) * sys_.n)), R=tuple(layout.get("R", (0.0,) * sys_.m)),
                  rho_max=rho_max, kinds=kinds)
    return sc, parse(text, regions, dim=sys_.p)


def _opts(args) -> BnBOptions:
    return BnBOptions(node_limit=args.node_limit, time_limit_ms=args.time_limit_ms)


def cmd_solve(args) -> int:
    sc, f = _load_problem(args)
    cfg = EncoderConfig(M=args.M, rho_max=sc.rho_max, flatten=args.flatten, encoding=args.encoding)
    quad = sc.quadratic
    model, stats = encode(f, sc.system, sc.x0, args.horizon, cfg,
                          sc.Q if quad else None, sc.R if quad else None)
    if args.export:
        export_lp(model, args.export)
    if args.solver == "lpfile":
        if not args.solution:
            if not args.export:
                export_lp(model, "model.lp")
            payload = {"status": "exported", "objective": None, "rho": None,
                       "counts": stats.to_json(), "time_ms": 0.0, "trajectory": None}
            _emit(payload, args.out)
            return 0
        res = import_solution(model, args.solution, stats)
    else:
        res = branch_and_bound(model, _opts(args), stats)
    _emit(res.to_json(), args.out)
    if args.save_solution and res.values:
        write_solution(model, [res.values[v.name] for v in model.variables],
                       args.save_solution, res.status)
    if args.plot:
        plot_trajectory(sc, res.trajectory, args.plot)
    return EXIT.get(res.status, 1)


def _emit(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
        summary = {k: payload[k] for k in ("status", "objective", "rho", "counts", "time_ms")}
        print(json.dumps(summary))
    else:
        print(text)


def cmd_bench(args) -> int:
    if args.suite != "paper":
        raise ValueError(f"unknown suite {args.suite!r}")
    if args.quadratic:
        solver = LPFILE
    elif args.solve:
        solver = INTERNAL
    else:
        solver = COUNTS
    names = args.scenarios.split(",") if args.scenarios else list(SCENARIOS)
    encodings = args.encodings.split(",")
    records = run_benchmarks(names, encodings, _ints(args.horizons), solver, args.out, _opts(args))
    print(format_table(records))
    if any(r.status.startswith("error") for r in records):
        return 1
    if any(r.status in (NODE_LIMIT, TIME_LIMIT) for r in records):
        return 3
    return 0


def cmd_count(args) -> int:
    sc, f = _load_problem(args)
    tree = build_tree(f, 0)
    flat = flatten(tree)
    rows = []
    for enc, fl in ((PROPOSED, False), (PROPOSED, True), (STANDARD, False)):
        _, st = encode(f, sc.system, sc.x0, args.horizon, EncoderConfig(flatten=fl, encoding=enc))
        rows.append((enc + (" (flat)" if fl else ""), st))
    print(f"{'encoding':<18}{'binary':>8}{'continuous':>12}{'constraints':>13}")
    for label, st in rows:
        print(f"{label:<18}{st.binary_count:>8}{st.continuous_count:>12}{st.constraint_count:>13}")
    print(f"predicates at timesteps: {leaf_count(tree)}")
    print(f"disjunctions: {len(count_disjunctions(tree))} "
          f"(predicted binaries {predicted_binaries(tree)}); "
          f"after flattening: {len(count_disjunctions(flat))} "
          f"(predicted binaries {predicted_binaries(flat)})")
    return 0


def _add_problem_args(p):
    p.add_argument("--spec", required=True, help="file holding the specification text")
    p.add_argument("--regions", help="JSON region file (may also give x0, rho_max, Q, R)")
    p.add_argument("--horizon", "-T", type=int, required=True)
    p.add_argument("--x0", help="comma-separated initial state, default from the region file or 0")
    p.add_argument("--rho-max", type=float, default=None)


def _add_limits(p):
    p.add_argument("--node-limit", type=int, default=10**6)
    p.add_argument("--time-limit-ms", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stl-synth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="encode a specification and solve or export it")
    _add_problem_args(p)
    p.add_argument("--encoding", choices=(PROPOSED, STANDARD), default=PROPOSED)
    p.add_argument("--solver", choices=("internal", "lpfile"), default="internal")
    p.add_argument("--flatten", action="store_true")
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--out", help="write the result JSON here")
    p.add_argument("--plot", help="write an SVG of the trajectory here")
    p.add_argument("--export", help="write the model as an LP file here")
    p.add_argument("--solution", help="with --solver lpfile: verify this solution file")
    p.add_argument("--save-solution", help="write the solution as 'name value' lines here")
    _add_limits(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the benchmark scenarios")
    p.add_argument("--suite", default="paper")
    p.add_argument("--horizons", default="10,25,50")
    p.add_argument("--scenarios", help="comma-separated subset of " + ",".join(SCENARIOS))
    p.add_argument("--encodings", default=f"{PROPOSED},{STANDARD}")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--counts-only", action="store_true", help="encode only (default)")
    mode.add_argument("--solve", action="store_true", help="solve with the internal solver")
    mode.add_argument("--quadratic", action="store_true",
                      help="export LP files instead of solving (for quadratic costs)")
    p.add_argument("--out", default="bench_out")
    _add_limits(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("count", help="print model sizes for a specification")
    _add_problem_args(p)
    p.set_defaults(func=cmd_count)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
