"""Sweep scenarios x encodings x horizons and tabulate the outcome."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..encoder import PROPOSED, STANDARD, EncoderConfig, encode
from ..solver.bnb import BnBOptions
from ..solver.lpfile import export_lp
from ..solver.solve import branch_and_bound
from .scenarios import SCENARIOS, Scenario

INTERNAL = "internal"
LPFILE = "lpfile-only"
COUNTS = "counts-only"
SOLVER_CHOICES = (INTERNAL, LPFILE, COUNTS)


@dataclass(frozen=True)
class BenchRecord:
    scenario: str
    horizon: int
    encoding: str
    binary: int
    continuous: int
    constraints: int
    status: str
    objective: float | None = None
    rho: float | None = None
    solve_time_ms: float | None = None
    node_count: int | None = None
    oracle_rho: float | None = None

    def sort_key(self):
        return (self.scenario, self.horizon, self.encoding)


def _finite(v):
    return v if v is not None and math.isfinite(v) else None


def _resolve(s) -> Callable[[int], Scenario]:
    if callable(s):
        return s
    try:
        return SCENARIOS[s]
    except KeyError:
        raise ValueError(f"unknown scenario {s!r}") from None


def run_one(sc: Scenario, encoding: str, solver: str = COUNTS,
            opts: BnBOptions = BnBOptions(), export_dir: Path | None = None,
            flatten: bool = True) -> tuple[BenchRecord, object]:
    """Encode one scenario and optionally solve it; returns the record and the result."""
    cfg = EncoderConfig(flatten=flatten, encoding=encoding, rho_max=sc.rho_max)
    Q = sc.Q if sc.quadratic else None
    R = sc.R if sc.quadratic else None
    model, stats = encode(sc.formula(), sc.system, sc.x0, sc.horizon, cfg, Q, R)
    base = dict(scenario=sc.name, horizon=sc.horizon, encoding=encoding,
                binary=stats.binary_count, continuous=stats.continuous_count,
                constraints=stats.constraint_count)
    if solver == COUNTS:
        return BenchRecord(status="encoded", **base), None
    if solver == LPFILE:
        if export_dir is not None:
            export_dir.mkdir(parents=True, exist_ok=True)
            export_lp(model, export_dir / f"{sc.name}_T{sc.horizon}_{encoding}.lp")
        return BenchRecord(status="exported", **base), None
    if sc.quadratic:
        return BenchRecord(status="error: quadratic cost needs an external solver", **base), None
    start = time.monotonic()
    res = branch_and_bound(model, opts, stats)
    elapsed = (time.monotonic() - start) * 1e3
    oracle = res.verification.oracle_rho if res.verification else None
    rec = BenchRecord(status=res.status, objective=_finite(res.objective), rho=_finite(res.rho),
                      solve_time_ms=elapsed, node_count=res.nodes, oracle_rho=oracle, **base)
    return rec, res


def run_benchmarks(scenarios: Iterable = tuple(SCENARIOS), encodings: Sequence[str] = (PROPOSED, STANDARD),
                   horizons: Sequence[int] = (10, 25, 50), solver_choice: str = COUNTS,
                   out_dir=None, opts: BnBOptions = BnBOptions()) -> list[BenchRecord]:
    """Run every (scenario, horizon, encoding) cell; one failing cell never stops the sweep.

    ``scenarios`` holds names or factories ``T -> Scenario``.  With
    ``out_dir`` set, ``results.csv`` and ``results.json`` are written there
    (and LP files too for ``lpfile-only``).
    """
    if solver_choice not in SOLVER_CHOICES:
        raise ValueError(f"solver_choice must be one of {SOLVER_CHOICES}")
    out = Path(out_dir) if out_dir is not None else None
    records = []
    for s in scenarios:
        factory = _resolve(s)
        for T in horizons:
            for enc in encodings:
                try:
                    sc = factory(T)
                    rec, _ = run_one(sc, enc, solver_choice, opts,
                                     out / "models" if out is not None else None)
                except Exception as exc:  # recorded, the sweep goes on
                    name = getattr(s, "__name__", str(s)).removeprefix("scenario_")
                    rec = BenchRecord(name, T, enc, 0, 0, 0, f"error: {exc}")
                records.append(rec)
    records.sort(key=BenchRecord.sort_key)
    if out is not None:
        write_records(records, out)
    return records


def write_records(records: Sequence[BenchRecord], out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "results.csv", out / "results.json"
    names = [f.name for f in fields(BenchRecord)]
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
    json_path.write_text(json.dumps([asdict(r) for r in records], indent=2) + "\n")
    return csv_path, json_path


def format_table(records: Sequence[BenchRecord]) -> str:
    head = f"{'scenario':<16}{'T':>4}  {'encoding':<9}{'binary':>7}{'cont':>7}{'rows':>7}  status"
    lines = [head, "-" * len(head)]
    for r in records:
        extra = ""
        if r.rho is not None:
            extra = f"  rho={r.rho:.4g}  nodes={r.node_count}  {r.solve_time_ms:.0f} ms"
        lines.append(f"{r.scenario:<16}{r.horizon:>4}  {r.encoding:<9}{r.binary:>7}"
                     f"{r.continuous:>7}{r.constraints:>7}  {r.status}{extra}")
    return "\n".join(lines)
