"""Solving encoded synthesis models and checking what comes back.

Every optimal answer is verified against the model it claims to solve:
dynamics rows, the trajectory obtained by re-simulating the inputs, and the
exact robustness of the formula on that trajectory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..encoder import EncoderConfig, EncodingStats, encode, stats_of
from ..formula import node_robustness, robustness, tree_robustness
from ..model import MilpModel
from ..system import Trajectory, output_boxes, rollout
from .bnb import BnBOptions, solve_milp
from .bounds import node_bounds
from .heuristic import PlanRounding
from .lp import QuadraticObjectiveError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NODE_LIMIT = "node_limit"
TIME_LIMIT = "time_limit"

DYNAMICS_TOL = 1e-8
ROBUSTNESS_TOL = 1e-6
SAT_TOL = 1e-6


class VerificationError(AssertionError):
    """A returned solution violates an invariant it must satisfy."""

    def __init__(self, verification: "Verification"):
        super().__init__("; ".join(verification.problems))
        self.verification = verification


@dataclass(frozen=True)
class Verification:
    ok: bool
    problems: tuple[str, ...]
    oracle_rho: float
    dynamics_residual: float


@dataclass
class SolveResult:
    status: str
    objective: float
    rho: float
    trajectory: Trajectory | None
    stats: EncodingStats | None
    nodes: int = 0
    time_ms: float = 0.0
    gap: float = math.inf
    values: dict[str, float] = field(default_factory=dict)
    incumbents: list[tuple[int, float]] = field(default_factory=list)
    verification: Verification | None = None

    def to_json(self) -> dict:
        def num(v):
            return v if v is None or math.isfinite(v) else None

        return {
            "status": self.status,
            "objective": num(self.objective),
            "rho": num(self.rho),
            "counts": self.stats.to_json() if self.stats else None,
            "time_ms": self.time_ms,
            "nodes": self.nodes,
            "trajectory": self.trajectory.to_json() if self.trajectory is not None else None,
        }


def _ids(model: MilpModel, key: str) -> np.ndarray:
    dyn = model.meta.get("dynamics")
    if dyn is None:
        raise ValueError("model carries no dynamics block; was it built by the encoder?")
    return dyn[key]


def verify(model: MilpModel, x) -> Verification:
    """Check a full assignment ``x`` (indexed by variable id) against ``model``.

    The trajectory used for the robustness checks is the one obtained by
    re-simulating the solution's inputs from ``x0``.
    """
    x = np.asarray(x, dtype=float)
    problems = []
    residual = 0.0
    for name, v in model.violations(x, DYNAMICS_TOL):
        if name.startswith(("init_", "dyn_", "out_")):
            problems.append(f"dynamics row {name} violated by {v:.3g}")
            residual = max(residual, v)
        else:
            problems.append(f"constraint {name} violated by {v:.3g}")
    for name, v in model.bound_violations(x, 1e-9):
        problems.append(f"bound on {name} violated by {v:.3g}")

    traj = trajectory_of(model, x)
    f = model.meta.get("formula")
    tree = model.meta["tree"]
    oracle = robustness(f, traj.y) if f is not None else tree_robustness(tree, traj.y)
    rho = float(x[model.var("rho")])
    if oracle < -ROBUSTNESS_TOL:
        problems.append(f"oracle robustness {oracle:.6g} is negative")
    if rho > oracle + ROBUSTNESS_TOL:
        problems.append(f"solver rho {rho:.6g} exceeds oracle robustness {oracle:.6g}")
    # a satisfaction variable at 1 must certify its subformula
    node_rho = node_robustness(tree, traj.y)
    for node_id, var in sorted(model.meta.get("z", {}).items()):
        if x[var] >= 1.0 - SAT_TOL and node_rho[node_id] < -ROBUSTNESS_TOL:
            problems.append(f"node {node_id} has z = 1 but robustness {node_rho[node_id]:.6g}")
    return Verification(not problems, tuple(problems), float(oracle), float(residual))


def trajectory_of(model: MilpModel, x) -> Trajectory:
    u = np.asarray(x)[_ids(model, "u")]
    return rollout(model.meta["system"], model.meta["x0"], u)


def _result(model, status, x, stats, **kw) -> SolveResult:
    if x is None:
        return SolveResult(status, math.nan, math.nan, None, stats, **kw)
    values = {v.name: float(val) for v, val in zip(model.variables, x)}
    return SolveResult(status, model.objective_value(x), float(x[model.var("rho")]),
                       trajectory_of(model, x), stats, values=values, **kw)


def branch_and_bound(model: MilpModel, opts: BnBOptions = BnBOptions(),
                     stats: EncodingStats | None = None, heuristic: bool = True,
                     tighten: bool = True) -> SolveResult:
    """Solve an encoded model with the internal branch-and-bound.

    Two optional aids, both on by default:

    * ``tighten`` lowers ``rho``'s upper bound to the reachability bound of
      :mod:`stlsynth.solver.bounds`, which proves some models infeasible
      before any branching and lets others stop as soon as the bound is hit;
    * ``heuristic`` seeds the search with a plan-rounding incumbent
      (:class:`PlanRounding`).

    Raises :class:`VerificationError` if an optimal answer fails verification;
    that would indicate a solver or encoder bug, never a property of the input.
    """
    if model.quadratic:
        raise QuadraticObjectiveError(
            "the internal solver handles linear objectives only; export the model instead")
    stats = stats or stats_of(model, M=model.meta.get("M", 0.0),
                              rho_max=model.meta.get("rho_max", 0.0))
    data = model.dense()
    bounds = None
    if tighten:
        meta = model.meta
        bounds = node_bounds(meta["tree"], output_boxes(meta["system"], meta["x0"], meta["horizon"]))
        rho = model.var("rho")
        cap = bounds[meta["tree"].node_id]
        if cap < data.lo[rho]:
            return _result(model, INFEASIBLE, None, stats, gap=math.inf)
        data.hi[rho] = min(data.hi[rho], cap)
    seed = PlanRounding(model, bounds=bounds) if heuristic else None
    # satisfaction variables can always be rounded to 0/1 without losing
    # feasibility or objective (see the encoder), so propagation may round them
    out = solve_milp(data, opts, seed, implied_integer=sorted(model.meta.get("z", {}).values()))
    res = _result(model, out.status, out.x, stats, nodes=out.nodes, time_ms=out.time_ms,
                  gap=out.gap, incumbents=list(out.incumbents))
    if out.x is not None:
        res.verification = verify(model, out.x)
        if out.status == OPTIMAL and not res.verification.ok:
            raise VerificationError(res.verification)
    return res


def synthesize(formula, sys, x0, T: int, cfg: EncoderConfig = EncoderConfig(),
               opts: BnBOptions = BnBOptions()) -> SolveResult:
    """Encode ``formula`` over ``T`` steps and maximise robustness internally."""
    model, stats = encode(formula, sys, x0, T, cfg)
    return branch_and_bound(model, opts, stats)


def result_from_values(model: MilpModel, x, stats: EncodingStats | None = None) -> SolveResult:
    """Wrap an externally obtained assignment; raises if verification fails.

    The status is reported as optimal because optimality is the external
    solver's claim; only feasibility and soundness are checked here.
    """
    stats = stats or stats_of(model, M=model.meta.get("M", 0.0),
                              rho_max=model.meta.get("rho_max", 0.0))
    x = np.asarray(x, dtype=float)
    res = _result(model, OPTIMAL, x, stats, gap=0.0)
    res.verification = verify(model, x)
    if not res.verification.ok:
        raise VerificationError(res.verification)
    return res
