"""Plan rounding: a primal heuristic for encoded synthesis models.

Given a trajectory (initially the one from the root relaxation), every
disjunction is resolved to the child with the largest robustness along that
trajectory.  Fixing the satisfaction variables and selector bits of that plan
turns the model into an LP whose solution is a new trajectory, and the
process repeats until the plan stops changing.  Any plan whose LP reaches a
non-negative robustness is a feasible point of the full model.
"""
from __future__ import annotations

import numpy as np

from ..formula import AND, node_robustness
from ..model import MilpModel
from .lp import OPTIMAL

FEAS_TOL = 1e-9


def _plan(tree, node_rho: dict[int, float], prior: dict[int, float] | None = None) -> dict[int, int]:
    """Required nodes mapped to the 1-based index of their chosen child (0 if none).

    With ``prior`` (robustness upper bounds), children are ranked by the bound
    first and by ``node_rho`` among ties.
    """
    chosen: dict[int, int] = {}
    stack = [tree]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            chosen[node.node_id] = 0
        elif node.combination == AND:
            chosen[node.node_id] = 0
            stack.extend(node.children)
        else:
            if prior is None:
                k = int(np.argmax([node_rho[c.node_id] for c in node.children]))
            else:
                k = max(range(len(node.children)),
                        key=lambda i: (prior[node.children[i].node_id],
                                       node_rho[node.children[i].node_id], -i))
            chosen[node.node_id] = k + 1
            stack.append(node.children[k])
    return chosen


class PlanRounding:
    """Callable root heuristic for :func:`stlsynth.solver.bnb.solve_milp`.

    Works on models produced by either encoder; the model's binaries must all
    be satisfaction variables or disjunction selectors.
    """

    def __init__(self, model: MilpModel, rounds: int = 25, bounds: dict[int, float] | None = None):
        meta = model.meta
        self.tree = meta["tree"]
        self.z = meta["z"]
        self.bits = meta.get("or_bits", {})
        self.y_ids = meta["dynamics"]["y"]
        self.rho = model.var("rho")
        self.rho_top = float(meta["rho_max"])
        self.rho_floor = -float(meta["M"])
        self.rounds = rounds
        self.bounds = bounds
        # fixing a plan must leave no free binary behind
        covered = set(self.z.values())
        for zetas in self.bits.values():
            covered.update(zetas)
        self.usable = set(model.binary_ids()) <= covered

    def _fix(self, tab, plan):
        for node_id, var in self.z.items():
            v = 1.0 if node_id in plan else 0.0
            tab.set_bounds(var, v, v)
        for node_id, zetas in self.bits.items():
            index = plan.get(node_id, 0)
            for k, var in enumerate(zetas):
                v = float((index >> k) & 1)
                tab.set_bounds(var, v, v)
        tab.set_bounds(self.rho, self.rho_floor, self.rho_cap)

    def __call__(self, tab, x_root: np.ndarray, binaries: np.ndarray):
        """Return the best feasible point found, or ``None``.  Leaves ``tab`` modified.

        One descent starts from the plan preferred by the robustness bounds
        (if given), another from the root trajectory.
        """
        if not self.usable:
            return None
        self.rho_cap = min(self.rho_top, float(tab.hi[self.rho]))
        base = tab.save()
        self.best, self.best_rho = None, -np.inf
        seen: set = set()
        if self.bounds is not None:
            first = _plan(self.tree, node_robustness(self.tree, x_root[self.y_ids]), self.bounds)
            if self._descend(tab, base, x_root, binaries, seen, first):
                return self.best
        self._descend(tab, base, x_root, binaries, seen, None)
        return self.best

    def _descend(self, tab, base, x, binaries, seen, plan) -> bool:
        """Alternate plan and trajectory; True once the cap is reached."""
        for _ in range(self.rounds):
            if plan is None:
                plan = _plan(self.tree, node_robustness(self.tree, x[self.y_ids]))
            key = frozenset(plan.items())
            if key in seen:
                return False
            seen.add(key)
            tab.load(base)
            self._fix(tab, plan)
            plan = None
            if tab.dual() != OPTIMAL:
                return False
            x = tab.structural()
            r = x[self.rho]
            v = x[binaries]
            integral = np.all(np.minimum(np.abs(v), np.abs(v - 1.0)) <= FEAS_TOL)
            if r >= -FEAS_TOL and integral and r > self.best_rho:
                self.best_rho = r
                self.best = x.copy()
                self.best[self.rho] = max(r, 0.0)
                if r >= self.rho_cap - FEAS_TOL:
                    return True
        return False
