"""Upper bounds on achievable robustness from interval reachability.

Each output ``y[t]`` of a linear system started at ``x0`` lies in a box that
interval arithmetic propagates through the dynamics.  Treating those boxes as
independent gives a relaxation in which every disjunction-free subtree can be
maximised exactly, one small LP per timestep.  Combining children with min
(conjunction) and max (disjunction) then bounds the robustness of every node
from above.  The bound never cuts off a real trajectory, so it may replace
``rho``'s upper bound before branch-and-bound starts.
"""
from __future__ import annotations

from collections import defaultdict

import numpy as np

from ..formula import AND, STLTree
from ..model import LpData
from ..system import LinearSystem, output_boxes
from .lp import OPTIMAL, UNBOUNDED, Tableau

# added to every computed bound to absorb LP round-off
SLACK = 1e-9


def _group_bound(preds, lo: np.ndarray, hi: np.ndarray) -> float:
    """``max r`` subject to ``a.y - b + r <= 0`` for every predicate, ``y`` in the box."""
    if np.any(lo > hi):
        return -np.inf
    p = lo.shape[0]
    A = np.array([list(q.a) + [1.0] for q in preds])
    b = np.array([q.b for q in preds])
    c = np.zeros(p + 1)
    c[-1] = -1.0
    d = LpData(c, A, b, np.zeros(len(preds), dtype=bool),
               np.append(lo, -np.inf), np.append(hi, np.inf), np.zeros(0, dtype=np.intp))
    tab = Tableau.from_data(d)
    status = tab.primal()
    if status == UNBOUNDED:
        return np.inf
    if status != OPTIMAL:
        return -np.inf
    return -tab.objective()


def node_bounds(tree: STLTree, boxes) -> dict[int, float]:
    """Upper bound on the robustness of every node of ``tree``, keyed by node id."""
    out: dict[int, float] = {}
    cache: dict = {}

    def group(leaves) -> float:
        by_t = defaultdict(set)
        for pred, t in leaves:
            by_t[t].add(pred)
        worst = np.inf
        for t, preds in by_t.items():
            key = (t, frozenset(preds))
            if key not in cache:
                cache[key] = _group_bound(sorted(preds, key=repr), *boxes[t])
            worst = min(worst, cache[key])
        return worst

    def rec(n: STLTree):
        """Return the leaves of ``n`` if it holds no disjunction, else None."""
        if n.is_leaf:
            out[n.node_id] = group([n.leaf]) + SLACK
            return [n.leaf]
        kids = [rec(c) for c in n.children]
        if n.combination == AND and all(k is not None for k in kids):
            leaves = [leaf for k in kids for leaf in k]
            out[n.node_id] = group(leaves) + SLACK
            return leaves
        vals = [out[c.node_id] for c in n.children]
        out[n.node_id] = min(vals) if n.combination == AND else max(vals)
        return None

    rec(tree)
    return out


def robustness_bound(tree: STLTree, sys: LinearSystem, x0, T: int) -> float:
    return node_bounds(tree, output_boxes(sys, x0, T))[tree.node_id]
