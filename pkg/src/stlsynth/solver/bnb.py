"""Best-bound branch-and-bound over the dense simplex."""
from __future__ import annotations

import heapq
import itertools
import math
import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, NumericalError, Tableau
from .propagate import Propagator

INT_TOL = 1e-6
# memory allowed for full tableau copies of open nodes
STATE_CACHE_BYTES = 256 * 2**20


@dataclass(frozen=True)
class BnBOptions:
    abs_gap: float = 1e-6
    node_limit: int = 10**6
    time_limit_ms: float | None = None
    branch_rule: str = "most_fractional"
    search: str = "best_bound"
    propagate: bool = True

    def __post_init__(self):
        if self.abs_gap < 0:
            raise ValueError("abs_gap must be non-negative")
        if self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit_ms is not None and self.time_limit_ms <= 0:
            raise ValueError("time_limit_ms must be positive")
        if self.branch_rule != "most_fractional":
            raise ValueError(f"unsupported branch rule {self.branch_rule!r}")
        if self.search != "best_bound":
            raise ValueError(f"unsupported search {self.search!r}")


@dataclass
class BnBOutcome:
    status: str  # optimal | infeasible | node_limit | time_limit | unbounded
    objective: float
    x: np.ndarray | None
    bound: float
    nodes: int
    time_ms: float
    lp_iterations: int
    incumbents: list[tuple[int, float]] = field(default_factory=list)

    @property
    def gap(self) -> float:
        if self.x is None or not math.isfinite(self.bound):
            return math.inf
        return max(0.0, self.objective - self.bound)


@dataclass(order=True)
class _Open:
    # ties on the bound go to the deepest, then the most recently created node
    bound: float
    neg_depth: int
    neg_seq: int
    fix: np.ndarray = field(compare=False)
    snap: tuple = field(compare=False)


def _most_fractional(x: np.ndarray, bins: np.ndarray) -> int:
    """Binary farthest from integrality; lowest id among ties, -1 if integral."""
    if bins.size == 0:
        return -1
    v = x[bins]
    frac = np.minimum(v - np.floor(v), np.ceil(v) - v)
    k = int(np.argmax(frac))
    if frac[k] <= INT_TOL:
        return -1
    return int(bins[k])


def solve_milp(data, opts: BnBOptions = BnBOptions(), root_heuristic=None,
               implied_integer=()) -> BnBOutcome:
    """Minimise ``data`` (dense ``LpData``) with integrality on ``data.binaries``.

    ``root_heuristic(tableau, x, binaries)`` may return a feasible point after
    the root LP; it becomes the first incumbent.  The heuristic is free to
    change the tableau, whose root state is restored afterwards.

    ``implied_integer`` lists continuous columns for which some optimal
    solution is integral.  Propagation may round their bounds; they are never
    branched on and may stay fractional in the returned point.
    """
    start = time.monotonic()
    bins = np.asarray(data.binaries, dtype=np.intp)
    n = data.c.shape[0]
    lo0 = np.asarray(data.lo, dtype=float).copy()
    hi0 = np.asarray(data.hi, dtype=float).copy()
    integral = np.union1d(bins, np.asarray(implied_integer, dtype=np.intp))
    prop = Propagator(data.A, data.b, data.is_eq, integral) if opts.propagate else None
    if prop is not None:
        plo, phi = lo0.copy(), hi0.copy()
        if not prop.run(plo, phi):
            return BnBOutcome(INFEASIBLE, math.nan, None, math.inf, 1,
                              (time.monotonic() - start) * 1e3, 0)
        lo0[integral], hi0[integral] = plo[integral], phi[integral]
    tab = Tableau(data.c, data.A, data.b, data.is_eq, lo0, hi0, data.offset)

    incumbent = math.inf
    best_x = None
    history: list[tuple[int, float]] = []
    pruned_lb = math.inf
    heap: list[_Open] = []
    seq = itertools.count()
    nodes = 1

    def elapsed_ms():
        return (time.monotonic() - start) * 1e3

    def outcome(status, bound):
        return BnBOutcome(status, incumbent if best_x is not None else math.nan, best_x,
                          bound, nodes, elapsed_ms(), tab.iterations, history)

    status = tab.primal()
    if status == INFEASIBLE:
        return outcome(INFEASIBLE, math.inf)
    if status == UNBOUNDED:
        return outcome(UNBOUNDED, -math.inf)
    if root_heuristic is not None:
        saved = tab.save()
        start_x = root_heuristic(tab, tab.structural(), bins)
        tab.load(saved)
        if start_x is not None:
            best_x = np.asarray(start_x, dtype=float)
            incumbent = float(data.c @ best_x) + data.offset
            history.append((0, incumbent))

    def bounds_for(fix):
        lo, hi = lo0.copy(), hi0.copy()
        sel = fix >= 0
        lo[bins[sel]] = fix[sel]
        hi[bins[sel]] = fix[sel]
        return lo, hi

    def tighten(lo, hi) -> bool:
        """Propagate bounds (with the incumbent as a cutoff); False if infeasible."""
        if prop is None:
            return True
        cutoff = None
        if best_x is not None:
            cutoff = (data.c, incumbent - opts.abs_gap - data.offset)
        return prop.run(lo, hi, cutoff)

    def child_lp(j, val, parent_state, full):
        """Fix binary ``j`` to ``val``, propagate and re-solve; None if pruned early.

        With ``full`` every propagated bound enters the LP, which tightens the
        relaxation.  If that LP turns out numerically troublesome the child
        is re-solved from the parent state with only the integer columns
        tightened.
        """
        tab.set_bounds(j, float(val), float(val))
        if prop is not None:
            lo, hi = tab.lo[:n].copy(), tab.hi[:n].copy()
            if not tighten(lo, hi):
                return None
            cols = np.arange(n) if full else integral
            moved = cols[(lo[cols] != tab.lo[cols]) | (hi[cols] != tab.hi[cols])]
            for k2 in moved:
                tab.set_bounds(int(k2), float(lo[k2]), float(hi[k2]))
        try:
            return tab.dual(cutoff=incumbent - opts.abs_gap)
        except NumericalError:
            if not full or prop is None:
                raise
            tab.load(parent_state)
            return child_lp(j, val, parent_state, full=False)

    # (fix, bound, depth) of the node whose optimal LP state sits in the tableau
    current = (np.full(bins.size, -1, dtype=np.int8), tab.objective(), 0)
    bin_pos = {int(j): k for k, j in enumerate(bins)}
    # full tableau copies of recently pushed nodes, so that popping them
    # (the common case right after a plunge ends) avoids a refactorisation
    cache: OrderedDict[int, tuple] = OrderedDict()
    cache_slots = max(2, STATE_CACHE_BYTES // max(tab.T.nbytes, 1))

    def push(bound, depth, fix):
        key = -next(seq)
        heapq.heappush(heap, _Open(bound, -depth, key, fix, tab.snapshot()))
        cache[key] = tab.save()
        if len(cache) > cache_slots:
            cache.popitem(last=False)

    while True:
        if current is None:
            while heap and heap[0].bound >= incumbent - opts.abs_gap:
                pruned_lb = min(pruned_lb, heapq.heappop(heap).bound)
            if not heap:
                break
            node = heapq.heappop(heap)
            state = cache.pop(node.neg_seq, None)
            if state is not None:
                tab.load(state)
            else:
                lo, hi = bounds_for(node.fix)
                plo, phi = lo.copy(), hi.copy()
                if not tighten(plo, phi):
                    continue
                lo[integral], hi[integral] = plo[integral], phi[integral]
                tab.restore(node.snap, lo, hi)
                st = tab.dual(cutoff=incumbent - opts.abs_gap)
                if st != OPTIMAL:
                    if st == "cutoff":
                        pruned_lb = min(pruned_lb, tab.objective())
                    continue
            current = (node.fix, tab.objective(), -node.neg_depth)
        fix, bound, depth = current
        current = None
        if bound >= incumbent - opts.abs_gap:
            pruned_lb = min(pruned_lb, bound)
            continue
        x = tab.structural()
        j = _most_fractional(x, bins)
        if j < 0:
            incumbent = bound
            best_x = x
            history.append((nodes, bound))
            continue
        if nodes >= opts.node_limit or (
            opts.time_limit_ms is not None and elapsed_ms() > opts.time_limit_ms
        ):
            status = "node_limit" if nodes >= opts.node_limit else "time_limit"
            return outcome(status, min([bound] + [o.bound for o in heap]))

        # Evaluate both children from this node's state.  The child in the
        # rounding direction goes second so that its state stays loaded and
        # can be processed next without a refactorisation.
        preferred = 1 if x[j] >= 0.5 else 0
        saved = tab.save()
        for k, val in enumerate((1 - preferred, preferred)):
            if k == 1:
                tab.load(saved)
            child = fix.copy()
            child[bin_pos[j]] = val
            nodes += 1
            st = child_lp(j, val, saved, full=True)
            if st is None:
                continue
            if st == "cutoff":
                pruned_lb = min(pruned_lb, tab.objective())
            if st != OPTIMAL:
                continue
            cb = tab.objective()
            if k == 1 and (best_x is None or not heap or cb <= heap[0].bound + 1e-12):
                # plunge: until an incumbent exists, keep diving
                current = (child, cb, depth + 1)
            else:
                push(cb, depth + 1, child)

    if best_x is None:
        return outcome(INFEASIBLE, math.inf)
    return outcome(OPTIMAL, min(incumbent, pruned_lb))
