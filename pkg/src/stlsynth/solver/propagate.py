"""Activity-based bound propagation for ``A x (<= | =) b`` with binaries.

For a row ``sum_j a_j x_j <= b`` the smallest possible activity of the other
terms bounds each ``x_j``.  Repeating this over all rows until nothing moves
(or a pass budget runs out) tightens variable bounds, rounds binaries, and
sometimes proves a node infeasible before any LP is solved.
"""
from __future__ import annotations

import numpy as np

# a bound must move by at least this much (relative to its scale) to count
MIN_CHANGE = 1e-6
FEAS_TOL = 1e-9
# continuous bounds are loosened by this (relative) amount against round-off
SAFETY = 1e-9
BIG = 1e12


class Propagator:
    """Precomputed sparse view of the constraint rows.

    :meth:`run` optionally takes ``cutoff = (c, rhs)``, an extra row
    ``c x <= rhs`` that lets an incumbent objective take part.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, is_eq: np.ndarray, integral):
        A = np.asarray(A, dtype=float)
        rows, cols = np.nonzero(A)
        vals = A[rows, cols]
        is_eq = np.asarray(is_eq, dtype=bool)
        # equality rows also act as >= rows, stored negated
        eq_rows = np.flatnonzero(is_eq)
        remap = np.full(A.shape[0], -1)
        remap[eq_rows] = A.shape[0] + np.arange(eq_rows.size)
        sel = is_eq[rows]
        self.rows = np.concatenate([rows, remap[rows[sel]]])
        self.cols = np.concatenate([cols, cols[sel]])
        self.vals = np.concatenate([vals, -vals[sel]])
        self.b = np.concatenate([np.asarray(b, dtype=float), -np.asarray(b, dtype=float)[eq_rows]])
        self.m = self.b.size
        self.n = A.shape[1]
        self.is_bin = np.zeros(self.n, dtype=bool)
        self.is_bin[np.asarray(integral, dtype=np.intp)] = True

    def _with_cutoff(self, cutoff):
        if cutoff is None:
            return self.rows, self.cols, self.vals, self.b, self.m
        c, rhs = cutoff
        nz = np.flatnonzero(c)
        return (np.concatenate([self.rows, np.full(nz.size, self.m)]),
                np.concatenate([self.cols, nz]),
                np.concatenate([self.vals, c[nz]]),
                np.append(self.b, rhs), self.m + 1)

    def run(self, lo: np.ndarray, hi: np.ndarray, cutoff=None, passes: int = 20):
        """Tighten ``lo``/``hi`` in place; returns False if infeasibility is proven."""
        rows, cols, vals, b, m = self._with_cutoff(cutoff)
        pos = vals > 0
        for _ in range(passes):
            # contribution of each entry to its row's minimum activity
            bound = np.where(pos, lo[cols], hi[cols])
            contrib = vals * bound
            inf = ~np.isfinite(contrib)
            n_inf = np.bincount(rows, weights=inf, minlength=m)
            finite_sum = np.bincount(rows, weights=np.where(inf, 0.0, contrib), minlength=m)
            if np.any((n_inf == 0) & (finite_sum > b + FEAS_TOL * (1 + np.abs(b)))):
                return False
            # residual activity of the other entries in the row
            other_inf = n_inf[rows] - inf
            residual = finite_sum[rows] - np.where(inf, 0.0, contrib)
            ok = other_inf == 0
            if not ok.any():
                return True
            limit = (b[rows] - residual) / vals
            changed = False
            up = ok & pos
            if up.any():
                new_hi = np.full(self.n, np.inf)
                np.minimum.at(new_hi, cols[up], limit[up])
                new_hi = np.where(self.is_bin, np.floor(new_hi + 1e-9),
                                  new_hi + SAFETY * (1 + np.abs(new_hi)))
                tighter = new_hi < hi - MIN_CHANGE * (1 + np.abs(hi))
                tighter &= new_hi < BIG
                if tighter.any():
                    hi[tighter] = new_hi[tighter]
                    changed = True
            down = ok & ~pos
            if down.any():
                new_lo = np.full(self.n, -np.inf)
                np.maximum.at(new_lo, cols[down], limit[down])
                new_lo = np.where(self.is_bin, np.ceil(new_lo - 1e-9),
                                  new_lo - SAFETY * (1 + np.abs(new_lo)))
                tighter = new_lo > lo + MIN_CHANGE * (1 + np.abs(lo))
                tighter &= new_lo > -BIG
                if tighter.any():
                    lo[tighter] = new_lo[tighter]
                    changed = True
            if np.any(lo > hi + FEAS_TOL * (1 + np.abs(hi))):
                return False
            np.minimum(lo, hi, out=lo, where=lo > hi)
            if not changed:
                return True
        return True
