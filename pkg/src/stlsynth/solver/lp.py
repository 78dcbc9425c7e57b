"""Bounded-variable simplex on a dense tableau.

Every row ``i`` of ``A x (<= | =) b`` gets a logical column ``s_i`` so that
``A x + s = b`` with ``s_i in [0, inf)`` for inequalities and ``[0, 0]`` for
equalities.  The tableau therefore always has shape ``(m, n + m)`` and the
all-logical basis is a valid starting point.

The iteration loops live in a compiled kernel (``_kernel``) with a numpy
fallback (``_kernel_py``); set ``STLSYNTH_PURE_PYTHON=1`` to force the
fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernel_py

if os.environ.get("STLSYNTH_PURE_PYTHON") == "1":
    kernel = _kernel_py
else:
    try:
        from . import _kernel as kernel
    except ImportError:  # extension not built
        kernel = _kernel_py

KERNEL = "compiled" if kernel is not _kernel_py else "python"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
ROW_TOL = 1e-8
REFACTOR_EVERY = 200
BLAND_AFTER = 50
MAX_ITER = 50_000


class LPError(RuntimeError):
    pass


class NumericalError(LPError):
    pass


class QuadraticObjectiveError(LPError, ValueError):
    pass


def use_kernel(name: str):
    """Switch the iteration kernel (``"compiled"`` or ``"python"``); returns the previous one."""
    global kernel, KERNEL
    prev = KERNEL
    if name == "python":
        kernel = _kernel_py
    elif name == "compiled":
        from . import _kernel as compiled

        kernel = compiled
    else:
        raise ValueError(name)
    KERNEL = name
    return prev


@dataclass
class LpResult:
    status: str
    objective: float
    x: np.ndarray
    iterations: int = 0


class Tableau:
    """Mutable simplex state for one LP; bounds may be changed between solves."""

    def __init__(self, c, A, b, is_eq, lo, hi, offset: float = 0.0):
        A = np.asarray(A, dtype=float)
        m, n = A.shape
        self.m, self.n = m, n
        self.A = np.hstack([A, np.eye(m)])
        self.b = np.asarray(b, dtype=float).copy()
        self.c = np.concatenate([np.asarray(c, dtype=float), np.zeros(m)])
        slack_hi = np.where(np.asarray(is_eq, dtype=bool), 0.0, np.inf)
        self.lo = np.concatenate([np.asarray(lo, dtype=float), np.zeros(m)])
        self.hi = np.concatenate([np.asarray(hi, dtype=float), slack_hi])
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound exceeds upper bound")
        self.offset = offset
        self.iterations = 0
        self.reset()

    @classmethod
    def from_data(cls, data) -> "Tableau":
        return cls(data.c, data.A, data.b, data.is_eq, data.lo, data.hi, data.offset)

    # -- state management
    def reset(self):
        """Return to the all-logical basis with structurals on a cost-preferred bound."""
        m, n = self.m, self.n
        self.basis = np.arange(n, n + m, dtype=np.intp)
        self.pos = np.full(n + m, -1, dtype=np.intp)
        self.pos[self.basis] = np.arange(m)
        x = np.zeros(n + m)
        for j in range(n):
            x[j] = self._resting_value(j)
        self.x = x
        self._refactor()

    def _resting_value(self, j) -> float:
        lo, hi = self.lo[j], self.hi[j]
        if np.isfinite(lo) and (self.c[j] >= 0 or not np.isfinite(hi)):
            return lo
        if np.isfinite(hi):
            return hi
        return 0.0

    def _refactor(self):
        self._stale = 0
        B = self.A[:, self.basis]
        try:
            self.T = np.ascontiguousarray(np.linalg.solve(B, self.A))
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular basis") from exc
        nonbasic = self.pos < 0
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = np.linalg.solve(B, rhs)
        self.T[np.arange(self.m), self.basis] = 1.0
        self.d = self.c - self.c[self.basis] @ self.T
        self.d[self.basis] = 0.0

    def snapshot(self):
        """Basis and nonbasic bound positions, enough to rebuild the state later."""
        at_hi = np.flatnonzero((self.pos < 0) & (self.x == self.hi) & (self.x != self.lo))
        return self.basis.copy(), at_hi

    def save(self):
        """Full copy of the mutable state (cheaper than a refactorisation)."""
        return (self.T.copy(), self.x.copy(), self.d.copy(), self.basis.copy(),
                self.pos.copy(), self.lo.copy(), self.hi.copy(), self._stale)

    def load(self, state):
        T, x, d, basis, pos, lo, hi, self._stale = state
        np.copyto(self.T, T)
        for dst, src in ((self.x, x), (self.d, d), (self.basis, basis), (self.pos, pos),
                         (self.lo, lo), (self.hi, hi)):
            np.copyto(dst, src)

    def restore(self, snap, lo, hi):
        """Rebuild the tableau from a snapshot under new structural bounds."""
        basis, at_hi = snap
        self.lo[: self.n] = lo
        self.hi[: self.n] = hi
        self.basis = basis.copy()
        self.pos[:] = -1
        self.pos[self.basis] = np.arange(self.m)
        upper = np.zeros(self.n + self.m, dtype=bool)
        upper[at_hi] = True
        for j in np.flatnonzero(self.pos < 0):
            if upper[j] and np.isfinite(self.hi[j]):
                self.x[j] = self.hi[j]
            elif np.isfinite(self.lo[j]):
                self.x[j] = self.lo[j]
            elif np.isfinite(self.hi[j]):
                self.x[j] = self.hi[j]
            else:
                self.x[j] = 0.0
        self._refactor()

    def set_bounds(self, j: int, lo: float, hi: float):
        """Change bounds of structural ``j``, keeping a nonbasic ``j`` on a bound."""
        self.lo[j], self.hi[j] = lo, hi
        if self.pos[j] >= 0:
            return
        old = self.x[j]
        if self.d[j] < 0 and np.isfinite(hi):
            new = hi
        elif np.isfinite(lo):
            new = lo
        elif np.isfinite(hi):
            new = hi
        else:
            new = 0.0
        if new != old:
            self.x[self.basis] -= self.T[:, j] * (new - old)
            self.x[j] = new

    # -- queries
    def objective(self) -> float:
        return float(self.c @ self.x) + self.offset

    def primal_infeasibility(self) -> float:
        xb = self.x[self.basis]
        v = np.maximum(self.lo[self.basis] - xb, xb - self.hi[self.basis])
        return float(max(v.max(initial=0.0), 0.0))

    def dual_infeasibility(self) -> float:
        nb = (self.pos < 0) & (self.hi > self.lo)
        d, x = self.d, self.x
        bad_inc = nb & (x < self.hi) & (d < 0)
        bad_dec = nb & (x > self.lo) & (d > 0)
        v = np.where(bad_inc | bad_dec, np.abs(d), 0.0)
        return float(v.max(initial=0.0))

    def structural(self) -> np.ndarray:
        return self.x[: self.n].copy()

    # -- algorithms
    def _run_primal(self, phase: int, budget: int) -> tuple[int, int]:
        status, it = kernel.primal(self.T, self.x, self.d, self.basis, self.pos,
                                   self.lo, self.hi, phase, budget, BLAND_AFTER, FEAS_TOL)
        self.iterations += it
        self._stale += it
        return status, it

    def primal(self, max_iter: int = MAX_ITER) -> str:
        """Two-phase primal simplex from the current basis."""
        used = 0
        for _ in range(max_iter // REFACTOR_EVERY + 4):
            if used >= max_iter:
                break
            status, it = self._run_primal(1, min(REFACTOR_EVERY, max_iter - used))
            used += it
            if status == _kernel_py.ITER_LIMIT:
                self._refactor()
                continue
            if status == _kernel_py.INFEASIBLE:
                self._refactor()
                if self.primal_infeasibility() > FEAS_TOL:
                    return INFEASIBLE
                continue
            if status == _kernel_py.NUMERICAL:
                raise NumericalError("phase 1 ratio test found no blocking row")
            # phase 2 on true costs
            self._refactor()
            if self.primal_infeasibility() > FEAS_TOL:
                continue
            status, it = self._run_primal(2, min(REFACTOR_EVERY, max(max_iter - used, 1)))
            used += it
            if status == _kernel_py.UNBOUNDED:
                return UNBOUNDED
            self._refactor()
            if status == _kernel_py.OPTIMAL and self._clean():
                return OPTIMAL
        raise NumericalError(f"simplex did not converge in {max_iter} iterations")

    def dual(self, cutoff: float = np.inf, max_iter: int = MAX_ITER) -> str:
        """Dual simplex from a dual-feasible basis; falls back to primal if it stalls.

        Returns ``"cutoff"`` if the objective provably exceeds ``cutoff``.  The
        basis is refactorised only every ``REFACTOR_EVERY`` pivots or when the
        final row check fails, since refactorising dominates the cost of the
        short re-solves done inside branch-and-bound.
        """
        if self.dual_infeasibility() > 1e-7:
            return self.primal(max_iter)
        used = 0
        fresh = False
        while used < max_iter:
            if self._stale >= REFACTOR_EVERY:
                self._refactor()
            status, it, _ = kernel.dual(self.T, self.x, self.d, self.basis, self.pos,
                                        self.lo, self.hi, min(REFACTOR_EVERY, max_iter - used),
                                        BLAND_AFTER, FEAS_TOL, float(self.c @ self.x),
                                        cutoff - self.offset)
            self.iterations += it
            self._stale += it
            used += it
            if it:
                fresh = False
            if status == _kernel_py.ITER_LIMIT:
                continue
            if status == _kernel_py.OPTIMAL and self.dual_infeasibility() <= OPT_TOL \
                    and self._clean():
                return OPTIMAL
            if status == _kernel_py.CUTOFF and self.dual_infeasibility() <= 1e-7 \
                    and self.objective() > cutoff:
                return "cutoff"
            if status == _kernel_py.INFEASIBLE and self._farkas():
                return INFEASIBLE
            if not fresh:
                # re-check on a freshly factorised basis before giving up on the dual
                self._refactor()
                fresh = True
                continue
            if status == _kernel_py.INFEASIBLE and self.dual_infeasibility() <= 1e-7:
                return INFEASIBLE
            return self.primal(max_iter)
        return self.primal(max_iter)

    def _farkas(self) -> bool:
        """Certify infeasibility from the most violated basic row.

        The row of ``B^-1`` stored in the tableau may carry rounding error, so
        the aggregated row ``y A x = y b`` is recomputed from the original data
        and checked against the bound box; any ``y`` that passes is a valid
        certificate regardless of how it was obtained.
        """
        xb = self.x[self.basis]
        viol = np.maximum(self.lo[self.basis] - xb, xb - self.hi[self.basis])
        r = int(np.argmax(viol))
        if viol[r] <= FEAS_TOL:
            return False
        y = self.T[r, self.n:]
        alpha = y @ self.A
        rhs = float(y @ self.b)
        # rounding leaves ~1e-16 entries that would otherwise pick up infinite bounds
        pos, neg = alpha > 1e-11, alpha < -1e-11
        with np.errstate(invalid="ignore"):
            lo_act = alpha[pos] @ self.lo[pos] + alpha[neg] @ self.hi[neg]
            hi_act = alpha[pos] @ self.hi[pos] + alpha[neg] @ self.lo[neg]
        scale = 1.0 + float(np.abs(alpha).max(initial=0.0)) + abs(rhs)
        return bool(rhs < lo_act - 1e-7 * scale or rhs > hi_act + 1e-7 * scale)

    def _clean(self) -> bool:
        """Final feasibility check of the original rows; snaps tiny bound drift."""
        if self.primal_infeasibility() > FEAS_TOL or self.dual_infeasibility() > OPT_TOL:
            return False
        xs = self.x[: self.n]
        np.clip(xs, self.lo[: self.n], self.hi[: self.n], out=xs)
        act = self.A[:, : self.n] @ xs
        slack_hi = self.hi[self.n:]
        viol = np.where(slack_hi == 0.0, np.abs(act - self.b), act - self.b)
        return bool(viol.max(initial=0.0) <= ROW_TOL)


def solve_lp(model, lo=None, hi=None) -> LpResult:
    """Solve the LP relaxation of ``model`` (binaries relaxed to ``[0, 1]``).

    ``model`` is a :class:`~stlsynth.model.MilpModel` or its ``LpData``;
    ``lo``/``hi`` optionally override the variable bounds.
    """
    from ..model import LpData, MilpModel

    if isinstance(model, MilpModel):
        if model.quadratic:
            raise QuadraticObjectiveError("the internal LP solver handles linear objectives only")
        data = model.dense()
    elif isinstance(model, LpData):
        data = model
    else:
        raise TypeError("expected MilpModel or LpData")
    lo = data.lo if lo is None else np.asarray(lo, dtype=float)
    hi = data.hi if hi is None else np.asarray(hi, dtype=float)
    n = data.c.shape[0]
    if np.any(lo > hi):
        return LpResult(INFEASIBLE, np.nan, np.full(n, np.nan))
    tab = Tableau(data.c, data.A, data.b, data.is_eq, lo, hi, data.offset)
    status = tab.primal()
    if status == OPTIMAL:
        return LpResult(OPTIMAL, tab.objective(), tab.structural(), tab.iterations)
    return LpResult(status, np.nan if status == INFEASIBLE else -np.inf,
                    np.full(n, np.nan), tab.iterations)
