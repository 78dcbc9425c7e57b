"""Pure numpy simplex iterations on a dense bounded-variable tableau.

Mirrors ``_kernel.pyx`` operation for operation; used when the compiled
extension is unavailable or disabled.

State shared by both kernels (all arrays modified in place):

``T``      (m, N) tableau ``B^-1 [A | I]``
``x``      (N,) values of every column, nonbasic ones sitting exactly on a bound
``d``      (N,) reduced costs
``basis``  (m,) column basic in each row
``pos``    (N,) row of a basic column, -1 if nonbasic
``lo, hi`` (N,) bounds (may be infinite)
"""
import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2
INFEASIBLE = 3
CUTOFF = 4
NUMERICAL = 5

PIV_TOL = 1e-9


def pivot(T, d, basis, pos, r, j):
    row = T[r]
    row /= row[j]
    col = T[:, j].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    cols = np.flatnonzero(row)
    if rows.size:
        T[np.ix_(rows, cols)] -= np.outer(col[rows], row[cols])
        T[rows, j] = 0.0
    dj = d[j]
    if dj != 0.0:
        d[cols] -= dj * row[cols]
    d[j] = 0.0
    leaving = basis[r]
    pos[leaving] = -1
    basis[r] = j
    pos[j] = r


def _entering(x, d, pos, lo, hi, tol, bland):
    movable = (pos < 0) & (hi > lo)
    inc = movable & (x < hi) & (d < -tol)
    dec = movable & (x > lo) & (d > tol)
    cand = np.flatnonzero(inc | dec)
    if cand.size == 0:
        return -1
    if bland:
        return int(cand[0])
    return int(cand[np.argmax(np.abs(d[cand]))])


def primal(T, x, d, basis, pos, lo, hi, phase, max_iter, bland_after, tol):
    """Run primal simplex iterations; returns ``(status, iterations)``.

    Phase 1 minimises the total bound violation of the basic variables and
    returns OPTIMAL once the basis is primal feasible (INFEASIBLE if it gets
    stuck above zero); phase 2 minimises the cost encoded in ``d``.
    """
    m = T.shape[0]
    it = 0
    stall = 0
    bland = False
    while it < max_iter:
        xb = x[basis]
        lb = lo[basis]
        ub = hi[basis]
        if phase == 1:
            below = xb < lb - tol
            above = xb > ub + tol
            cb = above.astype(float) - below.astype(float)
            rows = np.flatnonzero(cb)
            if rows.size == 0:
                return OPTIMAL, it
            d[:] = -(cb[rows] @ T[rows])
            d[basis] = 0.0
        else:
            below = np.zeros(m, dtype=bool)
            above = below
        j = _entering(x, d, pos, lo, hi, tol, bland)
        if j < 0:
            return (INFEASIBLE if phase == 1 else OPTIMAL), it
        sigma = 1.0 if d[j] < 0 else -1.0
        rate = -sigma * T[:, j]
        # ratio test: each entry is (limit, bound value reached)
        inc = rate > PIV_TOL
        dec = rate < -PIV_TOL
        lim = np.full(m, np.inf)
        hit = np.zeros(m)
        # increasing basics
        sel = inc & below
        lim[sel] = (lb[sel] - xb[sel]) / rate[sel]
        hit[sel] = lb[sel]
        sel = inc & ~below & ~above & np.isfinite(ub)
        lim[sel] = (ub[sel] - xb[sel]) / rate[sel]
        hit[sel] = ub[sel]
        # decreasing basics
        sel = dec & above
        lim[sel] = (xb[sel] - ub[sel]) / -rate[sel]
        hit[sel] = ub[sel]
        sel = dec & ~below & ~above & np.isfinite(lb)
        lim[sel] = (xb[sel] - lb[sel]) / -rate[sel]
        hit[sel] = lb[sel]
        np.maximum(lim, 0.0, out=lim)
        span = hi[j] - lo[j]
        theta = lim.min() if m else np.inf
        if span <= theta and np.isfinite(span):
            r = -1
            theta = span
        else:
            if not np.isfinite(theta):
                return (NUMERICAL if phase == 1 else UNBOUNDED), it
            ties = np.flatnonzero(lim <= theta + 1e-12)
            if bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(rate[ties]))])
            theta = lim[r]
        if theta <= 1e-12:
            stall += 1
            if stall > bland_after:
                bland = True
        else:
            stall = 0
            bland = False
        x[basis] += rate * theta
        if r < 0:
            x[j] = hi[j] if sigma > 0 else lo[j]
        else:
            x[j] += sigma * theta
            x[basis[r]] = hit[r]
            pivot(T, d, basis, pos, r, j)
        it += 1
    return ITER_LIMIT, it


def dual(T, x, d, basis, pos, lo, hi, max_iter, bland_after, tol, obj, cutoff):
    """Run dual simplex iterations from a dual-feasible basis.

    Returns ``(status, iterations, objective)``; OPTIMAL means primal feasible.
    """
    it = 0
    stall = 0
    bland = False
    while it < max_iter:
        xb = x[basis]
        lb = lo[basis]
        ub = hi[basis]
        viol = np.maximum(lb - xb, xb - ub)
        bad = np.flatnonzero(viol > tol)
        if bad.size == 0:
            return OPTIMAL, it, obj
        if bland:
            r = int(bad[np.argmin(basis[bad])])
        else:
            r = int(bad[np.argmax(viol[bad])])
        if xb[r] < lb[r]:
            target = lb[r]
            s = 1.0
        else:
            target = ub[r]
            s = -1.0
        alpha = T[r]
        movable = (pos < 0) & (hi > lo)
        # x_Br moves by -alpha_j * dx_j; we need s * that > 0
        up = movable & (x < hi) & (s * alpha < -PIV_TOL)
        down = movable & (x > lo) & (s * alpha > PIV_TOL)
        cand = np.flatnonzero(up | down)
        if cand.size == 0:
            return INFEASIBLE, it, obj
        a = np.abs(alpha[cand])
        # reduced cost seen in the direction of travel; clipped at zero
        dd = np.maximum(np.where(up[cand], d[cand], -d[cand]), 0.0)
        ratio = dd / a
        # Harris pass: widest pivot among near-minimal ratios
        bound = np.min((dd + tol) / a)
        near = np.flatnonzero(ratio <= bound)
        if bland:
            k = near[0]
        else:
            k = near[np.argmax(a[near])]
        j = int(cand[k])
        dx = (xb[r] - target) / alpha[j]
        x[basis] -= T[:, j] * dx
        x[j] += dx
        x[basis[r]] = target
        obj += d[j] * dx
        if abs(dx) <= 1e-12:
            stall += 1
            if stall > bland_after:
                bland = True
        else:
            stall = 0
            bland = False
        pivot(T, d, basis, pos, r, j)
        it += 1
        if obj > cutoff:
            return CUTOFF, it, obj
    return ITER_LIMIT, it, obj
