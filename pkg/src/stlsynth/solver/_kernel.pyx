# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simplex iterations; same contract as ``_kernel_py``."""
from libc.math cimport fabs, INFINITY, isfinite

import numpy as np

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    ITER_LIMIT = 2
    INFEASIBLE = 3
    CUTOFF = 4
    NUMERICAL = 5

cdef double PIV_TOL = 1e-9


cdef void _pivot(double[:, ::1] T, double[::1] d, Py_ssize_t[::1] basis,
                 Py_ssize_t[::1] pos, Py_ssize_t r, Py_ssize_t j,
                 Py_ssize_t[::1] nz) noexcept nogil:
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1]
    cdef Py_ssize_t i, k, c, nnz = 0
    cdef double piv = T[r, j]
    cdef double f, dj
    cdef double* rowr = &T[r, 0]
    cdef double* rowi
    for k in range(N):
        if rowr[k] != 0.0:
            rowr[k] = rowr[k] / piv
            nz[nnz] = k
            nnz += 1
    rowr[j] = 1.0
    for i in range(m):
        if i == r:
            continue
        f = T[i, j]
        if f != 0.0:
            rowi = &T[i, 0]
            for k in range(nnz):
                c = nz[k]
                rowi[c] -= f * rowr[c]
            rowi[j] = 0.0
    dj = d[j]
    if dj != 0.0:
        for k in range(nnz):
            c = nz[k]
            d[c] -= dj * rowr[c]
    d[j] = 0.0
    pos[basis[r]] = -1
    basis[r] = j
    pos[j] = r


def pivot(double[:, ::1] T, double[::1] d, Py_ssize_t[::1] basis, Py_ssize_t[::1] pos,
          Py_ssize_t r, Py_ssize_t j):
    cdef Py_ssize_t[::1] nz = np.empty(T.shape[1], dtype=np.intp)
    with nogil:
        _pivot(T, d, basis, pos, r, j, nz)


def primal(double[:, ::1] T, double[::1] x, double[::1] d, Py_ssize_t[::1] basis,
           Py_ssize_t[::1] pos, double[::1] lo, double[::1] hi, int phase,
           long max_iter, long bland_after, double tol):
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1]
    cdef Py_ssize_t i, k, j, r, b
    cdef long it = 0, stall = 0
    cdef bint bland = False, any_bad
    cdef double best, v, sigma, theta, span, lim, hit_r = 0.0, rt, xb, lb, ub, bestrate
    cdef Py_ssize_t[::1] nz = np.empty(N, dtype=np.intp)
    cdef signed char[::1] state = np.zeros(m, dtype=np.int8)  # -1 below, +1 above
    cdef int status = ITER_LIMIT
    with nogil:
        while it < max_iter:
            if phase == 1:
                any_bad = False
                for i in range(m):
                    b = basis[i]
                    if x[b] < lo[b] - tol:
                        state[i] = -1
                        any_bad = True
                    elif x[b] > hi[b] + tol:
                        state[i] = 1
                        any_bad = True
                    else:
                        state[i] = 0
                if not any_bad:
                    status = OPTIMAL
                    break
                for k in range(N):
                    d[k] = 0.0
                for i in range(m):
                    if state[i] != 0:
                        v = <double> state[i]
                        for k in range(N):
                            d[k] -= v * T[i, k]
                for i in range(m):
                    d[basis[i]] = 0.0
            else:
                for i in range(m):
                    state[i] = 0
            # pricing
            j = -1
            best = 0.0
            for k in range(N):
                if pos[k] >= 0 or not hi[k] > lo[k]:
                    continue
                v = d[k]
                if (v < -tol and x[k] < hi[k]) or (v > tol and x[k] > lo[k]):
                    if bland:
                        j = k
                        break
                    if fabs(v) > best:
                        best = fabs(v)
                        j = k
            if j < 0:
                status = INFEASIBLE if phase == 1 else OPTIMAL
                break
            sigma = 1.0 if d[j] < 0 else -1.0
            # ratio test, first pass: smallest limit
            theta = INFINITY
            for i in range(m):
                rt = -sigma * T[i, j]
                lim = _limit(rt, x[basis[i]], lo[basis[i]], hi[basis[i]], state[i])
                if lim < theta:
                    theta = lim
            span = hi[j] - lo[j]
            r = -1
            if span <= theta and isfinite(span):
                theta = span
            else:
                if not isfinite(theta):
                    status = NUMERICAL if phase == 1 else UNBOUNDED
                    break
                # second pass: among ties prefer widest pivot (or lowest column under Bland)
                bestrate = -1.0
                for i in range(m):
                    rt = -sigma * T[i, j]
                    lim = _limit(rt, x[basis[i]], lo[basis[i]], hi[basis[i]], state[i])
                    if lim <= theta + 1e-12:
                        if bland:
                            if r < 0 or basis[i] < basis[r]:
                                r = i
                        elif fabs(rt) > bestrate:
                            bestrate = fabs(rt)
                            r = i
                rt = -sigma * T[r, j]
                theta = _limit(rt, x[basis[r]], lo[basis[r]], hi[basis[r]], state[r])
                hit_r = _hit(rt, lo[basis[r]], hi[basis[r]], state[r])
            if theta <= 1e-12:
                stall += 1
                if stall > bland_after:
                    bland = True
            else:
                stall = 0
                bland = False
            for i in range(m):
                x[basis[i]] += -sigma * T[i, j] * theta
            if r < 0:
                x[j] = hi[j] if sigma > 0 else lo[j]
            else:
                x[j] += sigma * theta
                x[basis[r]] = hit_r
                _pivot(T, d, basis, pos, r, j, nz)
            it += 1
    return status, it


cdef inline double _limit(double rt, double xb, double lb, double ub, signed char st) noexcept nogil:
    if rt > PIV_TOL:
        if st < 0:
            return max((lb - xb) / rt, 0.0)
        if st == 0 and isfinite(ub):
            return max((ub - xb) / rt, 0.0)
    elif rt < -PIV_TOL:
        if st > 0:
            return max((xb - ub) / -rt, 0.0)
        if st == 0 and isfinite(lb):
            return max((xb - lb) / -rt, 0.0)
    return INFINITY


cdef inline double _hit(double rt, double lb, double ub, signed char st) noexcept nogil:
    if rt > 0:
        return lb if st < 0 else ub
    return ub if st > 0 else lb


def dual(double[:, ::1] T, double[::1] x, double[::1] d, Py_ssize_t[::1] basis,
         Py_ssize_t[::1] pos, double[::1] lo, double[::1] hi, long max_iter,
         long bland_after, double tol, double obj, double cutoff):
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1]
    cdef Py_ssize_t i, k, j, r, b
    cdef long it = 0, stall = 0
    cdef bint bland = False, up, down
    cdef double viol, worst, target, s, a, dd, bound, ratio, besta, dx
    cdef Py_ssize_t[::1] nz = np.empty(N, dtype=np.intp)
    cdef int status = ITER_LIMIT
    with nogil:
        while it < max_iter:
            r = -1
            worst = tol
            for i in range(m):
                b = basis[i]
                viol = lo[b] - x[b]
                if x[b] - hi[b] > viol:
                    viol = x[b] - hi[b]
                if viol > tol:
                    if bland:
                        if r < 0 or b < basis[r]:
                            r = i
                    elif viol > worst:
                        worst = viol
                        r = i
            if r < 0:
                status = OPTIMAL
                break
            b = basis[r]
            if x[b] < lo[b]:
                target = lo[b]
                s = 1.0
            else:
                target = hi[b]
                s = -1.0
            # Harris pass 1: relaxed bound on the dual step
            bound = INFINITY
            for k in range(N):
                if pos[k] >= 0 or not hi[k] > lo[k]:
                    continue
                a = s * T[r, k]
                up = x[k] < hi[k] and a < -PIV_TOL
                down = x[k] > lo[k] and a > PIV_TOL
                if not (up or down):
                    continue
                dd = d[k] if up else -d[k]
                if dd < 0.0:
                    dd = 0.0
                ratio = (dd + tol) / fabs(a)
                if ratio < bound:
                    bound = ratio
            if bound == INFINITY:
                status = INFEASIBLE
                break
            # pass 2: widest pivot within the bound
            j = -1
            besta = -1.0
            for k in range(N):
                if pos[k] >= 0 or not hi[k] > lo[k]:
                    continue
                a = s * T[r, k]
                up = x[k] < hi[k] and a < -PIV_TOL
                down = x[k] > lo[k] and a > PIV_TOL
                if not (up or down):
                    continue
                dd = d[k] if up else -d[k]
                if dd < 0.0:
                    dd = 0.0
                if dd / fabs(a) <= bound:
                    if bland:
                        j = k
                        break
                    if fabs(a) > besta:
                        besta = fabs(a)
                        j = k
            dx = (x[b] - target) / T[r, j]
            for i in range(m):
                x[basis[i]] -= T[i, j] * dx
            x[j] += dx
            x[b] = target
            obj += d[j] * dx
            if fabs(dx) <= 1e-12:
                stall += 1
                if stall > bland_after:
                    bland = True
            else:
                stall = 0
                bland = False
            _pivot(T, d, basis, pos, r, j, nz)
            it += 1
            if obj > cutoff:
                status = CUTOFF
                break
    return status, it, obj
