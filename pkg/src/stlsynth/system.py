"""Discrete-time linear systems and trajectory rollout."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    pass


def _bounds(arr, size, label) -> np.ndarray:
    b = np.asarray(arr, dtype=float).reshape(-1, 2) if arr is not None else None
    if b is None:
        return np.tile([-np.inf, np.inf], (size, 1))
    if b.shape != (size, 2):
        raise DimensionError(f"{label} bounds must have shape ({size}, 2), got {b.shape}")
    if np.any(b[:, 0] > b[:, 1]):
        raise ValueError(f"{label} bounds have lower > upper")
    return b


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``x[t+1] = A x[t] + B u[t]``, ``y[t] = C x[t] + D u[t]`` with box bounds.

    Bounds are ``(size, 2)`` arrays of ``[lower, upper]`` rows.  The timestep is
    implicitly 1.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    x_bounds: np.ndarray | None = None
    u_bounds: np.ndarray | None = None
    y_bounds: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n, m, p = A.shape[0], B.shape[1], C.shape[0]
        if A.shape != (n, n):
            raise DimensionError("A must be square")
        if B.shape != (n, m):
            raise DimensionError(f"B must be ({n}, {m})")
        if C.shape != (p, n):
            raise DimensionError(f"C must be ({p}, {n})")
        if D.shape != (p, m):
            raise DimensionError(f"D must be ({p}, {m})")
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        for name, size in (("x_bounds", n), ("u_bounds", m), ("y_bounds", p)):
            b = _bounds(getattr(self, name), size, name[0])
            b.setflags(write=False)
            object.__setattr__(self, name, b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def with_bounds(self, x_bounds=None, u_bounds=None, y_bounds=None) -> "LinearSystem":
        return LinearSystem(
            self.A, self.B, self.C, self.D,
            self.x_bounds if x_bounds is None else x_bounds,
            self.u_bounds if u_bounds is None else u_bounds,
            self.y_bounds if y_bounds is None else y_bounds,
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States, inputs and outputs for timesteps ``0..T`` as ``(T+1, dim)`` arrays."""

    x: np.ndarray
    u: np.ndarray
    y: np.ndarray

    @property
    def horizon(self) -> int:
        return self.x.shape[0] - 1

    def residuals(self, sys: LinearSystem) -> tuple[float, float]:
        """Largest violation of the state equation and of the output equation."""
        dyn = 0.0
        if self.x.shape[0] > 1:
            pred = self.x[:-1] @ sys.A.T + self.u[:-1] @ sys.B.T
            dyn = float(np.max(np.abs(self.x[1:] - pred)))
        out = self.y - (self.x @ sys.C.T + self.u @ sys.D.T)
        return dyn, float(np.max(np.abs(out))) if out.size else 0.0

    def to_json(self) -> dict:
        return {"x": self.x.tolist(), "u": self.u.tolist(), "y": self.y.tolist()}


def rollout(sys: LinearSystem, x0, u) -> Trajectory:
    """Simulate ``sys`` from ``x0`` under inputs ``u[0..T]``.

    ``u`` has one row per timestep including the last; ``u[T]`` only affects
    ``y[T]`` through ``D``.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, sys.m) if sys.m else u.reshape(-1, 0)
    if x0.shape != (sys.n,):
        raise DimensionError(f"x0 must have length {sys.n}")
    if u.ndim != 2 or u.shape[1] != sys.m or u.shape[0] < 1:
        raise DimensionError(f"u must have shape (T+1, {sys.m})")
    steps = u.shape[0]
    x = np.empty((steps, sys.n))
    x[0] = x0
    for t in range(steps - 1):
        x[t + 1] = sys.A @ x[t] + sys.B @ u[t]
    y = x @ sys.C.T + u @ sys.D.T
    return Trajectory(x, u.copy(), y)


def _interval_image(M: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Bounds of ``M @ v`` over ``lo <= v <= hi``; zero entries ignore infinite bounds."""
    pos, neg = M > 0, M < 0
    with np.errstate(invalid="ignore"):
        low = np.where(pos, M * lo, 0.0) + np.where(neg, M * hi, 0.0)
        high = np.where(pos, M * hi, 0.0) + np.where(neg, M * lo, 0.0)
    return low.sum(axis=1), high.sum(axis=1)


def output_boxes(sys: LinearSystem, x0, T: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Interval enclosures ``(lo, hi)`` of ``y[t]`` for ``t = 0..T``."""
    xl = xh = np.asarray(x0, dtype=float)
    ul, uh = sys.u_bounds[:, 0], sys.u_bounds[:, 1]
    yb, xb = np.asarray(sys.y_bounds, float), np.asarray(sys.x_bounds, float)
    boxes = []
    for _ in range(T + 1):
        a, b = _interval_image(sys.C, xl, xh)
        c, d = _interval_image(sys.D, ul, uh)
        boxes.append((np.maximum(a + c, yb[:, 0]), np.minimum(b + d, yb[:, 1])))
        a, b = _interval_image(sys.A, xl, xh)
        c, d = _interval_image(sys.B, ul, uh)
        xl, xh = np.maximum(a + c, xb[:, 0]), np.minimum(b + d, xb[:, 1])
    return boxes


def double_integrator() -> LinearSystem:
    """Planar double integrator: state ``(px, py, vx, vy)``, input ``(ax, ay)``.

    Positions live in ``[0, 15]``, speeds in ``[-1, 1]`` and accelerations in
    ``[-0.5, 0.5]``; the output is the position.
    """
    I, Z = np.eye(2), np.zeros((2, 2))
    A = np.block([[I, I], [Z, I]])
    B = np.vstack([Z, I])
    C = np.hstack([I, Z])
    D = Z
    x_bounds = [[0, 15], [0, 15], [-1, 1], [-1, 1]]
    u_bounds = [[-0.5, 0.5], [-0.5, 0.5]]
    y_bounds = [[0, 15], [0, 15]]
    return LinearSystem(A, B, C, D, x_bounds, u_bounds, y_bounds)
