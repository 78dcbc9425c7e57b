"""Mixed-integer encodings of STL synthesis problems.

Two encodings share the dynamics block and the leaf big-M rows:

``proposed``
    Continuous satisfaction variable per tree node, conjunction through
    ``z <= z_child`` rows, and each disjunction as an SOS1 vector
    ``[1 - z, z_1, ..., z_N]`` encoded with ``ceil(log2(N + 1))`` binaries.

``standard``
    One binary per leaf of the expanded tree, continuous internal nodes,
    conjunction as ``z <= z_child`` and disjunction as ``z <= sum(z_child)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .formula import AND, Formula, Predicate, STLTree, build_tree, flatten, horizon
from .model import EQ, LE, MilpModel
from .system import LinearSystem, output_boxes

PROPOSED = "proposed"
STANDARD = "standard"


class HorizonError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    """Big-M constant, robustness cap, flattening switch and encoding choice.

    ``M`` and ``rho_max`` default to values derived from the output bounds
    (see :func:`derive_big_M`).
    """

    M: float | None = None
    rho_max: float | None = None
    flatten: bool = False
    encoding: str = PROPOSED
    # "global": one M for every leaf row; "reach": per-leaf constants from
    # the outputs reachable at the leaf's timestep (never larger than M)
    leaf_M: str = "global"

    def __post_init__(self):
        if self.encoding not in (PROPOSED, STANDARD):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.leaf_M not in ("global", "reach"):
            raise ValueError(f"unknown leaf_M rule {self.leaf_M!r}")
        if self.M is not None and not self.M > 0:
            raise ValueError("M must be positive")
        if self.rho_max is not None and self.rho_max < 0:
            raise ValueError("rho_max must be non-negative")
        if self.M is not None and self.rho_max is not None and self.rho_max > self.M:
            raise ValueError("rho_max must not exceed M")


@dataclass(frozen=True)
class EncodingStats:
    binary_count: int
    continuous_count: int
    constraint_count: int
    # (or-node id, child count, binaries) per disjunction; empty for standard
    or_binaries: tuple[tuple[int, int, int], ...] = ()
    M: float = 0.0
    rho_max: float = 0.0

    def to_json(self) -> dict:
        return {
            "binary": self.binary_count,
            "continuous": self.continuous_count,
            "constraints": self.constraint_count,
        }


def stats_of(model: MilpModel, or_binaries=(), M=0.0, rho_max=0.0) -> EncodingStats:
    return EncodingStats(model.binary_count(), model.continuous_count(),
                         model.constraint_count(), tuple(or_binaries), float(M), float(rho_max))


# ---------------------------------------------------------------------------
# dynamics


def encode_dynamics(sys: LinearSystem, x0, T: int, model: MilpModel) -> dict[str, np.ndarray]:
    """Add ``x``, ``u``, ``y`` for timesteps ``0..T`` with dynamics and output rows.

    Returns integer arrays of variable ids with shapes ``(T+1, n)``,
    ``(T+1, m)`` and ``(T+1, p)``.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (sys.n,):
        raise ValueError(f"x0 must have length {sys.n}")
    xs = np.empty((T + 1, sys.n), dtype=np.intp)
    us = np.empty((T + 1, sys.m), dtype=np.intp)
    ys = np.empty((T + 1, sys.p), dtype=np.intp)
    for t in range(T + 1):
        for i in range(sys.n):
            xs[t, i] = model.add_var(f"x_{t}_{i}", *sys.x_bounds[i], role="state")
        for i in range(sys.m):
            us[t, i] = model.add_var(f"u_{t}_{i}", *sys.u_bounds[i], role="input")
        for i in range(sys.p):
            ys[t, i] = model.add_var(f"y_{t}_{i}", *sys.y_bounds[i], role="output")
    for i in range(sys.n):
        model.add_constraint({xs[0, i]: 1.0}, EQ, x0[i], f"init_{i}")
    for t in range(T):
        for i in range(sys.n):
            row = {xs[t + 1, i]: 1.0}
            for j in range(sys.n):
                if sys.A[i, j]:
                    row[xs[t, j]] = row.get(xs[t, j], 0.0) - sys.A[i, j]
            for j in range(sys.m):
                if sys.B[i, j]:
                    row[us[t, j]] = -sys.B[i, j]
            model.add_constraint(row, EQ, 0.0, f"dyn_{t}_{i}")
    for t in range(T + 1):
        for i in range(sys.p):
            row = {ys[t, i]: 1.0}
            for j in range(sys.n):
                if sys.C[i, j]:
                    row[xs[t, j]] = -sys.C[i, j]
            for j in range(sys.m):
                if sys.D[i, j]:
                    row[us[t, j]] = -sys.D[i, j]
            model.add_constraint(row, EQ, 0.0, f"out_{t}_{i}")
    return {"x": xs, "u": us, "y": ys}


# ---------------------------------------------------------------------------
# big-M


def _max_abs_g(pred: Predicate, y_bounds: np.ndarray) -> float:
    lo = hi = -pred.b
    for a, (l, u) in zip(pred.a, y_bounds):
        if a == 0.0:
            continue
        lo += min(a * l, a * u)
        hi += max(a * l, a * u)
    return max(abs(lo), abs(hi))


def derive_big_M(sys: LinearSystem, predicates: Sequence[Predicate],
                 rho_max: float | None = None) -> float:
    """``rho_max`` plus the largest ``|a . y - b|`` over the output box.

    With ``rho_max=None`` the margin term alone is returned, which is the
    default robustness cap.
    """
    yb = np.asarray(sys.y_bounds)
    if not np.all(np.isfinite(yb)):
        raise ValueError("big-M derivation needs finite output bounds")
    margin = max((_max_abs_g(p, yb) for p in predicates), default=0.0)
    return margin + (rho_max or 0.0)


def _resolve_M(cfg: EncoderConfig, sys, preds) -> tuple[float, float]:
    rho_max = cfg.rho_max
    if rho_max is None:
        rho_max = derive_big_M(sys, preds)
        if rho_max == 0.0:
            rho_max = 1.0
    M = cfg.M if cfg.M is not None else derive_big_M(sys, preds, rho_max)
    if rho_max > M:
        raise ValueError("rho_max must not exceed M")
    return M, rho_max


# ---------------------------------------------------------------------------
# SOS1

# an SOS1 entry is either a variable id or an affine expression ({id: coef}, constant)
Entry = Union[int, tuple[dict, float]]


def _affine(e: Entry) -> tuple[dict, float]:
    if isinstance(e, tuple):
        return dict(e[0]), float(e[1])
    return {int(e): 1.0}, 0.0


def encode_sos1_log(model: MilpModel, lambdas: Sequence[Entry], prefix: str = "sos") -> list[int]:
    """Constrain ``lambdas`` to be SOS1 using ``ceil(log2 n)`` binaries.

    Entries must already be bounded to ``[0, 1]``.  The vector is padded with
    variables fixed at zero up to a power of two; index ``i`` (0-based) is
    coded by the bits of ``i`` and selector ``k`` carries bit ``k``.
    """
    n = len(lambdas)
    if n == 0:
        raise ValueError("SOS1 set must be non-empty")
    entries = [_affine(e) for e in lambdas]
    k_bits = math.ceil(math.log2(n)) if n > 1 else 0
    for i in range(n, 2 ** k_bits):
        pad = model.add_var(f"lam_{prefix}_{i}", 0.0, 0.0, role="sos1-pad")
        entries.append(({pad: 1.0}, 0.0))

    def linear_sum(indices):
        row: dict[int, float] = {}
        const = 0.0
        for i in indices:
            coeffs, c = entries[i]
            const += c
            for j, a in coeffs.items():
                row[j] = row.get(j, 0.0) + a
        return row, const

    row, const = linear_sum(range(len(entries)))
    model.add_constraint(row, EQ, 1.0 - const, f"sos_{prefix}_sum")
    zetas = []
    for k in range(k_bits):
        zeta = model.add_binary(f"zeta_{prefix}_{k}")
        zetas.append(zeta)
        ones = [i for i in range(len(entries)) if (i >> k) & 1]
        zeros = [i for i in range(len(entries)) if not (i >> k) & 1]
        row, const = linear_sum(ones)
        row[zeta] = row.get(zeta, 0.0) - 1.0
        model.add_constraint(row, LE, -const, f"sos_{prefix}_p{k}")
        row, const = linear_sum(zeros)
        row[zeta] = row.get(zeta, 0.0) + 1.0
        model.add_constraint(row, LE, 1.0 - const, f"sos_{prefix}_n{k}")
    return zetas


# ---------------------------------------------------------------------------
# shared pieces


def _tree_predicates(tree: STLTree) -> list[Predicate]:
    seen: dict[Predicate, None] = {}
    for n in tree.walk():
        if n.is_leaf:
            seen.setdefault(n.leaf[0], None)
    return list(seen)


def _set_objective(model: MilpModel, rho: int, dyn: dict, Q, R):
    quad: dict[int, float] = {}
    for ids, diag in ((dyn["x"], Q), (dyn["u"], R)):
        if diag is None:
            continue
        diag = np.broadcast_to(np.asarray(diag, dtype=float), (ids.shape[1],))
        if np.any(diag < 0):
            raise ValueError("Q and R diagonals must be non-negative")
        for t in range(ids.shape[0]):
            for i, q in enumerate(diag):
                if q:
                    quad[int(ids[t, i])] = q
    model.set_objective({rho: -1.0}, quad)


def leaf_constants(cfg: EncoderConfig, sys: LinearSystem, x0, T: int, M: float,
                   rho_max: float):
    """Function ``(pred, t) -> M`` for leaf rows under ``cfg.leaf_M``.

    With ``"reach"`` the constant is ``rho_max`` plus the largest value of
    ``a . y - b`` over the interval enclosure of ``y[t]``, which is all a
    leaf row needs to be slack when its ``z`` is 0.
    """
    if cfg.leaf_M == "global":
        return lambda pred, t: M
    boxes = output_boxes(sys, x0, T)

    def rule(pred, t):
        lo, hi = boxes[t]
        top = -pred.b
        for a, l, h in zip(pred.a, lo, hi):
            if a:
                top += max(a * l, a * h)
        return float(min(M, max(0.0, rho_max + top)))

    return rule


def _leaf_row(model, pred: Predicate, t: int, z: int, rho: int, ys: np.ndarray, M: float,
              name: str):
    # rho <= -(a.y - b) + M (1 - z)
    row = {rho: 1.0, z: M}
    for k, a in enumerate(pred.a):
        if a:
            row[int(ys[t, k])] = row.get(int(ys[t, k]), 0.0) + a
    model.add_constraint(row, LE, pred.b + M, name)


def _start(formula, sys, x0, T, cfg, tree):
    if tree.max_time() > T:
        raise HorizonError(f"tree references timestep {tree.max_time()} but T={T}")
    for pred in _tree_predicates(tree):
        if pred.dim != sys.p:
            raise ValueError(f"predicate dimension {pred.dim} != output dimension {sys.p}")
    M, rho_max = _resolve_M(cfg, sys, _tree_predicates(tree))
    model = MilpModel()
    dyn = encode_dynamics(sys, x0, T, model)
    rho = model.add_var("rho", 0.0, rho_max, role="robustness")
    model.meta.update(formula=formula, system=sys, x0=np.asarray(x0, dtype=float),
                      horizon=T, tree=tree, encoding=cfg.encoding, M=M, rho_max=rho_max,
                      dynamics=dyn)
    return model, dyn, rho, M, rho_max


# ---------------------------------------------------------------------------
# encodings


def encode_proposed(tree: STLTree, sys: LinearSystem, x0, T: int,
                    cfg: EncoderConfig = EncoderConfig(), Q=None, R=None,
                    formula: Formula | None = None) -> tuple[MilpModel, EncodingStats]:
    """Logarithmic-disjunction encoding of an already-built STL tree."""
    if cfg.flatten:
        tree = flatten(tree)
    model, dyn, rho, M, rho_max = _start(formula, sys, x0, T, cfg, tree)
    ys = dyn["y"]
    leaf_M = leaf_constants(cfg, sys, x0, T, M, rho_max)
    zid: dict[int, int] = {}
    for node in tree.walk():
        zid[node.node_id] = model.add_var(f"z_{node.node_id}", 0.0, 1.0, role="sat")
    or_bins = []
    bits: dict[int, list[int]] = {}
    for node in tree.walk():
        z = zid[node.node_id]
        if node.is_leaf:
            pred, t = node.leaf
            _leaf_row(model, pred, t, z, rho, ys, leaf_M(pred, t), f"leaf_{node.node_id}")
        elif node.combination == AND:
            for k, child in enumerate(node.children):
                model.add_constraint({z: 1.0, zid[child.node_id]: -1.0}, LE, 0.0,
                                     f"and_{node.node_id}_{k}")
        else:
            lambdas = [({z: -1.0}, 1.0)] + [zid[c.node_id] for c in node.children]
            zetas = encode_sos1_log(model, lambdas, str(node.node_id))
            or_bins.append((node.node_id, len(node.children), len(zetas)))
            bits[node.node_id] = zetas
    model.add_constraint({zid[tree.node_id]: 1.0}, EQ, 1.0, "root")
    _set_objective(model, rho, dyn, Q, R)
    model.meta["z"] = zid
    model.meta["or_bits"] = bits
    return model, stats_of(model, or_bins, M, rho_max)


def encode_standard(f: Formula, sys: LinearSystem, x0, T: int,
                    cfg: EncoderConfig = EncoderConfig(encoding=STANDARD), Q=None, R=None,
                    ) -> tuple[MilpModel, EncodingStats]:
    """Baseline encoding: a binary for every predicate occurrence at every timestep.

    Each leaf of the expanded tree gets its own binary, so a predicate that
    appears in several subformulas (or in several until windows) at the same
    timestep is counted once per occurrence.
    """
    tree = build_tree(f, 0)
    if cfg.flatten:
        tree = flatten(tree)
    model, dyn, rho, M, rho_max = _start(f, sys, x0, T, cfg, tree)
    ys = dyn["y"]
    leaf_M = leaf_constants(cfg, sys, x0, T, M, rho_max)
    zid: dict[int, int] = {}
    for node in tree.walk():
        name = f"z_{node.node_id}"
        if node.is_leaf:
            pred, t = node.leaf
            zid[node.node_id] = model.add_binary(name, role="sat")
            _leaf_row(model, pred, t, zid[node.node_id], rho, ys, leaf_M(pred, t),
                      f"leaf_{node.node_id}")
        else:
            zid[node.node_id] = model.add_var(name, 0.0, 1.0, role="sat")
    for node in tree.walk():
        if node.is_leaf:
            continue
        z = zid[node.node_id]
        if node.combination == AND:
            for k, child in enumerate(node.children):
                model.add_constraint({z: 1.0, zid[child.node_id]: -1.0}, LE, 0.0,
                                     f"and_{node.node_id}_{k}")
        else:
            row = {z: 1.0}
            for child in node.children:
                cz = zid[child.node_id]
                row[cz] = row.get(cz, 0.0) - 1.0
            model.add_constraint(row, LE, 0.0, f"or_{node.node_id}")
    model.add_constraint({zid[tree.node_id]: 1.0}, EQ, 1.0, "root")
    _set_objective(model, rho, dyn, Q, R)
    model.meta["z"] = zid
    return model, stats_of(model, (), M, rho_max)


def encode(f: Formula, sys: LinearSystem, x0, T: int, cfg: EncoderConfig = EncoderConfig(),
           Q=None, R=None) -> tuple[MilpModel, EncodingStats]:
    """Encode ``f`` with the encoding selected by ``cfg``."""
    if horizon(f) > T:
        raise HorizonError(f"formula horizon {horizon(f)} exceeds T={T}")
    if cfg.encoding == STANDARD:
        return encode_standard(f, sys, x0, T, cfg, Q, R)
    return encode_proposed(build_tree(f, 0), sys, x0, T, cfg, Q, R, formula=f)
