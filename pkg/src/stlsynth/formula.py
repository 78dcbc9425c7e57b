"""STL formulas, the expanded STL tree, and quantitative robustness.

Formulas are immutable values in positive normal form: negation only exists at
the predicate level (see :meth:`Predicate.negate`).  Temporal intervals are
integer timesteps.

The tree produced by :func:`build_tree` expands every temporal operator over
its window, so each leaf is a predicate pinned to an absolute timestep and each
internal node is a plain conjunction or disjunction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

AND = "and"
OR = "or"


class SignalTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class Predicate:
    """Affine predicate ``a . y - b <= 0``.

    The name is a label only; two predicates with the same coefficients compare
    equal.
    """

    a: tuple[float, ...]
    b: float
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return len(self.a)

    def g(self, y) -> float:
        """Value of ``a . y - b`` at one output sample."""
        return math.fsum(ai * float(yi) for ai, yi in zip(self.a, y)) - self.b

    def negate(self) -> "Predicate":
        # The boundary g = 0 satisfies both the predicate and its negation.
        name = self.name[1:] if self.name.startswith("!") else "!" + self.name
        return Predicate(tuple(-v for v in self.a), -self.b, name if self.name else "")


class Formula:
    """Base class of the STL syntax tree."""

    __slots__ = ()

    def horizon(self) -> int:
        return horizon(self)

    def __and__(self, other: "Formula") -> "And":
        return And((self, other))

    def __or__(self, other: "Formula") -> "Or":
        return Or((self, other))


def _check_interval(t1, t2):
    if not (isinstance(t1, (int, np.integer)) and isinstance(t2, (int, np.integer))):
        raise TypeError("interval endpoints must be integers")
    if not 0 <= t1 <= t2:
        raise ValueError(f"invalid interval [{t1},{t2}]")


@dataclass(frozen=True)
class Pred(Formula):
    pred: Predicate


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("And needs at least one child")


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("Or needs at least one child")


@dataclass(frozen=True)
class Always(Formula):
    t1: int
    t2: int
    child: Formula

    def __post_init__(self):
        _check_interval(self.t1, self.t2)


@dataclass(frozen=True)
class Eventually(Formula):
    t1: int
    t2: int
    child: Formula

    def __post_init__(self):
        _check_interval(self.t1, self.t2)


@dataclass(frozen=True)
class Until(Formula):
    """``left U[t1,t2] right``: right holds at some t', left holds strictly before."""

    t1: int
    t2: int
    left: Formula
    right: Formula

    def __post_init__(self):
        _check_interval(self.t1, self.t2)


def horizon(f: Formula) -> int:
    """Number of timesteps after which satisfaction of ``f`` is fixed."""
    if isinstance(f, Pred):
        return 0
    if isinstance(f, (And, Or)):
        return max(horizon(c) for c in f.children)
    if isinstance(f, (Always, Eventually)):
        return f.t2 + horizon(f.child)
    if isinstance(f, Until):
        return f.t2 + max(horizon(f.left), horizon(f.right))
    raise TypeError(f"not a formula: {f!r}")


def predicates(f: Formula) -> list[Predicate]:
    """Distinct predicates of ``f`` in first-occurrence order."""
    seen: dict[Predicate, None] = {}

    def walk(g):
        if isinstance(g, Pred):
            seen.setdefault(g.pred, None)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c)
        elif isinstance(g, (Always, Eventually)):
            walk(g.child)
        elif isinstance(g, Until):
            walk(g.left)
            walk(g.right)

    walk(f)
    return list(seen)


# ---------------------------------------------------------------------------
# STL tree


@dataclass(frozen=True)
class STLTree:
    """Expanded formula: an And/Or node over subtrees, or a timed predicate leaf.

    ``node_id`` is a preorder index, unique within one tree; the encoders name
    the node's satisfaction variable after it.
    """

    combination: str | None
    children: tuple["STLTree", ...] = ()
    child_times: tuple[int, ...] = ()
    leaf: tuple[Predicate, int] | None = None
    node_id: int = 0

    def __post_init__(self):
        if (self.leaf is None) == (len(self.children) == 0):
            raise ValueError("a node is a leaf iff it has no children")
        if len(self.children) != len(self.child_times):
            raise ValueError("children and child_times differ in length")
        if self.leaf is None and self.combination not in (AND, OR):
            raise ValueError(f"bad combination {self.combination!r}")

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    def walk(self) -> Iterator["STLTree"]:
        """Preorder traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list["STLTree"]:
        return [n for n in self.walk() if n.is_leaf]

    def or_nodes(self) -> list["STLTree"]:
        return [n for n in self.walk() if n.combination == OR and not n.is_leaf]

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def max_time(self) -> int:
        return max(n.leaf[1] for n in self.walk() if n.is_leaf)


class _Node:
    # mutable scratch node used while building / flattening
    __slots__ = ("comb", "kids", "times", "leaf")

    def __init__(self, comb, kids=(), times=(), leaf=None):
        self.comb = comb
        self.kids = list(kids)
        self.times = list(times)
        self.leaf = leaf


def _expand(f: Formula, t0: int) -> _Node:
    if isinstance(f, Pred):
        return _Node(None, leaf=(f.pred, t0))
    if isinstance(f, (And, Or)):
        comb = AND if isinstance(f, And) else OR
        return _Node(comb, [_expand(c, t0) for c in f.children], [t0] * len(f.children))
    if isinstance(f, (Always, Eventually)):
        comb = AND if isinstance(f, Always) else OR
        ts = list(range(t0 + f.t1, t0 + f.t2 + 1))
        return _Node(comb, [_expand(f.child, t) for t in ts], ts)
    if isinstance(f, Until):
        kids, ts = [], []
        for tp in range(t0 + f.t1, t0 + f.t2 + 1):
            inner = [_expand(f.right, tp)] + [_expand(f.left, s) for s in range(t0, tp)]
            kids.append(_Node(AND, inner, [tp] + list(range(t0, tp))))
            ts.append(tp)
        return _Node(OR, kids, ts)
    raise TypeError(f"not a formula: {f!r}")


def _freeze(node: _Node) -> STLTree:
    counter = [0]

    def rec(n):
        nid = counter[0]
        counter[0] += 1
        if n.leaf is not None:
            return STLTree(None, leaf=n.leaf, node_id=nid)
        kids = tuple(rec(k) for k in n.kids)
        return STLTree(n.comb, kids, tuple(n.times), node_id=nid)

    return rec(node)


def _thaw(tree: STLTree) -> _Node:
    if tree.is_leaf:
        return _Node(None, leaf=tree.leaf)
    return _Node(tree.combination, [_thaw(c) for c in tree.children], tree.child_times)


def build_tree(f: Formula, t0: int = 0) -> STLTree:
    """Expand ``f`` evaluated at timestep ``t0`` into an :class:`STLTree`."""
    if t0 < 0:
        raise ValueError("t0 must be non-negative")
    return _freeze(_expand(f, t0))


def flatten(tree: STLTree) -> STLTree:
    """Splice every internal child that has its parent's combination type."""

    def rec(n: _Node) -> _Node:
        if n.leaf is not None:
            return n
        kids, times = [], []
        for k, t in zip(n.kids, n.times):
            k = rec(k)
            if k.leaf is None and k.comb == n.comb:
                kids.extend(k.kids)
                times.extend(k.times)
            else:
                kids.append(k)
                times.append(t)
        n.kids, n.times = kids, times
        return n

    return _freeze(rec(_thaw(tree)))


def count_disjunctions(tree: STLTree) -> list[int]:
    """Child counts of the Or-nodes of ``tree``, in preorder."""
    return [len(n.children) for n in tree.or_nodes()]


def log_binaries(n_children: int) -> int:
    """Binaries needed by the logarithmic encoding of one Or-node."""
    return math.ceil(math.log2(n_children + 1))


def predicted_binaries(tree: STLTree) -> int:
    return sum(log_binaries(n) for n in count_disjunctions(tree))


def leaf_count(tree: STLTree) -> int:
    return sum(1 for n in tree.walk() if n.is_leaf)


# ---------------------------------------------------------------------------
# robustness


Signal = Union[np.ndarray, Sequence[Sequence[float]]]


def _as_signal(y: Signal) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("signal must be a (T+1, p) array")
    return arr


def _rho(f: Formula, y: np.ndarray, t: int) -> float:
    if isinstance(f, Pred):
        return -f.pred.g(y[t])
    if isinstance(f, And):
        return min(_rho(c, y, t) for c in f.children)
    if isinstance(f, Or):
        return max(_rho(c, y, t) for c in f.children)
    if isinstance(f, Always):
        return min(_rho(f.child, y, t + k) for k in range(f.t1, f.t2 + 1))
    if isinstance(f, Eventually):
        return max(_rho(f.child, y, t + k) for k in range(f.t1, f.t2 + 1))
    if isinstance(f, Until):
        best = -math.inf
        for tp in range(t + f.t1, t + f.t2 + 1):
            val = _rho(f.right, y, tp)
            for s in range(t, tp):
                val = min(val, _rho(f.left, y, s))
            best = max(best, val)
        return best
    raise TypeError(f"not a formula: {f!r}")


def robustness(f: Formula, y: Signal, t: int = 0) -> float:
    """Exact quantitative robustness of ``f`` on signal ``y`` at timestep ``t``."""
    arr = _as_signal(y)
    if t < 0 or t + horizon(f) > arr.shape[0] - 1:
        raise SignalTooShortError(
            f"signal of length {arr.shape[0]} too short for horizon {horizon(f)} at t={t}"
        )
    return _rho(f, arr, t)


def is_satisfied(f: Formula, y: Signal, t: int = 0) -> bool:
    return robustness(f, y, t) >= 0.0


def tree_robustness(tree: STLTree, y: Signal) -> float:
    """Robustness computed through the expanded tree (leaves carry absolute times)."""
    arr = _as_signal(y)
    if tree.max_time() > arr.shape[0] - 1:
        raise SignalTooShortError("signal too short for tree")

    def rec(n: STLTree) -> float:
        if n.is_leaf:
            pred, t = n.leaf
            return -pred.g(arr[t])
        vals = [rec(c) for c in n.children]
        return min(vals) if n.combination == AND else max(vals)

    return rec(tree)


def node_robustness(tree: STLTree, y: Signal) -> dict[int, float]:
    """Robustness of every node of ``tree``, keyed by node id."""
    arr = _as_signal(y)
    out: dict[int, float] = {}

    def rec(n: STLTree) -> float:
        if n.is_leaf:
            pred, t = n.leaf
            v = -pred.g(arr[t])
        else:
            vals = [rec(c) for c in n.children]
            v = min(vals) if n.combination == AND else max(vals)
        out[n.node_id] = v
        return v

    rec(tree)
    return out
