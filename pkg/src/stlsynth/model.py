"""Solver-agnostic mixed-integer linear model."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

LE = "<="
EQ = "="

ROLES = ("state", "input", "output", "sat", "robustness", "sos1-selector", "sos1-pad", "aux")


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float
    upper: float
    binary: bool = False
    role: str = "aux"


@dataclass(frozen=True)
class Constraint:
    """``sum(coef * var) <sense> rhs`` with ``coeffs`` sorted by variable id."""

    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str


@dataclass
class LpData:
    """Dense arrays of a model: ``A x (<= | =) b``, ``lo <= x <= hi``, minimise ``c x``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    is_eq: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    binaries: np.ndarray
    offset: float = 0.0


class MilpModel:
    """Continuous and binary variables, linear rows, linear + diagonal quadratic cost.

    Variables are addressed by integer id (declaration order); names must be
    unique.  The ``meta`` dict carries whatever the encoder wants to hand to the
    post-solve verification (formula, system, horizon, ...).
    """

    def __init__(self):
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.quadratic: dict[int, float] = {}
        self.objective_constant = 0.0
        self.meta: dict[str, Any] = {}
        self._ids: dict[str, int] = {}
        self._row_names: set[str] = set()

    # -- building
    def add_var(self, name: str, lower: float = 0.0, upper: float = np.inf,
                role: str = "aux") -> int:
        return self._add(Variable(name, float(lower), float(upper), False, role))

    def add_binary(self, name: str, role: str = "sos1-selector") -> int:
        return self._add(Variable(name, 0.0, 1.0, True, role))

    def _add(self, v: Variable) -> int:
        if v.name in self._ids:
            raise ValueError(f"duplicate variable name {v.name!r}")
        if not v.lower <= v.upper:
            raise ValueError(f"variable {v.name!r}: lower bound exceeds upper bound")
        if v.lower == np.inf or v.upper == -np.inf:
            raise ValueError(f"variable {v.name!r}: bounds leave no finite value")
        if v.role not in ROLES:
            raise ValueError(f"unknown role {v.role!r}")
        self._ids[v.name] = len(self.variables)
        self.variables.append(v)
        return len(self.variables) - 1

    def add_constraint(self, coeffs: Mapping[int, float], sense: str, rhs: float,
                       name: str | None = None) -> int:
        """Add a row; ``>=`` rows are stored negated as ``<=``."""
        if sense not in (LE, EQ, ">="):
            raise ValueError(f"bad sense {sense!r}")
        merged: dict[int, float] = {}
        for j, a in coeffs.items():
            if not 0 <= j < len(self.variables):
                raise KeyError(f"constraint references undeclared variable {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        rhs = float(rhs)
        if sense == ">=":
            merged = {j: -a for j, a in merged.items()}
            rhs, sense = -rhs, LE
        name = name or f"c{len(self.constraints)}"
        if name in self._row_names:
            raise ValueError(f"duplicate constraint name {name!r}")
        self._row_names.add(name)
        row = tuple(sorted((j, a) for j, a in merged.items() if a != 0.0))
        self.constraints.append(Constraint(row, sense, rhs, name))
        return len(self.constraints) - 1

    def set_objective(self, linear: Mapping[int, float] | None = None,
                      quadratic: Mapping[int, float] | None = None, constant: float = 0.0):
        self.objective = {j: float(a) for j, a in (linear or {}).items() if a != 0.0}
        self.quadratic = {j: float(a) for j, a in (quadratic or {}).items() if a != 0.0}
        self.objective_constant = float(constant)
        for j in list(self.objective) + list(self.quadratic):
            if not 0 <= j < len(self.variables):
                raise KeyError(f"objective references undeclared variable {j}")

    # -- queries
    def var(self, name: str) -> int:
        return self._ids[name]

    def has_var(self, name: str) -> bool:
        return name in self._ids

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def binary_ids(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.binary]

    def binary_count(self) -> int:
        return sum(1 for v in self.variables if v.binary)

    def continuous_count(self) -> int:
        return len(self.variables) - self.binary_count()

    def constraint_count(self) -> int:
        return len(self.constraints)

    def is_linear(self) -> bool:
        return not self.quadratic

    def objective_value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        val = self.objective_constant
        val += sum(a * x[j] for j, a in self.objective.items())
        val += sum(q * x[j] ** 2 for j, q in self.quadratic.items())
        return float(val)

    def violations(self, x, tol: float = 1e-8) -> list[tuple[str, float]]:
        """Rows violated by more than ``tol`` as ``(name, amount)`` pairs."""
        x = np.asarray(x, dtype=float)
        out = []
        for con in self.constraints:
            act = sum(a * x[j] for j, a in con.coeffs)
            viol = act - con.rhs if con.sense == LE else abs(act - con.rhs)
            if viol > tol:
                out.append((con.name, float(viol)))
        return out

    def bound_violations(self, x, tol: float = 1e-9) -> list[tuple[str, float]]:
        x = np.asarray(x, dtype=float)
        out = []
        for v, val in zip(self.variables, x):
            viol = max(v.lower - val, val - v.upper, 0.0)
            if viol > tol:
                out.append((v.name, float(viol)))
        return out

    def dense(self) -> LpData:
        if self.quadratic:
            raise ValueError("dense LP data requires a linear objective")
        n, m = len(self.variables), len(self.constraints)
        A = np.zeros((m, n))
        b = np.empty(m)
        is_eq = np.zeros(m, dtype=bool)
        for i, con in enumerate(self.constraints):
            for j, a in con.coeffs:
                A[i, j] = a
            b[i] = con.rhs
            is_eq[i] = con.sense == EQ
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] = a
        lo = np.array([v.lower for v in self.variables], dtype=float)
        hi = np.array([v.upper for v in self.variables], dtype=float)
        bins = np.array(self.binary_ids(), dtype=np.intp)
        return LpData(c, A, b, is_eq, lo, hi, bins, self.objective_constant)

    def __repr__(self):
        return (f"MilpModel({self.num_vars} vars, {self.binary_count()} binary, "
                f"{self.constraint_count()} rows)")
