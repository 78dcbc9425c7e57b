"""CPLEX LP text files for models, and ``name value`` files for solutions.

Output is deterministic: variables and rows appear in declaration order and
numbers are written with ``repr`` so that reading a file back reproduces
every coefficient exactly.  A small example pair ships as
``stlsynth/data/example.lp`` and ``example.sol``.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from ..encoder import EncodingStats
from ..model import EQ, LE, MilpModel
from .solve import SolveResult, result_from_values

TERMS_PER_LINE = 6


class SolutionFileError(ValueError):
    pass


class LpFormatError(ValueError):
    pass


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def _linear(terms) -> list[str]:
    out = []
    for name, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        out.append(f"{sign} {name}" if mag == 1.0 else f"{sign} {_num(mag)} {name}")
    return out


def _wrap(head: str, pieces: list[str], tail: str = "") -> list[str]:
    lines = []
    for k in range(0, max(len(pieces), 1), TERMS_PER_LINE):
        chunk = " ".join(pieces[k:k + TERMS_PER_LINE])
        lines.append((head if k == 0 else "   ") + chunk)
    if tail:
        lines[-1] = lines[-1] + tail
    return lines


def lp_text(model: MilpModel) -> str:
    names = [v.name for v in model.variables]
    lines = ["\\ stlsynth model", "Minimize"]
    obj = _linear((names[j], a) for j, a in sorted(model.objective.items()))
    if model.quadratic:
        # the bracketed block is halved by the format, so coefficients are doubled
        quad = _linear((f"{names[j]} ^2", 2.0 * q) for j, q in sorted(model.quadratic.items()))
        obj += ["+ ["] + quad + ["] / 2"]
    if model.objective_constant:
        c = model.objective_constant
        obj.append(f"{'-' if c < 0 else '+'} {_num(abs(c))}")
    lines += [ln.rstrip() for ln in _wrap(" obj: ", obj)]
    if model.constraints:
        lines.append("Subject To")
        for con in model.constraints:
            body = _linear((names[j], a) for j, a in con.coeffs) or ["0 " + names[0]]
            op = "<=" if con.sense == LE else "="
            lines += _wrap(f" {con.name}: ", body, f" {op} {_num(con.rhs)}")
    bounded = [v for v in model.variables if not v.binary]
    if bounded:
        lines.append("Bounds")
        for v in bounded:
            if v.lower == v.upper:
                lines.append(f" {v.name} = {_num(v.lower)}")
            elif v.lower == -math.inf and v.upper == math.inf:
                lines.append(f" {v.name} free")
            else:
                lines.append(f" {_num(v.lower)} <= {v.name} <= {_num(v.upper)}")
    binaries = [v.name for v in model.variables if v.binary]
    if binaries:
        lines.append("Binaries")
        lines += [f" {n}" for n in binaries]
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model: MilpModel, path) -> Path:
    """Write ``model`` in LP format; the same model always gives the same bytes."""
    path = Path(path)
    path.write_text(lp_text(model), encoding="ascii")
    return path


# ---------------------------------------------------------------------------
# reading LP files back

_SECTIONS = {
    "minimize": "obj", "subject to": "rows", "bounds": "bounds",
    "binaries": "bin", "end": "end",
}
_TERM = re.compile(r"([+-])\s*(?:([0-9.eE+-]+|inf)\s+)?([A-Za-z_][\w.]*)(\s*\^2)?")


def _parse_terms(text: str) -> list[tuple[str, float, bool]]:
    text = text.strip()
    if text and text[0] not in "+-":
        text = "+ " + text
    out = []
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise LpFormatError(f"cannot read term at {text[pos:pos + 20]!r}")
        sign, mag, name, sq = m.groups()
        coef = float(mag) if mag else 1.0
        out.append((name, -coef if sign == "-" else coef, bool(sq)))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return out


def _float(tok: str) -> float:
    return float(tok.replace("+inf", "inf"))


def read_lp(path) -> MilpModel:
    """Read an LP file in the subset written by :func:`export_lp`."""
    section = None
    statements: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "bin": []}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        key = line.strip().lower()
        if key in _SECTIONS and not raw.startswith(" "):
            section = _SECTIONS[key]
            continue
        if section is None or section == "end":
            raise LpFormatError(f"text outside a section: {raw!r}")
        if raw.startswith("   ") and statements[section]:
            statements[section][-1] += " " + line.strip()
        else:
            statements[section].append(line.strip())

    model = MilpModel()
    bounds: dict[str, tuple[float, float]] = {}
    for stmt in statements["bounds"]:
        parts = stmt.split()
        if len(parts) == 2 and parts[1] == "free":
            bounds[parts[0]] = (-math.inf, math.inf)
        elif len(parts) == 3 and parts[1] == "=":
            bounds[parts[0]] = (_float(parts[2]),) * 2
        elif len(parts) == 5 and parts[1] == parts[3] == "<=":
            bounds[parts[2]] = (_float(parts[0]), _float(parts[4]))
        else:
            raise LpFormatError(f"unsupported bound {stmt!r}")
    binaries = set(statements["bin"])
    # variables are declared in order of first appearance in bounds/binaries
    order = [*bounds]
    for stmt in statements["bin"]:
        if stmt not in bounds:
            order.append(stmt)
    for name in order:
        if name in binaries:
            model.add_binary(name)
        else:
            model.add_var(name, *bounds[name])

    def var(name):
        if not model.has_var(name):
            model.add_var(name)
        return model.var(name)

    linear, quad, const = {}, {}, 0.0
    if statements["obj"]:
        body = statements["obj"][0].split(":", 1)[1]
        m = re.search(r"\+\s*\[(.*)\]\s*/\s*2", body)
        if m:
            for name, coef, _ in _parse_terms(m.group(1)):
                quad[var(name)] = coef / 2.0
            body = body[:m.start()] + body[m.end():]
        cm = re.search(r"([+-])\s*([0-9.eE+-]+)\s*$", body)
        if cm and not re.search(r"[A-Za-z_]", cm.group(2)):
            const = float(cm.group(2)) * (-1 if cm.group(1) == "-" else 1)
            body = body[:cm.start()]
        for name, coef, _ in _parse_terms(body):
            linear[var(name)] = linear.get(var(name), 0.0) + coef
    for stmt in statements["rows"]:
        name, body = stmt.split(":", 1)
        m = re.match(r"(.*?)\s*(<=|>=|=)\s*(\S+)$", body)
        if not m:
            raise LpFormatError(f"cannot read row {stmt!r}")
        lhs, op, rhs = m.groups()
        coeffs: dict[int, float] = {}
        for vname, coef, _ in _parse_terms(lhs):
            coeffs[var(vname)] = coeffs.get(var(vname), 0.0) + coef
        model.add_constraint(coeffs, {"<=": LE, "=": EQ, ">=": ">="}[op], _float(rhs),
                             name.strip())
    model.set_objective(linear, quad, const)
    return model


# ---------------------------------------------------------------------------
# solution files


def write_solution(model: MilpModel, x, path, status: str | None = None) -> Path:
    """Write ``name value`` lines for every variable of ``model``."""
    x = np.asarray(x, dtype=float)
    lines = ["# stlsynth solution"]
    if status:
        lines.append(f"# status {status}")
    lines += [f"{v.name} {_num(val)}" for v, val in zip(model.variables, x)]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_solution(model: MilpModel, path) -> np.ndarray:
    values = np.full(model.num_vars, np.nan)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionFileError(f"line {lineno}: expected 'name value', got {raw!r}")
        name, val = parts
        if not model.has_var(name):
            raise SolutionFileError(f"line {lineno}: unknown variable {name!r}")
        try:
            values[model.var(name)] = _float(val)
        except ValueError:
            raise SolutionFileError(f"line {lineno}: bad value {val!r}") from None
    missing = [model.variables[j].name for j in np.flatnonzero(np.isnan(values))]
    if missing:
        raise SolutionFileError(f"no value for {len(missing)} variables, e.g. {missing[0]!r}")
    return values


def import_solution(model: MilpModel, path, stats: EncodingStats | None = None) -> SolveResult:
    """Load a solution file for ``model`` and run the full verification."""
    return result_from_values(model, read_solution(model, path), stats)
