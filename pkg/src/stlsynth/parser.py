"""Recursive-descent parser for the textual STL specification language.

Grammar (ASCII only), loosest binding first::

    phi       := orexpr
    orexpr    := andexpr { "|" andexpr }
    andexpr   := untilexpr { "&" untilexpr }
    untilexpr := unary [ "U[" int "," int "]" unary ]
    unary     := "G[" int "," int "]" unary | "F[" int "," int "]" unary
               | "!" unary | "(" phi ")" | atom
    atom      := "in(" ident ")" | "out(" ident ")" | linatom
    linatom   := linexpr ("<=" | ">=") number
    linexpr   := ["+"|"-"] term { ("+"|"-") term }
    term      := [number "*"] yK

Output variables are named ``y1 .. yp``.  Negation is pushed into predicates
while parsing, so every result is in positive normal form.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .formula import (
    Always,
    And,
    Eventually,
    Formula,
    Or,
    Pred,
    Predicate,
    Until,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)


class UnknownRegionError(ParseError):
    pass


class NegationError(ParseError):
    pass


class IntervalError(ParseError):
    pass


@dataclass(frozen=True)
class RegionDef:
    """Axis-aligned box given as one ``(lo, hi)`` interval per output axis."""

    name: str
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        for lo, hi in b:
            if not lo < hi:
                raise ValueError(f"region {self.name!r}: empty interval [{lo}, {hi}]")

    @classmethod
    def box(cls, name, xmin, xmax, ymin, ymax) -> "RegionDef":
        return cls(name, ((xmin, xmax), (ymin, ymax)))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def faces(self) -> list[Predicate]:
        """Half-spaces whose conjunction is the box (lower face, upper face per axis)."""
        out = []
        p = self.dim
        for k, (lo, hi) in enumerate(self.bounds):
            e = [0.0] * p
            e[k] = -1.0
            out.append(Predicate(tuple(e), -lo, f"{self.name}.y{k + 1}>={lo:g}"))
            e = [0.0] * p
            e[k] = 1.0
            out.append(Predicate(tuple(e), hi, f"{self.name}.y{k + 1}<={hi:g}"))
        return out

    def inside(self) -> Formula:
        return And(tuple(Pred(f) for f in self.faces()))

    def outside(self) -> Formula:
        return Or(tuple(Pred(f.negate()) for f in self.faces()))

    def to_json(self) -> dict:
        if self.dim == 2:
            (x0, x1), (y0, y1) = self.bounds
            return {"name": self.name, "xmin": x0, "xmax": x1, "ymin": y0, "ymax": y1}
        return {"name": self.name, "bounds": [list(b) for b in self.bounds]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "RegionDef":
        if "bounds" in obj:
            return cls(obj["name"], tuple(tuple(b) for b in obj["bounds"]))
        return cls.box(obj["name"], obj["xmin"], obj["xmax"], obj["ymin"], obj["ymax"])


def load_regions(path) -> dict[str, RegionDef]:
    """Read a region file ``{"regions": [{"name", "xmin", ...}, ...]}``."""
    data = json.loads(Path(path).read_text())
    return regions_from_json(data)


def regions_from_json(data) -> dict[str, RegionDef]:
    items = data["regions"] if isinstance(data, Mapping) else data
    out: dict[str, RegionDef] = {}
    for obj in items:
        r = RegionDef.from_json(obj)
        if r.name in out:
            raise ValueError(f"duplicate region {r.name!r}")
        out[r.name] = r
    return out


@dataclass(frozen=True)
class SpecSource:
    text: str
    regions: Mapping[str, RegionDef]


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<temporal>[GFU]\[)
  | (?P<region>(?:in|out)\()
  | (?P<cmp><=|>=)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[()\[\],&|!+\-*])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        else:
            kind = m.group() if kind == "op" else kind
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser


@dataclass(frozen=True)
class _RegionAtom:
    # in(R) / out(R) kept unexpanded so that "!" can swap them
    inside: bool
    region: RegionDef

    def expand(self) -> Formula:
        return self.region.inside() if self.inside else self.region.outside()


_VAR_RE = re.compile(r"y([1-9][0-9]*)$")


class _Parser:
    def __init__(self, text: str, regions: Mapping[str, RegionDef], dim: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.regions = regions
        if dim is None:
            dims = {r.dim for r in regions.values()}
            dim = dims.pop() if len(dims) == 1 else 2
        self.dim = dim

    # -- helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        return self.advance()

    def formula(self, node) -> Formula:
        return node.expand() if isinstance(node, _RegionAtom) else node

    # -- grammar
    def parse(self) -> Formula:
        node = self.orexpr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return self.formula(node)

    def orexpr(self):
        first = self.andexpr()
        if self.tok.kind != "|":
            return first
        kids = [self.formula(first)]
        while self.tok.kind == "|":
            self.advance()
            kids.append(self.formula(self.andexpr()))
        return Or(tuple(kids))

    def andexpr(self):
        first = self.untilexpr()
        if self.tok.kind != "&":
            return first
        kids = [self.formula(first)]
        while self.tok.kind == "&":
            self.advance()
            kids.append(self.formula(self.untilexpr()))
        return And(tuple(kids))

    def untilexpr(self):
        left = self.unary()
        if self.tok.kind == "temporal" and self.tok.text == "U[":
            self.advance()
            t1, t2 = self.interval()
            right = self.unary()
            return Until(t1, t2, self.formula(left), self.formula(right))
        return left

    def interval(self) -> tuple[int, int]:
        start = self.tok
        t1 = self.integer()
        self.expect(",")
        t2 = self.integer()
        self.expect("]")
        if t1 > t2:
            raise self.error(f"malformed interval [{t1},{t2}]", start, IntervalError)
        return t1, t2

    def integer(self) -> int:
        neg = False
        if self.tok.kind == "-":
            neg = True
            start = self.advance()
        else:
            start = self.tok
        tok = self.expect("num")
        if not tok.text.isdigit():
            raise self.error("interval endpoints must be integers", tok, IntervalError)
        if neg:
            raise self.error("interval endpoints must be non-negative", start, IntervalError)
        return int(tok.text)

    def unary(self):
        tok = self.tok
        if tok.kind == "temporal" and tok.text in ("G[", "F["):
            self.advance()
            t1, t2 = self.interval()
            child = self.formula(self.unary())
            return (Always if tok.text == "G[" else Eventually)(t1, t2, child)
        if tok.kind == "!":
            self.advance()
            inner = self.unary()
            if isinstance(inner, _RegionAtom):
                return _RegionAtom(not inner.inside, inner.region)
            if isinstance(inner, Pred):
                return Pred(inner.pred.negate())
            raise self.error("negation can only be applied to predicates", tok, NegationError)
        if tok.kind == "(":
            self.advance()
            node = self.orexpr()
            self.expect(")")
            return node
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "region":
            self.advance()
            name_tok = self.expect("ident")
            self.expect(")")
            region = self.regions.get(name_tok.text)
            if region is None:
                raise self.error(
                    f"unknown region {name_tok.text!r}", name_tok, UnknownRegionError
                )
            return _RegionAtom(tok.text == "in(", region)
        return Pred(self.linatom())

    def number(self) -> float:
        sign = 1.0
        while self.tok.kind in ("+", "-"):
            if self.advance().kind == "-":
                sign = -sign
        return sign * float(self.expect("num").text)

    def linatom(self) -> Predicate:
        start = self.tok
        coeffs = [0.0] * self.dim
        seen_term = False
        sign = 1.0
        while True:
            while self.tok.kind in ("+", "-"):
                if self.advance().kind == "-":
                    sign = -sign
            coef = 1.0
            if self.tok.kind == "num":
                coef = float(self.advance().text)
                if self.tok.kind != "*":
                    raise self.error("constant terms must appear on the right-hand side")
                self.advance()
            if self.tok.kind != "ident":
                raise self.error("expected an output variable y1..yp")
            var = self.advance()
            m = _VAR_RE.match(var.text)
            if m is None:
                raise self.error(f"unknown identifier {var.text!r}", var)
            k = int(m.group(1))
            if k > self.dim:
                raise self.error(f"{var.text} exceeds output dimension {self.dim}", var)
            if self.tok.kind == "*":
                raise self.error("non-linear expression", self.tok)
            coeffs[k - 1] += sign * coef
            seen_term = True
            if self.tok.kind in ("+", "-"):
                sign = 1.0
                continue
            break
        if not seen_term:
            raise self.error("empty linear expression", start)
        if self.tok.kind != "cmp":
            raise self.error("expected '<=' or '>='")
        cmp = self.advance().text
        rhs = self.number()
        name = _linatom_text(coeffs, rhs, cmp)
        if cmp == "<=":
            return Predicate(tuple(coeffs), rhs, name)
        return Predicate(tuple(-c for c in coeffs), -rhs, name)


def _linatom_text(coeffs, rhs, cmp) -> str:
    terms = " + ".join(f"{c:g}*y{k + 1}" for k, c in enumerate(coeffs) if c != 0.0) or "0*y1"
    return f"{terms} {cmp} {rhs:g}"


def parse(src: SpecSource | str, regions: Mapping[str, RegionDef] | None = None,
          dim: int | None = None) -> Formula:
    """Parse specification text into a positive-normal-form :class:`Formula`."""
    if isinstance(src, SpecSource):
        text, regions = src.text, src.regions
    else:
        text = src
    return _Parser(text, regions or {}, dim).parse()


def parse_linear_atom(text: str, dim: int = 2) -> Predicate:
    """Parse ``<linexpr> <= c`` or ``<linexpr> >= c`` into ``a . y - b <= 0`` form."""
    p = _Parser(text, {}, dim)
    pred = p.linatom()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return pred


# ---------------------------------------------------------------------------
# printing


def _num(v: float) -> str:
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def to_text(f: Formula) -> str:
    """Render ``f`` in the input grammar; parsing the result gives back ``f``."""
    if isinstance(f, Pred):
        a, b = f.pred.a, f.pred.b
        terms = [f"{_num(c)}*y{k + 1}" for k, c in enumerate(a)]
        return "(" + " + ".join(terms) + f" <= {_num(b)})"
    if isinstance(f, And):
        return "(" + " & ".join(to_text(c) for c in f.children) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(to_text(c) for c in f.children) + ")"
    if isinstance(f, Always):
        return f"G[{f.t1},{f.t2}] {to_text(f.child)}"
    if isinstance(f, Eventually):
        return f"F[{f.t1},{f.t2}] {to_text(f.child)}"
    if isinstance(f, Until):
        return f"({to_text(f.left)} U[{f.t1},{f.t2}] {to_text(f.right)})"
    raise TypeError(f"not a formula: {f!r}")
