"""Sparse exact polynomials in matrix-entry variables.

Variables are entries of the five matrices that appear in the trace function
on the flag-stabilizing chart: X (the representation), M (inverse of the
first unipotent group element), N (the second), and their replacements M', X'
introduced by the change of variables.  Terms are kept in a canonical sorted
order so that serialized polynomials are reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

KINDS = ("M", "Mp", "N", "X", "Xp")
_DISPLAY = {"M": "M", "Mp": "M'", "N": "N", "X": "X", "Xp": "X'"}


@dataclass(frozen=True, order=True)
class VarId:
    kind: str
    row: int
    col: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind in ("M", "N") and not self.row > self.col:
            raise ValueError(
                f"{self.kind}({self.row},{self.col}) is not strictly lower"
            )

    def __str__(self):
        return f"{_DISPLAY[self.kind]}({self.row},{self.col})"


Mono = tuple[tuple[VarId, int], ...]  # sorted, positive exponents


def _mono_mul(a: Mono, b: Mono) -> Mono:
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_str(mono: Mono) -> str:
    if not mono:
        return "1"
    return "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in mono)


class MultiPoly:
    """Polynomial over Q with a canonical term order."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, coeff in (terms or {}).items():
            c = Fraction(coeff)
            if c:
                clean[mono] = c
        self.terms = clean

    @classmethod
    def zero(cls) -> "MultiPoly":
        return cls()

    @classmethod
    def const(cls, c) -> "MultiPoly":
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, v: VarId) -> "MultiPoly":
        return cls({((v, 1),): Fraction(1)})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + c
        return MultiPoly(out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return MultiPoly(out)

    def scaled(self, c) -> "MultiPoly":
        c = Fraction(c)
        return MultiPoly({m: c * v for m, v in self.terms.items()})

    def variables(self) -> set[VarId]:
        return {v for mono in self.terms for v, _ in mono}

    def degree_in(self, mono: Mono, varset) -> int:
        return sum(e for v, e in mono if v in varset)

    def coefficient_of(self, v: VarId) -> "MultiPoly":
        """Coefficient polynomial of v in a polynomial of degree <= 1 in v."""
        out: dict = {}
        for mono, c in self.terms.items():
            d = dict(mono)
            e = d.pop(v, 0)
            if e == 0:
                continue
            if e > 1:
                raise ValueError(f"degree {e} > 1 in {v}")
            out[tuple(sorted(d.items()))] = c
        return MultiPoly(out)

    def substitute(self, mapping: dict[VarId, "MultiPoly"]) -> "MultiPoly":
        """Simultaneously replace every mapped variable; exact."""
        out = MultiPoly.zero()
        for mono, c in self.terms.items():
            term = MultiPoly.const(c)
            for v, e in mono:
                factor = mapping.get(v)
                if factor is None:
                    factor = MultiPoly.var(v)
                for _ in range(e):
                    term = term * factor
            out = out + term
        return out

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(_mono_str(mono))
            else:
                parts.append(f"{c}*{_mono_str(mono)}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MultiPoly({self.to_str()})"


def partial_derivative(p: MultiPoly, v: VarId) -> MultiPoly:
    """Formal partial derivative, exact over Q."""
    out: dict = {}
    for mono, c in p.terms.items():
        d = dict(mono)
        e = d.pop(v, 0)
        if e == 0:
            continue
        if e > 1:
            d[v] = e - 1
        key = tuple(sorted(d.items()))
        out[key] = out.get(key, Fraction(0)) + c * e
    return MultiPoly(out)


def expand_trace(dim, shape, y0) -> MultiPoly:
    """tr(x g1^{-1} y0 g2) for unit-entry y0 and unipotent lower factors.

    x ranges over matrices stabilizing the flag of `shape`, so only admissible
    X positions carry variables; M / N are the strictly lower entries of the
    two group factors.  The result is the three-sum expansion: every term is
    X*N, X*M, or X*M*N with indices tied to the nonzero entries of y0.
    """
    d1 = dim.d1
    entries = sorted(getattr(y0, "entries", y0))
    for i, j in entries:
        if not shape.adm_y(i, j):
            raise ValueError(f"y0 entry ({i},{j}) does not stabilize the flag")
    h = MultiPoly.zero()

    def v(kind, r, c):
        return MultiPoly.var(VarId(kind, r, c))

    for ia, ja in entries:
        for i in range(1, ja):
            if shape.adm_x(i, ia):
                h = h + v("X", i, ia) * v("N", ja, i)
        for j in range(ia + 1, d1 + 1):
            if shape.adm_x(ja, j):
                h = h + v("X", ja, j) * v("M", j, ia)
    for ib, jb in entries:
        for i in range(1, jb):
            for j in range(ib + 1, d1 + 1):
                if shape.adm_x(i, j):
                    h = h + v("X", i, j) * v("M", j, ib) * v("N", jb, i)
    return h


class BilinearityError(ValueError):
    """A monomial fails the degree-(1,1) pattern; carries the witness."""

    def __init__(self, witness: str):
        super().__init__(f"monomial {witness} is not bilinear in (W1, W2)")
        self.witness = witness


@dataclass(frozen=True)
class BilinearForm:
    """Matrix of a bilinear form on W1 x W2 with coefficient-polynomial entries."""

    rows: tuple[VarId, ...]
    cols: tuple[VarId, ...]
    matrix: tuple[tuple[MultiPoly, ...], ...]


def bilinear_decompose(p: MultiPoly, w1, w2, vc) -> BilinearForm:
    """Split p as sum_{u in W1, v in W2} B[u][v](Vc) * u * v.

    Succeeds iff every monomial has degree exactly 1 in W1, exactly 1 in W2,
    and all remaining factors in Vc; otherwise raises BilinearityError with
    the offending monomial.
    """
    w1, w2, vc = set(w1), set(w2), set(vc)
    rows = tuple(sorted(w1))
    cols = tuple(sorted(w2))
    ridx = {v: i for i, v in enumerate(rows)}
    cidx = {v: i for i, v in enumerate(cols)}
    cells: dict = {}
    for mono, coeff in p.terms.items():
        deg1 = sum(e for v, e in mono if v in w1)
        deg2 = sum(e for v, e in mono if v in w2)
        rest = tuple((v, e) for v, e in mono if v not in w1 and v not in w2)
        if deg1 != 1 or deg2 != 1 or any(v not in vc for v, _ in rest):
            raise BilinearityError(_mono_str(mono))
        u = next(v for v, _ in mono if v in w1)
        w = next(v for v, _ in mono if v in w2)
        key = (ridx[u], cidx[w])
        cells[key] = cells.get(key, MultiPoly.zero()) + MultiPoly({rest: coeff})
    matrix = tuple(
        tuple(cells.get((i, j), MultiPoly.zero()) for j in range(len(cols)))
        for i in range(len(rows))
    )
    return BilinearForm(rows, cols, matrix)
