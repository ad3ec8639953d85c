"""Expansion of intersection-cohomology stalk functions over flag monomials.

The flag-counting monomials attached to words in the two vertex letters span
all conjugation-invariant constructible functions on the representation
space.  Writing the stalk function of each orbit-closure IC sheaf in that
span and transporting the coefficients to the pair variety produces the
values of its lift at the generic point of every conormal component: the
matrix m of the canonical basis against the semicanonical one.  Twisting by
orbit-dimension signs turns m into the characteristic-cycle multiplicities n,
which must be nonnegative integers with unit diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import ratlin
from .core import DimVector, Orbit, PiModClass, enumerate_orbits, orbit_dim
from .qcount import eval_word


@dataclass(frozen=True)
class MonomialWord:
    """Word of grouped letters (vertex, multiplicity), innermost first."""

    letters: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for v, m in self.letters:
            if v not in (1, 2) or m < 1:
                raise ValueError(f"bad letter ({v}, {m})")

    @classmethod
    def from_composition(cls, seq) -> "MonomialWord":
        return cls(tuple((int(v), 1) for v in seq))

    @property
    def content(self) -> DimVector:
        c1 = sum(m for v, m in self.letters if v == 1)
        c2 = sum(m for v, m in self.letters if v == 2)
        return DimVector(c1, c2)

    def __str__(self):
        return "*".join(f"{v}^{m}" if m > 1 else str(v) for v, m in self.letters)


def _compositions(d1: int, d2: int):
    if d1 == 0 and d2 == 0:
        yield ()
        return
    if d1 > 0:
        for rest in _compositions(d1 - 1, d2):
            yield (1,) + rest
    if d2 > 0:
        for rest in _compositions(d1, d2 - 1):
            yield (2,) + rest


def spanning_words(dim: DimVector) -> list[MonomialWord]:
    """Deterministic spanning set: all ungrouped compositions plus the grouped
    sandwiches 1^a 2^d2 1^c and 2^a 1^d1 2^c."""
    words = {MonomialWord.from_composition(c) for c in _compositions(dim.d1, dim.d2)}
    for a in range(dim.d1 + 1):
        letters = []
        if a:
            letters.append((1, a))
        if dim.d2:
            letters.append((2, dim.d2))
        if dim.d1 - a:
            letters.append((1, dim.d1 - a))
        if letters:
            words.add(MonomialWord(tuple(letters)))
    for a in range(dim.d2 + 1):
        letters = []
        if a:
            letters.append((2, a))
        if dim.d1:
            letters.append((1, dim.d1))
        if dim.d2 - a:
            letters.append((2, dim.d2 - a))
        if letters:
            words.add(MonomialWord(tuple(letters)))
    return sorted(words, key=lambda w: w.letters)


@dataclass(frozen=True)
class ConstructibleFnE:
    """Invariant constructible function on the representation space: one exact
    value per orbit rank."""

    dim: DimVector
    values: tuple[Fraction, ...]  # index = orbit rank

    def __post_init__(self):
        if len(self.values) != self.dim.rank_bound + 1:
            raise ValueError("one value per orbit required")

    def value(self, r: int) -> Fraction:
        return self.values[r]


def pi_classes(dim: DimVector) -> list[PiModClass]:
    """All pair classes (r, s) with r + s <= min(d1, d2), in a fixed order."""
    out = []
    for r in range(dim.rank_bound + 1):
        for s in range(dim.rank_bound - r + 1):
            out.append(PiModClass(dim, r, s))
    return out


@dataclass(frozen=True)
class ConstructibleFnLambda:
    """Invariant constructible function on the pair variety, indexed by class."""

    dim: DimVector
    values: tuple[Fraction, ...]  # aligned with pi_classes(dim)

    def value(self, r: int, s: int) -> Fraction:
        return self.values[pi_classes(self.dim).index(PiModClass(self.dim, r, s))]

    def as_dict(self) -> dict[tuple[int, int], Fraction]:
        return {(c.r, c.s): v for c, v in zip(pi_classes(self.dim), self.values)}


@dataclass(frozen=True)
class ExpansionMatrix:
    """Square matrix indexed by orbit ranks; entry (r_row, r_col) = coefficient
    of the row orbit's function in the column orbit's expansion."""

    dim: DimVector
    entries: tuple[tuple[Fraction, ...], ...]  # entries[r_row][r_col]

    def entry(self, r_row: int, r_col: int) -> Fraction:
        return self.entries[r_row][r_col]

    @property
    def size(self) -> int:
        return len(self.entries)

    def is_unitriangular(self) -> bool:
        n = self.size
        for i in range(n):
            if self.entries[i][i] != 1:
                return False
            for j in range(n):
                if i > j and self.entries[i][j] != 0:
                    return False
        return True

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.entries for v in row)


class SpanningError(ValueError):
    """The supplied words do not reach every orbit direction."""

    def __init__(self, dim: DimVector, missing: list[int]):
        super().__init__(
            f"monomial matrix on {dim} is rank-deficient; "
            f"unreachable orbit ranks: {missing}"
        )
        self.missing = missing


class ConjectureViolation(AssertionError):
    """A structural consequence of the multiplicity identity failed."""


def monomial_matrix_E(dim: DimVector, words) -> list[list[Fraction]]:
    """Row per word, column per orbit rank; entries are flag counts at q = 1."""
    orbits = enumerate_orbits(dim)
    return [
        [Fraction(eval_word(w.letters, o, "E").at_one()) for o in orbits]
        for w in words
    ]


def monomial_matrix_Pi(dim: DimVector, words) -> list[list[Fraction]]:
    """Row per word, column per pair class, flag counts at q = 1."""
    classes = pi_classes(dim)
    return [
        [Fraction(eval_word(w.letters, c, "Pi").at_one()) for c in classes]
        for w in words
    ]


def smallness_check(dim: DimVector, r: int, side: str) -> bool:
    """Whether the chosen resolution of the rank <= r closure is small.

    The ker-side resolution has Grassmannian fibers of dimension
    (d1 - r)(r - r') over the rank-r' stratum; smallness asks twice that to be
    less than the stratum codimension for every r' < r.  The coker side swaps
    the roles of d1 and d2.
    """
    d1, d2 = dim.d1, dim.d2
    if side == "coker":
        d1, d2 = d2, d1
    elif side != "ker":
        raise ValueError(f"side must be 'ker' or 'coker', got {side!r}")
    for rp in range(r):
        if not 2 * (d1 - r) * (r - rp) < (r - rp) * (d1 + d2 - r - rp):
            return False
    return True


def canonical_fn(dim: DimVector, r: int) -> ConstructibleFnE:
    """Stalk Euler characteristics of the IC sheaf of the rank-r orbit closure,
    normalized to 1 on the open stratum.

    Computed through the small resolution whose fiber over a rank-r' point is
    a Grassmannian; the value at r' <= r is the binomial C(d1-r', d1-r) (with
    d1, d2 swapped when d2 < d1)."""
    if not (smallness_check(dim, r, "ker") or smallness_check(dim, r, "coker")):
        raise ArithmeticError(
            f"no small resolution for rank {r} on {dim}"
        )  # unreachable for two vertices; kept as a guard
    n = dim.d1 if dim.d1 <= dim.d2 else dim.d2
    values = [
        Fraction(math.comb(n - rp, n - r)) if rp <= r else Fraction(0)
        for rp in range(dim.rank_bound + 1)
    ]
    return ConstructibleFnE(dim, tuple(values))


def express_in_monomials(f: ConstructibleFnE, words,
                         mat_e=None) -> list[Fraction]:
    """Exact coefficients c with sum_w c_w * monomial_w = f on every orbit.

    Underdetermined systems get the pivoted minimal solution in the given
    word order.  Raises SpanningError when some orbit direction is missing.
    A precomputed monomial matrix can be passed to skip the counting DP.
    """
    if mat_e is None:
        mat_e = monomial_matrix_E(f.dim, words)
    n_orbits = f.dim.rank_bound + 1
    covered = set(ratlin.pivot_columns(mat_e))
    if len(covered) < n_orbits:
        missing = [r for r in range(n_orbits) if r not in covered]
        raise SpanningError(f.dim, missing)
    system = ratlin.transpose(mat_e)  # orbit equations, word unknowns
    return ratlin.solve_pivoted(system, list(f.values))


def psi_inverse(f: ConstructibleFnE, words, mats=None) -> ConstructibleFnLambda:
    """Lift f to the pair variety by reusing its monomial coefficients on the
    pair-side flag counts."""
    mat_e, mat_pi = mats if mats is not None else (None, None)
    coeffs = express_in_monomials(f, words, mat_e)
    if mat_pi is None:
        mat_pi = monomial_matrix_Pi(f.dim, words)
    n = len(pi_classes(f.dim))
    values = [sum((c * mat_pi[i][j] for i, c in enumerate(coeffs)), Fraction(0))
              for j in range(n)]
    return ConstructibleFnLambda(f.dim, tuple(values))


def m_coefficients(dim: DimVector, words=None, mats=None) -> ExpansionMatrix:
    """m[r', r] = value of the lifted IC stalk function of orbit r at the
    generic pair class (r', min - r') of the r'-component."""
    if words is None:
        words = spanning_words(dim)
    bound = dim.rank_bound
    cols = []
    for r in range(bound + 1):
        lifted = psi_inverse(canonical_fn(dim, r), words, mats)
        cols.append([lifted.value(rp, bound - rp) for rp in range(bound + 1)])
    entries = tuple(tuple(cols[r][rp] for r in range(bound + 1))
                    for rp in range(bound + 1))
    return ExpansionMatrix(dim, entries)


def cc_multiplicities(dim: DimVector, words=None, mats=None) -> ExpansionMatrix:
    """n[r', r] = (-1)^(dim orbit r' - dim orbit r) * m[r', r].

    Validates the structure forced by the multiplicity identity: unit
    diagonal, integrality, nonnegativity, and support r' <= r.  Any failure
    raises ConjectureViolation rather than passing silently.
    """
    m = m_coefficients(dim, words, mats)
    bound = dim.rank_bound
    dims = [orbit_dim(Orbit(dim, r)) for r in range(bound + 1)]
    entries = tuple(
        tuple(
            m.entry(rp, r) * (1 if (dims[rp] - dims[r]) % 2 == 0 else -1)
            for r in range(bound + 1)
        )
        for rp in range(bound + 1)
    )
    n = ExpansionMatrix(dim, entries)
    problems = []
    for rp in range(bound + 1):
        for r in range(bound + 1):
            v = n.entry(rp, r)
            if rp == r and v != 1:
                problems.append(f"n[{rp},{r}] = {v} != 1 on the diagonal")
            if rp > r and v != 0:
                problems.append(f"n[{rp},{r}] = {v} outside the closure support")
            if v.denominator != 1:
                problems.append(f"n[{rp},{r}] = {v} not an integer")
            if v < 0:
                problems.append(f"n[{rp},{r}] = {v} negative")
    if problems:
        raise ConjectureViolation(f"on {dim}: " + "; ".join(problems))
    return n
