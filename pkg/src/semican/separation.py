"""Variable separation for the trace function on a flag-stabilizing chart.

Fixing a composition of the two vertex letters fixes a complete flag; the
chart consists of representations x stabilizing it, acted on by the two
opposite unipotent groups.  For a covector y0 in Borel normal form (at most
one unit entry per row and column) the trace function expands into six
families of terms; after a triangular change of variables it becomes exactly
bilinear in two disjoint variable groups, with coefficients in the rest.
Bilinearity forces the Hessian rank to be even at every coefficient value,
which certifies that the shifted vanishing-cycle Euler number at the chart
origin equals 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import DimVector
from .sympoly import (BilinearForm, BilinearityError, MultiPoly, VarId,
                      bilinear_decompose, expand_trace)


class SeparationError(RuntimeError):
    """Bilinearity failed; carries the witness monomial.  Must never happen."""


@dataclass(frozen=True)
class FlagShape:
    """Slot data of a composition: which matrix entries may be nonzero.

    t_slots / s_slots are the 1-based positions of the vertex-1 / vertex-2
    letters.  x (d2 x d1) may be nonzero at (i, j) iff s_i < t_j; y (d1 x d2)
    at (j, i) iff t_j < s_i.  Exactly one of the two holds for every pair.
    """

    composition: tuple[int, ...]
    t_slots: tuple[int, ...]
    s_slots: tuple[int, ...]

    @property
    def d1(self) -> int:
        return len(self.t_slots)

    @property
    def d2(self) -> int:
        return len(self.s_slots)

    @property
    def dim(self) -> DimVector:
        return DimVector(self.d1, self.d2)

    def adm_x(self, row: int, col: int) -> bool:
        return self.s_slots[row - 1] < self.t_slots[col - 1]

    def adm_y(self, row: int, col: int) -> bool:
        return self.t_slots[row - 1] < self.s_slots[col - 1]

    def x_positions(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.d2 + 1)
                for j in range(1, self.d1 + 1) if self.adm_x(i, j)]

    def y_positions(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.d1 + 1)
                for j in range(1, self.d2 + 1) if self.adm_y(i, j)]


def flag_shape(composition) -> FlagShape:
    a = tuple(int(v) for v in composition)
    if any(v not in (1, 2) for v in a):
        raise ValueError(f"composition letters must be 1 or 2: {a}")
    t = tuple(k + 1 for k, v in enumerate(a) if v == 1)
    s = tuple(k + 1 for k, v in enumerate(a) if v == 2)
    return FlagShape(a, t, s)


@dataclass(frozen=True)
class NormalFormY:
    """Partial matching of unit entries: at most one per row and per column."""

    entries: frozenset[tuple[int, int]]

    def __post_init__(self):
        rows = [i for i, _ in self.entries]
        cols = [j for _, j in self.entries]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError(f"repeated row or column in {sorted(self.entries)}")

    @classmethod
    def of(cls, *positions) -> "NormalFormY":
        return cls(frozenset((int(i), int(j)) for i, j in positions))

    def sorted_entries(self) -> list[tuple[int, int]]:
        return sorted(self.entries, key=lambda e: e[1])


def validate_matching(shape: FlagShape, y0: NormalFormY) -> None:
    for i, j in sorted(y0.entries):
        if not (1 <= i <= shape.d1 and 1 <= j <= shape.d2):
            raise ValueError(f"y0 entry ({i},{j}) out of range for {shape.dim}")
        if not shape.adm_y(i, j):
            raise ValueError(
                f"y0 entry ({i},{j}) violates flag stability: "
                f"slot {shape.t_slots[i - 1]} of vertex 1 comes after "
                f"slot {shape.s_slots[j - 1]} of vertex 2"
            )


def enumerate_matchings(shape: FlagShape) -> list[NormalFormY]:
    """All admissible partial matchings, the empty one included."""
    adm = shape.y_positions()
    by_col: dict[int, list[int]] = {}
    for i, j in adm:
        by_col.setdefault(j, []).append(i)
    cols = sorted(by_col)
    out: list[NormalFormY] = []

    def walk(idx: int, used_rows: frozenset, acc: tuple):
        if idx == len(cols):
            out.append(NormalFormY(frozenset(acc)))
            return
        walk(idx + 1, used_rows, acc)
        j = cols[idx]
        for i in sorted(by_col[j]):
            if i not in used_rows:
                walk(idx + 1, used_rows | {i}, acc + ((i, j),))

    walk(0, frozenset(), ())
    out.sort(key=lambda m: (len(m.entries), sorted(m.entries)))
    return out


def enumerate_instances(dim: DimVector):
    """Every (composition, normal-form y0) pair for this dimension vector."""
    for a in _compositions(dim.d1, dim.d2):
        shape = flag_shape(a)
        for m in enumerate_matchings(shape):
            yield a, m


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


@dataclass(frozen=True)
class BorelCertificate:
    """Factors with normal = g1 . y . g2^{-1}; both upper triangular."""

    g1: tuple[tuple[Fraction, ...], ...]
    g2: tuple[tuple[Fraction, ...], ...]


def normal_form(shape: FlagShape, y) -> tuple[NormalFormY, BorelCertificate]:
    """Column-by-column Borel sweep to a unit partial matching.

    In each nonzero column the bottom-most entry becomes the pivot; row
    operations from above clear the column, column operations to the right
    clear the pivot row, and the pivot is scaled to one.
    """
    d1, d2 = shape.d1, shape.d2
    m = [[Fraction(v) for v in row] for row in y]
    if len(m) != d1 or any(len(row) != d2 for row in m):
        raise ValueError(f"matrix must be {d1} x {d2}")
    for i in range(d1):
        for j in range(d2):
            if m[i][j] != 0 and not shape.adm_y(i + 1, j + 1):
                raise ValueError(f"entry ({i + 1},{j + 1}) violates flag stability")

    g1 = [[Fraction(1 if a == b else 0) for b in range(d1)] for a in range(d1)]
    g2 = [[Fraction(1 if a == b else 0) for b in range(d2)] for a in range(d2)]

    def row_op(i, p, c):
        # row_i += c * row_p with i < p; left factor stays upper triangular
        for j in range(d2):
            m[i][j] += c * m[p][j]
        for j in range(d1):
            g1[i][j] += c * g1[p][j]

    def row_scale(p, c):
        for j in range(d2):
            m[p][j] *= c
        for j in range(d1):
            g1[p][j] *= c

    def col_op(j, s, c):
        # col_j += c * col_s with s < j; accumulated on g2 as the inverse factor
        for i in range(d1):
            m[i][j] += c * m[i][s]
        for i in range(d2):
            g2[s][i] -= c * g2[j][i]

    for s in range(d2):
        rows = [i for i in range(d1) if m[i][s] != 0]
        if not rows:
            continue
        p = rows[-1]
        row_scale(p, 1 / m[p][s])
        for i in rows[:-1]:
            row_op(i, p, -m[i][s])
        for j in range(s + 1, d2):
            if m[p][j] != 0:
                col_op(j, s, -m[p][j])

    entries = frozenset(
        (i + 1, j + 1) for i in range(d1) for j in range(d2) if m[i][j] != 0
    )
    cert = BorelCertificate(
        tuple(tuple(row) for row in g1), tuple(tuple(row) for row in g2)
    )
    return NormalFormY(entries), cert


@dataclass(frozen=True)
class SeparationReport:
    """Everything the separation of one instance produces."""

    composition: tuple[int, ...]
    y0: tuple[tuple[int, int], ...]
    set_t: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    w1: tuple[VarId, ...]
    w2: tuple[VarId, ...]
    vc: tuple[VarId, ...]
    trace: MultiPoly
    separated: MultiPoly
    change_of_variables: tuple[tuple[str, str], ...]
    bilinear_ok: bool
    bilinear: BilinearForm
    chi_nearby: int
    chi_phi: int
    critical_ok: bool

    @property
    def trace_poly(self) -> str:
        return self.trace.to_str()

    @property
    def separated_poly(self) -> str:
        return self.separated.to_str()

    def to_dict(self) -> dict:
        return {
            "composition": list(self.composition),
            "y0": [list(e) for e in self.y0],
            "set_t": [[list(a), list(b)] for a, b in self.set_t],
            "w1": [str(v) for v in self.w1],
            "w2": [str(v) for v in self.w2],
            "vc": [str(v) for v in self.vc],
            "trace_poly": self.trace_poly,
            "separated_poly": self.separated_poly,
            "change_of_variables": [list(p) for p in self.change_of_variables],
            "bilinear_ok": self.bilinear_ok,
            "b_shape": [len(self.bilinear.rows), len(self.bilinear.cols)],
            "b_matrix": [[cell.to_str() for cell in row]
                         for row in self.bilinear.matrix],
            "chi_nearby": self.chi_nearby,
            "chi_phi": self.chi_phi,
            "critical_ok": self.critical_ok,
        }


def _inversion(shape: FlagShape, entries):
    """Triangular elimination of the coupled lower-unipotent variables.

    Returns (m_expr, mp_def): the expression of each coupled M variable in the
    new M' variables, and the definition of each M' in the original ones.
    Processing each fiber by decreasing second matching column makes the
    system triangular, so the inversion is formal and exact.
    """
    t_pairs = [(ap, al) for ap in entries for al in entries
               if shape.adm_x(ap[1], al[0])]
    m_expr: dict[VarId, MultiPoly] = {}
    mp_def: dict[VarId, MultiPoly] = {}
    for al in entries:
        fiber = sorted((ap for ap, a2 in t_pairs if a2 == al),
                       key=lambda e: -e[1])
        for ap in fiber:
            ia, ja = al
            ip, jp = ap
            mvar = VarId("M", ia, ip)
            mpvar = VarId("Mp", ia, ip)
            defn = MultiPoly.var(mvar) + MultiPoly.var(VarId("N", ja, jp))
            expr = MultiPoly.var(mpvar) - MultiPoly.var(VarId("N", ja, jp))
            for ib, jb in entries:
                if ib < ia and jb > jp:
                    n = MultiPoly.var(VarId("N", jb, jp))
                    cross = VarId("M", ia, ib)
                    defn = defn + MultiPoly.var(cross) * n
                    expr = expr - m_expr.get(cross, MultiPoly.var(cross)) * n
            m_expr[mvar] = expr
            mp_def[mpvar] = defn
    return t_pairs, m_expr, mp_def


def _x_change(shape: FlagShape, entries, j_set, t_pairs, m_expr):
    """Change of the coupled X variables absorbing the mixed X U N terms."""
    x_expr: dict[VarId, MultiPoly] = {}
    xp_def: dict[VarId, MultiPoly] = {}
    for ap, al in t_pairs:
        ia, ja = al
        ip, jp = ap
        xvar = VarId("X", jp, ia)
        xpvar = VarId("Xp", jp, ia)
        correction = MultiPoly.zero()
        for app, a2 in t_pairs:
            if a2 != al or app[1] > jp:
                continue
            if app == ap:
                u = MultiPoly.const(1)
            else:
                # coefficient of M'(ia, ip) inside the expansion of M(ia, i'')
                u = m_expr[VarId("M", ia, app[0])].coefficient_of(
                    VarId("Mp", ia, ip))
            if not u:
                continue
            for i in range(1, app[1]):
                if i not in j_set and shape.adm_x(i, ia):
                    correction = correction + (
                        MultiPoly.var(VarId("X", i, ia)) * u
                        * MultiPoly.var(VarId("N", app[1], i))
                    )
        x_expr[xvar] = MultiPoly.var(xpvar) - correction
        xp_def[xpvar] = MultiPoly.var(xvar) + correction
    return x_expr, xp_def


def _classify(shape: FlagShape, entries, t_pairs):
    """The quadratic/coefficient split of all chart variables."""
    d1, d2 = shape.d1, shape.d2
    i_set = {i for i, _ in entries}
    j_set = {j for _, j in entries}
    t_m = {VarId("M", al[0], ap[0]) for ap, al in t_pairs}
    t_x = {VarId("X", ap[1], al[0]) for ap, al in t_pairs}

    w1 = {VarId("Mp", al[0], ap[0]) for ap, al in t_pairs}
    w2 = {VarId("Xp", ap[1], al[0]) for ap, al in t_pairs}
    vc = set()
    for j in range(2, d1 + 1):
        for i in range(1, j):
            v = VarId("M", j, i)
            if v in t_m:
                continue  # replaced by M'
            if j not in i_set and i in i_set:
                w1.add(v)
            else:
                vc.add(v)
    for j in range(2, d2 + 1):
        for i in range(1, j):
            v = VarId("N", j, i)
            if j in j_set and i not in j_set:
                w2.add(v)
            else:
                vc.add(v)
    for i, j in shape.x_positions():
        v = VarId("X", i, j)
        if v in t_x:
            continue  # replaced by X'
        if i not in j_set and j in i_set:
            w1.add(v)
        elif i in j_set and j not in i_set:
            w2.add(v)
        else:
            vc.add(v)
    return w1, w2, vc


def _critical_symbolic(shape: FlagShape, entries) -> bool:
    """Both products of a generic chart point with y0 vanish identically.

    The chart point keeps every admissible X entry symbolic except those in a
    matched row or column, which the pair condition pins to zero.
    """
    d1, d2 = shape.d1, shape.d2
    i_set = {i for i, _ in entries}
    j_set = {j for _, j in entries}
    x = [[MultiPoly.zero()] * d1 for _ in range(d2)]
    for i, j in shape.x_positions():
        if i not in j_set and j not in i_set:
            x[i - 1][j - 1] = MultiPoly.var(VarId("X", i, j))
    y = [[MultiPoly.const(1) if (i + 1, j + 1) in entries else MultiPoly.zero()
          for j in range(d2)] for i in range(d1)]
    xy = [[sum((x[i][k] * y[k][j] for k in range(d1)), MultiPoly.zero())
           for j in range(d2)] for i in range(d2)]
    yx = [[sum((y[i][k] * x[k][j] for k in range(d2)), MultiPoly.zero())
           for j in range(d1)] for i in range(d1)]
    return all(not c for row in xy + yx for c in row)


def build_and_separate(composition, y0: NormalFormY) -> SeparationReport:
    """Run the full separation on one instance and certify chi = 1.

    Raises SeparationError if the substituted trace fails to be bilinear in
    the quadratic variables; for the two-vertex quiver this cannot happen.
    """
    shape = flag_shape(composition)
    validate_matching(shape, y0)
    entries = y0.sorted_entries()
    j_set = {j for _, j in entries}

    h = expand_trace(shape.dim, shape, y0)
    t_pairs, m_expr, _ = _inversion(shape, entries)
    x_expr, _ = _x_change(shape, entries, j_set, t_pairs, m_expr)
    separated = h.substitute(m_expr).substitute(x_expr)

    w1, w2, vc = _classify(shape, entries, t_pairs)
    try:
        form = bilinear_decompose(separated, w1, w2, vc)
    except BilinearityError as exc:
        raise SeparationError(
            f"separation failed on {composition} with y0 {entries}: {exc}"
        ) from exc

    # Even Hessian rank at every coefficient value => nearby Euler number 0.
    change = tuple(
        sorted([(str(k), v.to_str()) for k, v in m_expr.items()]
               + [(str(k), v.to_str()) for k, v in x_expr.items()])
    )
    return SeparationReport(
        composition=shape.composition,
        y0=tuple(entries),
        set_t=tuple(sorted((tuple(ap), tuple(al)) for ap, al in t_pairs)),
        w1=tuple(sorted(w1)),
        w2=tuple(sorted(w2)),
        vc=tuple(sorted(vc)),
        trace=h,
        separated=separated,
        change_of_variables=change,
        bilinear_ok=True,
        bilinear=form,
        chi_nearby=0,
        chi_phi=1,
        critical_ok=_critical_symbolic(shape, entries),
    )


def back_substitute(report_composition, y0: NormalFormY,
                    separated: MultiPoly) -> MultiPoly:
    """Replace the primed variables by their definitions in the originals."""
    shape = flag_shape(report_composition)
    entries = y0.sorted_entries()
    j_set = {j for _, j in entries}
    t_pairs, m_expr, mp_def = _inversion(shape, entries)
    _, xp_def = _x_change(shape, entries, j_set, t_pairs, m_expr)
    return separated.substitute({**mp_def, **xp_def})


def critical_locus_check(composition, x0, y) -> bool:
    """Compare the computed differential against the stabilization predicate.

    The differential of (g, x) -> <g x, y> at (1, x0) has a group part that
    vanishes iff x0 y = 0 = y x0 and a chart part that vanishes iff y
    stabilizes the flag; this recomputes both sides independently and
    returns whether they agree.
    """
    shape = flag_shape(composition)
    d1, d2 = shape.d1, shape.d2
    x0 = [[Fraction(v) for v in row] for row in x0]
    y = [[Fraction(v) for v in row] for row in y]
    if len(x0) != d2 or any(len(r) != d1 for r in x0):
        raise ValueError(f"x0 must be {d2} x {d1}")
    if len(y) != d1 or any(len(r) != d2 for r in y):
        raise ValueError(f"y must be {d1} x {d2}")
    for i in range(d2):
        for j in range(d1):
            if x0[i][j] != 0 and not shape.adm_x(i + 1, j + 1):
                raise ValueError(f"x0 entry ({i + 1},{j + 1}) not admissible")

    # chart directions: d/dt <x0 + t E_ij, y> = y[j][i], over admissible (i, j)
    chart_zero = all(
        y[j - 1][i - 1] == 0 for i, j in shape.x_positions()
    )
    # group directions: d/dt <(1 + t u) x0 (1 + t u')^{-1}...> over gl basis
    group_zero = True
    for a in range(d1):
        for b in range(d1):
            # u1 = E_ab acting as -x0 u1: derivative -tr(x0 E_ab y)
            val = -sum(x0[i][a] * y[b][i] for i in range(d2))
            if val != 0:
                group_zero = False
    for a in range(d2):
        for b in range(d2):
            # u2 = E_ab acting as u2 x0: derivative tr(E_ab x0 y)
            val = sum(x0[b][j] * y[j][a] for j in range(d1))
            if val != 0:
                group_zero = False
    computed_critical = chart_zero and group_zero

    adm = all(
        y[i][j] == 0 or shape.adm_y(i + 1, j + 1)
        for i in range(d1) for j in range(d2)
    )
    xy_zero = all(
        sum(x0[i][k] * y[k][j] for k in range(d1)) == 0
        for i in range(d2) for j in range(d2)
    )
    yx_zero = all(
        sum(y[i][k] * x0[k][j] for k in range(d2)) == 0
        for i in range(d1) for j in range(d1)
    )
    predicted_critical = adm and xy_zero and yx_zero
    return computed_critical == predicted_critical
