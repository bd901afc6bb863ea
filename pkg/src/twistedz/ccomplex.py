"""Left and right C-complexes and their total complexes.

A C-complex is a finite family of cochain complexes (A_m, d_m) with
higher maps of degree m-n+1 subject to

  LEFT :  F_{m,n}.(-1)^m d + (-1)^n d.F_{m,n} + sum_{m<l<n} F_{l,n}.F_{m,l} = 0
  RIGHT:  E_{m,n}.(-1)^m d + (-1)^n d.E_{m,n}
               + sum_{m<l<n} (-1)^{l+1} E_{l,n}.E_{m,l} = 0

with total differentials on Tot^p = sum_{m+i=p} A^i_m

  d^L(f) = (-1)^m d(f) + sum_{n>m} F_{m,n}(f)
  d^R(f) = (-1)^m d(f) + sum_{n>m} (-1)^{n+1} E_{m,n}(f).

The builders at the bottom reconstruct the Hom complex of twisted
complexes as iterated total complexes; the agreement is entrywise on
block-indexed matrices and is exercised by the acceptance suite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .zmodule import IntMatrix, FGAbGroup, assemble
from .complexes import (
    ZComplex,
    GradedMap,
    HomologyData,
    ObjectMismatch,
    Report,
    compose_graded,
    dmap,
    exact_at,
    induced_homology_matrix,
    left_compose_operator,
    right_compose_operator,
    scale_complex_diff,
    shift_complex,
    validate,
)
from .pretr import (
    TwistedComplex,
    PreTrHom,
    HomSlot,
    build_slots,
    conjugate_operator,
    hom_pretr,
)

LEFT = "left"
RIGHT = "right"


class CComplex:
    """columns[m] are complexes; higher[(m, n)] has degree m-n+1."""

    def __init__(self, chirality: str, columns: dict[int, ZComplex],
                 higher: Optional[dict[tuple[int, int], GradedMap]] = None):
        if chirality not in (LEFT, RIGHT):
            raise ValueError(f"chirality must be {LEFT!r} or {RIGHT!r}")
        self.chirality = chirality
        self.columns = {int(m): c for m, c in columns.items() if not c.is_zero()}
        hh = {}
        for (m, n), f in (higher or {}).items():
            m, n = int(m), int(n)
            if m >= n:
                raise ObjectMismatch(f"higher map ({m},{n}) needs m < n")
            if f.is_zero():
                continue
            if m not in self.columns or n not in self.columns:
                raise ObjectMismatch(f"higher map ({m},{n}) references a zero column")
            if f.degree != m - n + 1:
                raise ObjectMismatch(
                    f"higher map ({m},{n}) has degree {f.degree}, expected {m - n + 1}")
            if f.source != self.columns[m] or f.target != self.columns[n]:
                raise ObjectMismatch(f"higher map ({m},{n}) endpoints do not match columns")
            hh[(m, n)] = f
        self.higher = hh

    def column_indices(self) -> list[int]:
        return sorted(self.columns)

    def column(self, m: int) -> ZComplex:
        return self.columns.get(m, ZComplex.zero())

    def map(self, m: int, n: int) -> GradedMap:
        f = self.higher.get((m, n))
        if f is None:
            f = GradedMap.zero(self.column(m), self.column(n), m - n + 1)
        return f

    def coherence_defect(self, m: int, n: int) -> GradedMap:
        F = self.map(m, n)
        acc = compose_graded(F, dmap(self.column(m))).scale(-1 if m % 2 else 1)
        acc = acc + compose_graded(dmap(self.column(n)), F).scale(-1 if n % 2 else 1)
        for l in range(m + 1, n):
            if (m, l) in self.higher and (l, n) in self.higher:
                term = compose_graded(self.higher[(l, n)], self.higher[(m, l)])
                if self.chirality == RIGHT and (l + 1) % 2:
                    term = term.scale(-1)
                acc = acc + term
        return acc

    def __repr__(self):
        return f"CComplex({self.chirality}, columns={self.column_indices()})"


def validate_ccomplex(C: CComplex) -> Report:
    """Exact check of the chirality identity for every pair of columns."""
    for m in C.column_indices():
        rep = validate(C.column(m))
        if not rep.ok:
            return Report(False, [f"column {m}: {rep.problems[0]}"])
    idx = C.column_indices()
    for m in idx:
        for n in idx:
            if m < n and not C.coherence_defect(m, n).is_zero():
                return Report(False, [f"coherence fails at ({m},{n})"])
    return Report(True)


@dataclass
class TotComplex:
    """Total complex with its column block index."""
    complex: ZComplex
    blocks: dict[int, list[tuple[int, int, int]]]  # p -> [(m, offset, size)]

    def block_table(self, p: int) -> dict[int, tuple[int, int]]:
        return {m: (off, size) for m, off, size in self.blocks.get(p, [])}


def tot(C: CComplex) -> TotComplex:
    """Tot^p = sum over m of A_m^{p-m}; see module docstring for the signs."""
    cols = C.column_indices()
    degrees = set()
    for m in cols:
        for i in C.column(m).degrees():
            degrees.add(m + i)
    ranks: dict[int, int] = {}
    blocks: dict[int, list[tuple[int, int, int]]] = {}
    for p in sorted(degrees):
        off = 0
        entries = []
        for m in cols:
            r = C.column(m).rank(p - m)
            if r:
                entries.append((m, off, r))
                off += r
        if entries:
            blocks[p] = entries
            ranks[p] = off
    diffs = {}
    right = C.chirality == RIGHT
    for p, entries in blocks.items():
        tgt_entries = blocks.get(p + 1)
        if not tgt_entries:
            continue
        tgt_pos = {m: t for t, (m, _, _) in enumerate(tgt_entries)}
        parts = {}
        for s, (m, _, _) in enumerate(entries):
            if m in tgt_pos:
                dm = C.column(m).d(p - m)
                parts[(tgt_pos[m], s)] = dm.scale(-1 if m % 2 else 1)
            for n in cols:
                if n > m and (m, n) in C.higher and n in tgt_pos:
                    body = C.higher[(m, n)].block(p - m)
                    if right and (n + 1) % 2:
                        body = body.scale(-1)
                    key = (tgt_pos[n], s)
                    parts[key] = body if key not in parts else parts[key] + body
        diffs[p] = assemble(parts, [r for _, _, r in tgt_entries],
                            [r for _, _, r in entries])
    return TotComplex(ZComplex(ranks, diffs), blocks)


# -- reconstruction of PreTr Hom complexes ---------------------------------------

def _single_index(T: TwistedComplex, what: str) -> None:
    if T.indices() != [0]:
        raise ObjectMismatch(f"{what} must be a one-term twisted complex at index 0")


def row_ccomplex(A_single: TwistedComplex, B: TwistedComplex, choice=None) -> CComplex:
    """Hom(A', B^m) with F_{m,n} = (-1)^{m+n} (q_{m,n} . -) is a left
    C-complex whose total complex is the Hom complex to B."""
    _single_index(A_single, "the source")
    slots = build_slots(A_single, B, choice)
    columns = {m: slots[(0, m)].complex for m in B.indices()}
    higher = {}
    for (m, n), q in B.q.items():
        src, tgt = slots[(0, m)], slots[(0, n)]
        body = {}
        for l in src.complex.degrees():
            op = left_compose_operator(src.hom, tgt.hom, q, l)
            mem = conjugate_operator(src, tgt, l, l + q.degree, op, (0, m), (0, n))
            if (m + n) % 2:
                mem = mem.scale(-1)
            if not mem.is_zero():
                body[l] = mem
        higher[(m, n)] = GradedMap(columns[m], columns[n], m - n + 1, body)
    return CComplex(LEFT, columns, higher)


def col_ccomplex(A: TwistedComplex, B_single: TwistedComplex, choice=None) -> CComplex:
    """(Hom(A^{-m}, B'), (-1)^m d) with E_{m,n}(f) = (-1)^{deg f} f . p_{-n,-m}
    is a right C-complex whose total complex is the Hom complex from A."""
    _single_index(B_single, "the target")
    slots = build_slots(A, B_single, choice)
    columns = {}
    for i in A.indices():
        m = -i
        columns[m] = scale_complex_diff(slots[(i, 0)].complex, -1 if m % 2 else 1)
    higher = {}
    for (i2, i1), p in A.q.items():  # p : A^{i2} -> A^{i1}, i2 < i1
        m, n = -i1, -i2
        src, tgt = slots[(i1, 0)], slots[(i2, 0)]
        body = {}
        for t in src.complex.degrees():
            op = right_compose_operator(src.hom, tgt.hom, p, t)
            mem = conjugate_operator(src, tgt, t, t + p.degree, op, (i1, 0), (i2, 0))
            if t % 2:
                mem = mem.scale(-1)
            if not mem.is_zero():
                body[t] = mem
        higher[(m, n)] = GradedMap(columns[m], columns[n], m - n + 1, body)
    return CComplex(RIGHT, columns, higher)


@dataclass
class RLResult:
    total: TotComplex
    inner: dict[int, TotComplex]
    pretr: PreTrHom
    matches: bool
    report: Report


def rl_assemble(A: TwistedComplex, B: TwistedComplex, choice=None) -> RLResult:
    """Left C-complexes in the target direction, then a right C-complex of
    their totals; the double total is compared entrywise with hom_pretr."""
    slots = build_slots(A, B, choice)
    inner_cc: dict[int, CComplex] = {}
    inner_tot: dict[int, TotComplex] = {}
    for i in A.indices():
        m = -i
        columns = {mp: slots[(i, mp)].complex for mp in B.indices()}
        higher = {}
        for (mp, np_), q in B.q.items():
            src, tgt = slots[(i, mp)], slots[(i, np_)]
            body = {}
            for l in src.complex.degrees():
                op = left_compose_operator(src.hom, tgt.hom, q, l)
                mem = conjugate_operator(src, tgt, l, l + q.degree, op, (i, mp), (i, np_))
                if (mp + np_) % 2:
                    mem = mem.scale(-1)
                if not mem.is_zero():
                    body[l] = mem
            higher[(mp, np_)] = GradedMap(columns[mp], columns[np_], mp - np_ + 1, body)
        cc = CComplex(LEFT, columns, higher)
        inner_cc[m] = cc
        inner_tot[m] = tot(cc)

    outer_columns = {m: scale_complex_diff(t.complex, -1 if m % 2 else 1)
                     for m, t in inner_tot.items()}
    outer_higher = {}
    for (i2, i1), p in A.q.items():  # p : A^{i2} -> A^{i1} with i2 < i1
        m, n = -i1, -i2
        Tm, Tn = inner_tot[m], inner_tot[n]
        body = {}
        for pdeg in Tm.complex.degrees():
            parts = {}
            src_entries = Tm.blocks.get(pdeg, [])
            tgt_entries = Tn.blocks.get(pdeg + p.degree, [])
            tgt_pos = {mp: t for t, (mp, _, _) in enumerate(tgt_entries)}
            for s, (mp, _, _) in enumerate(src_entries):
                if mp not in tgt_pos:
                    continue
                src, tgt = slots[(i1, mp)], slots[(i2, mp)]
                l = pdeg - mp
                op = right_compose_operator(src.hom, tgt.hom, p, l)
                mem = conjugate_operator(src, tgt, l, l + p.degree, op, (i1, mp), (i2, mp))
                # sign by the column-total degree of f, not its inner Hom
                # degree: only this choice matches the Hom differential
                if pdeg % 2:
                    mem = mem.scale(-1)
                parts[(tgt_pos[mp], s)] = mem
            mat = assemble(parts, [r for _, _, r in tgt_entries],
                           [r for _, _, r in src_entries])
            if not mat.is_zero():
                body[pdeg] = mat
        outer_higher[(m, n)] = GradedMap(outer_columns[m], outer_columns[n],
                                         m - n + 1, body)
    outer = CComplex(RIGHT, outer_columns, outer_higher)
    total = tot(outer)
    pretr = hom_pretr(A, B, choice)
    report = _compare_nested(total, inner_tot, pretr)
    return RLResult(total, inner_tot, pretr, report.ok, report)


def _compare_nested(total: TotComplex, inner: dict[int, TotComplex],
                    pretr: PreTrHom) -> Report:
    """Blockwise equality of the doubly-total complex with the Hom complex:
    outer index m and inner index m' match the block (i, j) = (-m, m')."""
    problems = []
    # graded pieces
    for p in set(total.complex.ranks) | set(pretr.underlying.ranks):
        mine = {}
        for m, off, _ in total.blocks.get(p, []):
            for mp, ioff, size in inner[m].blocks.get(p - m, []):
                mine[(-m, mp)] = (off + ioff, size)
        theirs = {blk: (off, size) for blk, off, size in pretr.layout.get(p, [])}
        if {k: v[1] for k, v in mine.items()} != {k: v[1] for k, v in theirs.items()}:
            problems.append(f"graded pieces differ at degree {p}")
            continue
        # differential blocks
        DL = total.complex.d(p)
        DR = pretr.d_matrix(p)
        nxt_mine = {}
        for m, off, _ in total.blocks.get(p + 1, []):
            for mp, ioff, size in inner[m].blocks.get(p + 1 - m, []):
                nxt_mine[(-m, mp)] = (off + ioff, size)
        nxt_theirs = {blk: (off, size) for blk, off, size in pretr.layout.get(p + 1, [])}
        for bsrc, (o1, s1) in mine.items():
            for btgt, (o2, s2) in nxt_mine.items():
                sub1 = DL.submatrix(range(o2, o2 + s2), range(o1, o1 + s1))
                to1, _ = theirs[bsrc]
                to2, _ = nxt_theirs[btgt]
                sub2 = DR.submatrix(range(to2, to2 + s2), range(to1, to1 + s1))
                if sub1 != sub2:
                    problems.append(
                        f"differential blocks {bsrc} -> {btgt} differ at degree {p}")
    return Report(not problems, problems)


def compare_tot_with_pretr(T: TotComplex, pretr: PreTrHom, keymap) -> Report:
    """Blockwise equality of a single total complex against hom_pretr;
    keymap sends a column index to the matching (i, j) block."""
    problems = []
    for p in set(T.complex.ranks) | set(pretr.underlying.ranks):
        mine = {keymap(m): (off, size) for m, off, size in T.blocks.get(p, [])}
        theirs = {blk: (off, size) for blk, off, size in pretr.layout.get(p, [])}
        if {k: v[1] for k, v in mine.items()} != {k: v[1] for k, v in theirs.items()}:
            problems.append(f"graded pieces differ at degree {p}")
            continue
        nxt_mine = {keymap(m): (off, size) for m, off, size in T.blocks.get(p + 1, [])}
        nxt_theirs = {blk: (off, size) for blk, off, size in pretr.layout.get(p + 1, [])}
        DL, DR = T.complex.d(p), pretr.d_matrix(p)
        for bsrc, (o1, s1) in mine.items():
            for btgt, (o2, s2) in nxt_mine.items():
                sub1 = DL.submatrix(range(o2, o2 + s2), range(o1, o1 + s1))
                to1, _ = theirs[bsrc]
                to2, _ = nxt_theirs[btgt]
                sub2 = DR.submatrix(range(to2, to2 + s2), range(to1, to1 + s1))
                if sub1 != sub2:
                    problems.append(
                        f"differential blocks {bsrc} -> {btgt} differ at degree {p}")
    return Report(not problems, problems)


# -- the first page of the column-filtration spectral sequence -------------------

@dataclass
class E1Page:
    entries: dict[tuple[int, int], FGAbGroup]
    d1: dict[tuple[int, int], IntMatrix]
    d1_squared_zero: bool
    euler_e1: int
    euler_tot: int

    @property
    def euler_ok(self) -> bool:
        return self.euler_e1 == self.euler_tot


def e1_page(C: CComplex) -> E1Page:
    """E1^{p,q} = H^q(column p) with d1 induced by the adjacent map.

    On the right chirality d1 carries the sign (-1)^p that the total
    differential attaches to the adjacent higher map.
    """
    rep = validate_ccomplex(C)
    if not rep.ok:
        raise ObjectMismatch("; ".join(rep.problems))
    cols = C.column_indices()
    data: dict[tuple[int, int], HomologyData] = {}
    entries = {}
    for p in cols:
        col = C.column(p)
        if col.is_zero():
            continue
        lo, hi = col.support()
        for q in range(lo, hi + 1):
            hd = HomologyData(col, q)
            data[(p, q)] = hd
            if not hd.group.is_trivial():
                entries[(p, q)] = hd.group
    d1 = {}
    for p in cols:
        if (p + 1) not in C.columns:
            continue
        F = C.map(p, p + 1)
        for q in C.column(p).degrees():
            if (p, q) not in data or (p + 1, q) not in data:
                continue
            T = induced_homology_matrix(F, q, data[(p, q)], data[(p + 1, q)])
            if C.chirality == RIGHT and p % 2:
                T = T.scale(-1)
            d1[(p, q)] = T
    d1_zero = True
    for p in cols:
        if (p + 1) in C.columns and (p + 2) in C.columns:
            F1 = C.map(p, p + 1)
            F2 = C.map(p + 1, p + 2)
            for q in C.column(p).degrees():
                if (p, q) not in data or (p + 2, q) not in data:
                    continue
                hd0, hd2 = data[(p, q)], data[(p + 2, q)]
                for _, col in hd0.generator_columns():
                    once = F1.block(q).mul_vector(col)
                    twice = F2.block(q).mul_vector(once)
                    if any(hd2.class_coords(twice)):
                        d1_zero = False
    euler_e1 = sum((-1) ** ((p + q) % 2) * g.free_rank for (p, q), g in entries.items())
    T = tot(C)
    euler_tot = 0
    if not T.complex.is_zero():
        lo, hi = T.complex.support()
        for n in range(lo, hi + 1):
            euler_tot += (-1) ** (n % 2) * HomologyData(T.complex, n).group.free_rank
    return E1Page(entries, d1, d1_zero, euler_e1, euler_tot)


def two_column_les_check(C: CComplex) -> Report:
    """Exactness of the long sequence relating column homology to the
    homology of the total complex, for a two-column C-complex.

    After shifting, Tot is the cone of a degree-1 cocycle G between the
    two columns, so 0 -> Y' -> Tot -> X' -> 0 is degreewise split exact
    with connecting map induced by G.
    """
    cols = C.column_indices()
    if len(cols) != 2 or cols[1] != cols[0] + 1:
        raise ObjectMismatch("two adjacent columns required")
    m0, m1 = cols
    T = tot(C)
    Tc = T.complex
    Xp = shift_complex(C.column(m0), -m0)   # differential (-1)^{m0} d
    Yp = shift_complex(C.column(m1), -m1)
    F = C.map(m0, m1)
    g_sign = 1
    if C.chirality == RIGHT and (m1 + 1) % 2:
        g_sign = -1

    def g_block(n: int) -> IntMatrix:
        return F.block(n - m0).scale(g_sign)

    def alpha_block(n: int) -> IntMatrix:
        off, size = T.block_table(n).get(m1, (0, 0))
        return IntMatrix(Tc.rank(n), size,
                         [[1 if u == off + v else 0 for v in range(size)]
                          for u in range(Tc.rank(n))])

    def beta_block(n: int) -> IntMatrix:
        off, size = T.block_table(n).get(m0, (0, 0))
        return IntMatrix(Xp.rank(n), Tc.rank(n),
                         [[1 if v == off + u else 0 for v in range(Tc.rank(n))]
                          for u in range(Xp.rank(n))])

    def induced(block: IntMatrix, h_src: HomologyData, h_tgt: HomologyData) -> IntMatrix:
        columns = [h_tgt.class_coords(block.mul_vector(col))
                   for _, col in h_src.generator_columns()]
        height = len(h_tgt.nontrivial_orders())
        data = list(zip(*columns)) if columns else [() for _ in range(height)]
        return IntMatrix(height, len(columns), data)

    window = sorted(set(_support_window(Xp)) | set(_support_window(Yp))
                    | set(_support_window(Tc)))
    hx = {n: HomologyData(Xp, n) for n in window}
    hy = {n: HomologyData(Yp, n) for n in window}
    ht = {n: HomologyData(Tc, n) for n in window}
    problems = []
    for n in window:
        a_n = induced(alpha_block(n), hy[n], ht[n])
        b_n = induced(beta_block(n), ht[n], hx[n])
        g_n = induced(g_block(n), hx[n], hy[n + 1]) if (n + 1) in hy else None
        if not exact_at(a_n, list(ht[n].nontrivial_orders()),
                        b_n, list(hx[n].nontrivial_orders())):
            problems.append(f"not exact at H^{n}(Tot)")
        if g_n is not None:
            if not exact_at(b_n, list(hx[n].nontrivial_orders()),
                            g_n, list(hy[n + 1].nontrivial_orders())):
                problems.append(f"not exact at H^{n} of the first column")
            a_next = induced(alpha_block(n + 1), hy[n + 1], ht[n + 1]) \
                if (n + 1) in ht else None
            if a_next is not None and not exact_at(
                    g_n, list(hy[n + 1].nontrivial_orders()),
                    a_next, list(ht[n + 1].nontrivial_orders())):
                problems.append(f"not exact at H^{n + 1} of the second column")
    return Report(not problems, problems)


def _support_window(Z: ZComplex):
    if Z.is_zero():
        return []
    lo, hi = Z.support()
    return range(lo - 1, hi + 2)
