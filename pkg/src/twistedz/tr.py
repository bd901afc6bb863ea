"""The homotopy category: H^0 Hom groups, shift, cones and triangle checks.

Morphisms A -> B are classes in H^0 of the Hom complex between twisted
complexes.  The shift and cone follow

    A[1]^i = A^{i+1},   q[1]_{i,j} = (-1)^{i+j+1} q_{i+1,j+1},
    (u[1])^{i,j} = (-1)^{i+j} u^{i+1,j+1},
    C^i = A^{i+1} + B^i,
    t_{i,j} = [[(-1)^{i+j+1} q_{i+1,j+1}, 0], [u^{i+1,j}, (-1)^{i+j} r_{i,j}]]

with structure maps alpha: B -> C of component (-1)^i on B^i and
beta: C -> A[1] projecting onto A^{i+1}.  Everything a triangulated
structure promises (vanishing composites, rotation, fill-in) is decided
by integer linear algebra rather than assumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .zmodule import IntMatrix, FGAbGroup, assemble, solve, kernel_basis
from .complexes import (
    GradedMap,
    HomologyData,
    ObjectMismatch,
    Report,
    induced_homology_matrix,
    _map_is_iso,
    is_quasi_iso,
)
from .dgcat import SumObject, sum_block, assemble_sum_map, realize_sum
from .pretr import (
    TwistedComplex,
    PreTrElement,
    PreTrHom,
    element_operator,
    hom_pretr,
    identity_pretr,
    compose_pretr,
    validate_twisted,
)


# -- Hom groups -------------------------------------------------------------------

@dataclass
class TrHom:
    """H^0 of the Hom complex, with canonical generator representatives."""
    source: TwistedComplex
    target: TwistedComplex
    group: FGAbGroup
    generators: list[PreTrElement]
    orders: tuple[int, ...]
    hom: PreTrHom
    homology: HomologyData

    def class_of(self, u: PreTrElement) -> tuple[int, ...]:
        return self.homology.class_coords(self.hom.flatten(u))


def tr_hom(A: TwistedComplex, B: TwistedComplex, choice=None) -> TrHom:
    hom = hom_pretr(A, B, choice)
    hd = HomologyData(hom.underlying, 0)
    gens = [hom.unflatten(0, list(col)) for _, col in hd.generator_columns()]
    return TrHom(A, B, hd.group, gens, hd.nontrivial_orders(), hom, hd)


# -- shift -------------------------------------------------------------------------

def shift_twisted(A: TwistedComplex, k: int = 1) -> TwistedComplex:
    """Iterated shift; negative k applies the inverse re-indexing."""
    if k == 0:
        return A
    step = 1 if k > 0 else -1
    cur = A
    for _ in range(abs(k)):
        terms = {i - step: cur.term(i) for i in cur.indices()}
        q = {}
        for (i, j), m in cur.q.items():
            sgn = -1 if (i + j + 1) % 2 else 1
            q[(i - step, j - step)] = m.scale(sgn)
        cur = TwistedComplex(cur.instance, terms, q)
    return cur


def shift_element(u: PreTrElement, k: int = 1) -> PreTrElement:
    """(u[1])^{i,j} = (-1)^{i+j} u^{i+1,j+1}, iterated."""
    if k == 0:
        return u
    step = 1 if k > 0 else -1
    cur = u
    for _ in range(abs(k)):
        src = shift_twisted(cur.source, step)
        tgt = shift_twisted(cur.target, step)
        blocks = {}
        for (i, j), m in cur.blocks.items():
            sgn = -1 if (i + j) % 2 else 1
            blocks[(i - step, j - step)] = m.scale(sgn)
        cur = PreTrElement(src, tgt, cur.degree, blocks)
    return cur


# -- cone --------------------------------------------------------------------------

@dataclass
class Triangle:
    u: PreTrElement
    cone: TwistedComplex
    alpha: PreTrElement
    beta: PreTrElement

    @property
    def source(self) -> TwistedComplex:
        return self.u.source

    @property
    def target(self) -> TwistedComplex:
        return self.u.target


def _merge_positions(parts: list[tuple]) -> tuple[SumObject, list[list[int]]]:
    """Sorted sum of several word tuples plus the position of each input
    word in the sorted tuple (duplicates resolved in order)."""
    merged = [w for ws in parts for w in ws]
    combined = SumObject.of(merged)
    used = [False] * len(combined.words)
    positions = []
    for ws in parts:
        pos = []
        for w in ws:
            for p, cw in enumerate(combined.words):
                if not used[p] and cw == w:
                    used[p] = True
                    pos.append(p)
                    break
        positions.append(pos)
    return combined, positions


def straighten_cocycle(u: PreTrElement) -> Optional[PreTrElement]:
    """A homotopic representative with no blocks below the diagonal.

    The cone twists only have room for components A^{i+1} -> B^j with
    i < j; a general cocycle is first corrected by a homotopy so those
    are the only blocks.  Returns None when no such representative
    exists (the source indices then must be re-aligned first).
    """
    if all(i <= j for (i, j) in u.blocks):
        return u
    hom = hom_pretr(u.source, u.target)
    deg = u.degree
    positions = []
    for blk, off, r in hom.layout.get(deg, []):
        if blk[0] > blk[1]:
            positions.extend(range(off, off + r))
    D = hom.d_matrix(deg - 1)
    vec = hom.flatten(u)
    rhs = [vec[p] for p in positions]
    x = solve(IntMatrix(len(positions), D.cols,
                        [D.data[p] for p in positions]), rhs)
    if x is None:
        return None
    h = hom.unflatten(deg - 1, list(x))
    fixed = u - h.d()
    assert all(i <= j for (i, j) in fixed.blocks)
    return fixed


def cone_twisted(u: PreTrElement) -> Triangle:
    """Standard cone of a degree-0 cocycle, with its triangle maps.

    Cocycles with blocks below the diagonal are replaced by a homotopic
    straightened representative first; the triangle stores that
    representative.
    """
    if u.degree != 0:
        raise ObjectMismatch("cone needs a degree-0 element")
    if not u.is_cocycle():
        raise ObjectMismatch("cone needs a cocycle")
    straightened = straighten_cocycle(u)
    if straightened is None:
        raise ObjectMismatch(
            "cocycle has no representative without below-diagonal blocks; "
            "shift the source indices below the target's first")
    u = straightened
    A, B = u.source, u.target
    if A.instance is not B.instance:
        raise ObjectMismatch("cone needs one instance")
    indices = sorted(set(i - 1 for i in A.indices()) | set(B.indices()))
    terms = {}
    apos: dict[int, list[int]] = {}
    bpos: dict[int, list[int]] = {}
    for i in indices:
        combined, (pa, pb) = _merge_positions(
            [A.term(i + 1).words, B.term(i).words])
        if combined.words:
            terms[i] = combined
            apos[i], bpos[i] = pa, pb
    q = {}
    for i in indices:
        for j in indices:
            if i >= j or i not in terms or j not in terms:
                continue
            blocks = {}
            sgn_q = -1 if (i + j + 1) % 2 else 1
            qa = A.q.get((i + 1, j + 1))
            if qa is not None:
                for a in range(len(A.term(i + 1).words)):
                    for b in range(len(A.term(j + 1).words)):
                        blk = sum_block(qa, A.term(i + 1), A.term(j + 1), a, b)
                        if not blk.is_zero():
                            blocks[(apos[j][b], apos[i][a])] = blk.scale(sgn_q)
            ub = u.blocks.get((i + 1, j))
            if ub is not None:
                for a in range(len(A.term(i + 1).words)):
                    for b in range(len(B.term(j).words)):
                        blk = sum_block(ub, A.term(i + 1), B.term(j), a, b)
                        if not blk.is_zero():
                            blocks[(bpos[j][b], apos[i][a])] = blk
            sgn_r = -1 if (i + j) % 2 else 1
            rb = B.q.get((i, j))
            if rb is not None:
                for a in range(len(B.term(i).words)):
                    for b in range(len(B.term(j).words)):
                        blk = sum_block(rb, B.term(i), B.term(j), a, b)
                        if not blk.is_zero():
                            blocks[(bpos[j][b], bpos[i][a])] = blk.scale(sgn_r)
            if blocks:
                q[(i, j)] = assemble_sum_map(terms[i], terms[j], i - j + 1, blocks)
    C = TwistedComplex(A.instance, terms, q)

    from .dgcat import word_offsets

    alpha_blocks = {}
    for i in B.indices():
        if i not in terms:
            continue
        RB = realize_sum(B.term(i))
        RC = realize_sum(terms[i])
        body = {}
        for d in RB.degrees():
            rows = [[0] * RB.rank(d) for _ in range(RC.rank(d))]
            boff = word_offsets(B.term(i), d)
            coff = word_offsets(terms[i], d)
            for b, pos in enumerate(bpos[i]):
                if b in boff and pos in coff:
                    off_b, size = boff[b]
                    off_c, _ = coff[pos]
                    for t in range(size):
                        rows[off_c + t][off_b + t] = 1
            m = IntMatrix(RC.rank(d), RB.rank(d), rows)
            body[d] = m.scale(-1 if i % 2 else 1)
        alpha_blocks[(i, i)] = GradedMap(RB, RC, 0, body)
    alpha = PreTrElement(B, C, 0, alpha_blocks)

    A1 = shift_twisted(A, 1)
    beta_blocks = {}
    for i in indices:
        if i not in terms or not A.term(i + 1).words:
            continue
        RC = realize_sum(terms[i])
        RA = realize_sum(A1.term(i))
        body = {}
        for d in RA.degrees():
            rows = [[0] * RC.rank(d) for _ in range(RA.rank(d))]
            aoff = word_offsets(A1.term(i), d)
            coff = word_offsets(terms[i], d)
            for a, pos in enumerate(apos[i]):
                if a in aoff and pos in coff:
                    off_a, size = aoff[a]
                    off_c, _ = coff[pos]
                    for t in range(size):
                        rows[off_a + t][off_c + t] = 1
            body[d] = IntMatrix(RA.rank(d), RC.rank(d), rows)
        beta_blocks[(i, i)] = GradedMap(RC, RA, 0, body)
    beta = PreTrElement(C, A1, 0, beta_blocks)
    return Triangle(u, C, alpha, beta)


# -- homotopy decisions --------------------------------------------------------------

def is_null_homotopic(u: PreTrElement, choice=None) -> Optional[PreTrElement]:
    """A homotopy h with D(h) = u, or None when the class is nonzero."""
    if not u.is_cocycle():
        raise ObjectMismatch("null-homotopy test needs a cocycle")
    hom = hom_pretr(u.source, u.target, choice)
    x = solve(hom.d_matrix(u.degree - 1), list(hom.flatten(u)))
    if x is None:
        return None
    return hom.unflatten(u.degree - 1, list(x))


def triangle_checks(t: Triangle) -> Report:
    """Cone validity, cocycle checks, vanishing composites and rotation."""
    problems = []
    if not validate_twisted(t.cone).ok:
        problems.append("cone fails Maurer-Cartan")
    if not t.alpha.is_cocycle():
        problems.append("alpha is not a cocycle")
    if not t.beta.is_cocycle():
        problems.append("beta is not a cocycle")
    u1 = shift_element(t.u, 1)
    if not u1.is_cocycle():
        problems.append("shifted morphism is not a cocycle")
    if problems:
        return Report(False, problems)
    if is_null_homotopic(compose_pretr(t.alpha, t.u)) is None:
        problems.append("alpha . u is not null-homotopic")
    if is_null_homotopic(compose_pretr(t.beta, t.alpha)) is None:
        problems.append("beta . alpha is not null-homotopic")
    if is_null_homotopic(compose_pretr(u1, t.beta).scale(-1)) is None:
        problems.append("-u[1] . beta is not null-homotopic")
    return Report(not problems, problems)


def fill_in(t: Triangle, t2: Triangle, phi: PreTrElement, psi: PreTrElement):
    """Search chi: cone -> cone' making both squares commute up to homotopy.

    Unknowns are chi together with the two homotopies; the combined
    Diophantine system is solved exactly.  Returns (chi, h1, h2) or None.
    """
    C, C2 = t.cone, t2.cone
    hom_cc = hom_pretr(C, C2)
    hom_bc = hom_pretr(t.target, C2)
    A1 = shift_twisted(t.source, 1)
    hom_ca = hom_pretr(C, shift_twisted(t2.source, 1))
    n_c = hom_cc.rank(0)

    R_alpha = element_operator(hom_cc, 0, hom_bc, 0,
                               lambda x: compose_pretr(x, t.alpha))
    L_beta = element_operator(hom_cc, 0, hom_ca, 0,
                              lambda x: compose_pretr(t2.beta, x))
    D_cc = hom_cc.d_matrix(0)
    D_bc = hom_bc.d_matrix(-1)
    D_ca = hom_ca.d_matrix(-1)

    rhs1 = hom_bc.flatten(compose_pretr(t2.alpha, psi))
    rhs2 = hom_ca.flatten(compose_pretr(shift_element(phi, 1), t.beta))

    big = assemble(
        {(0, 0): D_cc,
         (1, 0): R_alpha, (1, 1): D_bc.scale(-1),
         (2, 0): L_beta, (2, 2): D_ca.scale(-1)},
        [D_cc.rows, R_alpha.rows, L_beta.rows],
        [n_c, D_bc.cols, D_ca.cols])
    rhs = [0] * D_cc.rows + list(rhs1) + list(rhs2)
    x = solve(big, rhs)
    if x is None:
        return None
    chi = hom_cc.unflatten(0, list(x[:n_c]))
    h1 = hom_bc.unflatten(-1, list(x[n_c:n_c + D_bc.cols]))
    h2 = hom_ca.unflatten(-1, list(x[n_c + D_bc.cols:]))
    return chi, h1, h2


# -- choice independence ----------------------------------------------------------

def meet_choice(A: TwistedComplex, B: TwistedComplex, ch1: dict, ch2: dict) -> dict:
    """Blockwise listed lower bound of two choices (single-atom blocks)."""
    inst = A.instance
    out = {}
    for key in set(ch1) | set(ch2):
        m1, m2 = ch1.get(key), ch2.get(key)
        if m1 is None:
            out[key] = m2
        elif m2 is None or m1 == m2:
            out[key] = m1
        else:
            i, j = key
            a_atom = A.term(i).words[0].atoms[0]
            b_atom = B.term(j).words[0].atoms[0]
            fam = inst.family(a_atom, b_atom)
            out[key] = fam.meet_of([m1, m2])
    return out


@dataclass
class ChoiceIndependenceReport:
    group_meet: FGAbGroup
    group_1: FGAbGroup
    group_2: FGAbGroup
    iso_1: bool
    iso_2: bool

    @property
    def ok(self) -> bool:
        return self.iso_1 and self.iso_2 and self.group_1 == self.group_2


def choice_independence(A: TwistedComplex, B: TwistedComplex,
                        ch1: dict, ch2: dict) -> ChoiceIndependenceReport:
    """H^0 computed under two sufficient choices, compared through the
    zig-zag of inclusions from their listed meet."""
    ch0 = meet_choice(A, B, ch1, ch2)
    h0 = hom_pretr(A, B, ch0)
    h1 = hom_pretr(A, B, ch1)
    h2 = hom_pretr(A, B, ch2)
    results = []
    for hv in (h1, h2):
        inc = h0.inclusion_into(hv)
        if not inc.is_chain_map():
            raise ObjectMismatch("meet inclusion is not a chain map")
        hd0 = HomologyData(h0.underlying, 0)
        hdv = HomologyData(hv.underlying, 0)
        T = induced_homology_matrix(inc, 0, hd0, hdv)
        results.append((_map_is_iso(T, hd0.nontrivial_orders(), hdv.nontrivial_orders()),
                        hdv.group))
    g0 = HomologyData(h0.underlying, 0).group
    return ChoiceIndependenceReport(g0, results[0][1], results[1][1],
                                    results[0][0], results[1][0])
