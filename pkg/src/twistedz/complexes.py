"""Bounded cochain complexes of finitely generated free abelian groups.

Sign conventions fixed here and used everywhere above:

* Hom-complex differential:   d(f) = d_B . f - (-1)^|f| f . d_A
* dual complex:               d on (A*)^n is -(-1)^n (d_A at -n-1)^T,
  the unique choice making the evaluation pairing a chain map
* shifted complex:            d_{A[k]} = (-1)^k d_A
* tensor differential:        d(a x b) = da x b + (-1)^|a| a x db
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .zmodule import (
    IntMatrix,
    FGAbGroup,
    DimensionMismatch,
    assemble,
    cokernel_invariants,
    kernel_basis,
    snf_extended,
    solve_matrix,
    column_basis,
    unimodular_inverse,
)


class InvalidComplex(ValueError):
    pass


class NotAChainMap(ValueError):
    pass


class ObjectMismatch(ValueError):
    pass


@dataclass
class Report:
    ok: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


class ZComplex:
    """Bounded cochain complex: ranks per degree plus differentials.

    d(n) maps degree n to degree n+1 and has shape rank(n+1) x rank(n).
    Construction normalizes away zero ranks and differentials with an
    empty side; d^2 = 0 is *not* enforced here (see validate()).
    """

    __slots__ = ("ranks", "diffs")

    def __init__(self, ranks: dict[int, int], diffs: Optional[dict[int, IntMatrix]] = None):
        rk = {int(n): int(r) for n, r in ranks.items() if r}
        if any(r < 0 for r in rk.values()):
            raise InvalidComplex("negative rank")
        dd = {}
        for n, m in (diffs or {}).items():
            n = int(n)
            r_tgt, r_src = rk.get(n + 1, 0), rk.get(n, 0)
            if m.rows != r_tgt or m.cols != r_src:
                raise InvalidComplex(
                    f"differential at degree {n} is {m.rows}x{m.cols}, expected {r_tgt}x{r_src}")
            if r_tgt and r_src:
                dd[n] = m
        # canonical: store a matrix for every adjacent pair of nonzero ranks
        for n in rk:
            if rk.get(n + 1, 0) and n not in dd:
                dd[n] = IntMatrix.zeros(rk[n + 1], rk[n])
        self.ranks = rk
        self.diffs = dd

    # -- structure --------------------------------------------------------
    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def d(self, n: int) -> IntMatrix:
        m = self.diffs.get(n)
        if m is None:
            m = IntMatrix.zeros(self.rank(n + 1), self.rank(n))
        return m

    def degrees(self) -> list[int]:
        return sorted(self.ranks)

    def support(self) -> Optional[tuple[int, int]]:
        if not self.ranks:
            return None
        ds = self.degrees()
        return ds[0], ds[-1]

    def is_zero(self) -> bool:
        return not self.ranks

    def total_rank(self) -> int:
        return sum(self.ranks.values())

    def __eq__(self, other):
        return (isinstance(other, ZComplex)
                and self.ranks == other.ranks and self.diffs == other.diffs)

    def __hash__(self):
        return hash((frozenset(self.ranks.items()), frozenset(self.diffs.items())))

    def __repr__(self):
        return f"ZComplex(ranks={self.ranks})"

    @classmethod
    def zero(cls) -> "ZComplex":
        return cls({})

    @classmethod
    def free_at(cls, degree: int, rank: int = 1) -> "ZComplex":
        return cls({degree: rank})

    @classmethod
    def two_term(cls, matrix: IntMatrix, bottom_degree: int = 0) -> "ZComplex":
        """Complex Z^c -> Z^r concentrated in degrees n, n+1."""
        return cls({bottom_degree: matrix.cols, bottom_degree + 1: matrix.rows},
                   {bottom_degree: matrix})

    def direct_sum(self, other: "ZComplex") -> "ZComplex":
        ranks = {}
        for n in set(self.ranks) | set(other.ranks):
            ranks[n] = self.rank(n) + other.rank(n)
        diffs = {}
        for n in ranks:
            if ranks.get(n + 1, 0) and ranks.get(n, 0):
                diffs[n] = assemble(
                    {(0, 0): self.d(n), (1, 1): other.d(n)},
                    [self.rank(n + 1), other.rank(n + 1)], [self.rank(n), other.rank(n)])
        return ZComplex(ranks, diffs)


def validate(A: ZComplex) -> Report:
    """Check d(n+1) . d(n) = 0 at every degree; report the first failure."""
    for n in sorted(A.diffs):
        if A.rank(n + 2):
            prod = A.d(n + 1) @ A.d(n)
            if not prod.is_zero():
                return Report(False, [f"d.d != 0 at degree {n}"])
    return Report(True)


class GradedMap:
    """Degree-homogeneous family of matrices between two complexes.

    body[d] has shape target.rank(d + degree) x source.rank(d); zero
    blocks are never stored, so structural equality is meaningful.
    """

    __slots__ = ("source", "target", "degree", "body")

    def __init__(self, source: ZComplex, target: ZComplex, degree: int,
                 body: Optional[dict[int, IntMatrix]] = None):
        self.source = source
        self.target = target
        self.degree = int(degree)
        bb = {}
        for d, m in (body or {}).items():
            d = int(d)
            r_tgt, r_src = target.rank(d + degree), source.rank(d)
            if m.rows != r_tgt or m.cols != r_src:
                raise DimensionMismatch(
                    f"block at degree {d} is {m.rows}x{m.cols}, expected {r_tgt}x{r_src}")
            if not m.is_zero():
                bb[d] = m
        self.body = bb

    @classmethod
    def zero(cls, source: ZComplex, target: ZComplex, degree: int) -> "GradedMap":
        return cls(source, target, degree)

    @classmethod
    def identity(cls, A: ZComplex) -> "GradedMap":
        return cls(A, A, 0, {n: IntMatrix.identity(r) for n, r in A.ranks.items()})

    def block(self, d: int) -> IntMatrix:
        m = self.body.get(d)
        if m is None:
            m = IntMatrix.zeros(self.target.rank(d + self.degree), self.source.rank(d))
        return m

    def is_zero(self) -> bool:
        return not self.body

    def __eq__(self, other):
        return (isinstance(other, GradedMap)
                and self.source == other.source and self.target == other.target
                and self.degree == other.degree and self.body == other.body)

    def __repr__(self):
        return f"GradedMap(degree={self.degree}, blocks={sorted(self.body)})"

    def __add__(self, other: "GradedMap") -> "GradedMap":
        self._compatible(other)
        body = {}
        for d in set(self.body) | set(other.body):
            body[d] = self.block(d) + other.block(d)
        return GradedMap(self.source, self.target, self.degree, body)

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k: int) -> "GradedMap":
        if k == 0:
            return GradedMap(self.source, self.target, self.degree)
        return GradedMap(self.source, self.target, self.degree,
                         {d: m.scale(k) for d, m in self.body.items()})

    def _compatible(self, other: "GradedMap"):
        if (self.source != other.source or self.target != other.target
                or self.degree != other.degree):
            raise ObjectMismatch("graded maps are not parallel")

    def differential(self) -> "GradedMap":
        """d(f) = d_B . f - (-1)^|f| f . d_A, a map of degree |f|+1."""
        n = self.degree
        sgn = -1 if n % 2 == 0 else 1  # -(-1)^n
        body: dict[int, IntMatrix] = {}
        for d, m in self.body.items():
            left = self.target.d(d + n) @ m
            if not left.is_zero():
                body[d] = body.get(d, IntMatrix.zeros(left.rows, left.cols)) + left
        for d, m in self.body.items():
            if self.source.rank(d - 1):
                right = (m @ self.source.d(d - 1)).scale(sgn)
                if not right.is_zero():
                    e = d - 1
                    cur = body.get(e)
                    body[e] = right if cur is None else cur + right
        return GradedMap(self.source, self.target, n + 1, body)

    def is_cocycle(self) -> bool:
        return self.differential().is_zero()

    def is_chain_map(self) -> bool:
        return self.degree == 0 and self.is_cocycle()


def compose_graded(g: GradedMap, f: GradedMap) -> GradedMap:
    """g after f; degrees add.  Total composition of the base instance."""
    if f.target != g.source:
        raise ObjectMismatch("compose_graded: target of f differs from source of g")
    body = {}
    for d, mf in f.body.items():
        mg = g.body.get(d + f.degree)
        if mg is not None:
            body[d] = mg @ mf
    return GradedMap(f.source, g.target, f.degree + g.degree, body)


def dmap(A: ZComplex) -> GradedMap:
    """The differential of A packaged as a degree-1 graded endomap."""
    return GradedMap(A, A, 1, dict(A.diffs))


def scale_complex_diff(A: ZComplex, sign: int) -> ZComplex:
    return ZComplex(dict(A.ranks), {n: m.scale(sign) for n, m in A.diffs.items()})


def shift_complex(A: ZComplex, k: int) -> ZComplex:
    """A[k]^n = A^(n+k) with differential (-1)^k d."""
    sgn = -1 if k % 2 else 1
    return ZComplex({n - k: r for n, r in A.ranks.items()},
                    {n - k: m.scale(sgn) for n, m in A.diffs.items()})


def dual_complex(A: ZComplex) -> ZComplex:
    """(A*)^n = Hom(A^(-n), Z) with d = -(-1)^n (transpose of d_A at -n-1)."""
    ranks = {-n: r for n, r in A.ranks.items()}
    diffs = {}
    for n in ranks:
        if ranks.get(n + 1, 0) and ranks.get(n, 0):
            sgn = -1 if n % 2 == 0 else 1
            diffs[n] = A.d(-n - 1).transpose().scale(sgn)
    return ZComplex(ranks, diffs)


def tensor_complex(A: ZComplex, B: ZComplex) -> ZComplex:
    """Degreewise tensor, summands ordered by ascending A-degree."""
    ranks: dict[int, int] = {}
    layout: dict[int, list[tuple[int, int]]] = {}
    degree_range = range(_lo(A) + _lo(B), _hi(A) + _hi(B) + 1) if A.ranks and B.ranks else []
    for n in degree_range:
        pairs = [(p, n - p) for p in A.degrees() if B.rank(n - p)]
        if pairs:
            layout[n] = pairs
            ranks[n] = sum(A.rank(p) * B.rank(q) for p, q in pairs)
    diffs = {}
    for n, pairs in layout.items():
        tgt_pairs = layout.get(n + 1)
        if not tgt_pairs:
            continue
        tgt_index = {pq: i for i, pq in enumerate(tgt_pairs)}
        blocks = {}
        for j, (p, q) in enumerate(pairs):
            if (p + 1, q) in tgt_index:
                blocks[(tgt_index[(p + 1, q)], j)] = A.d(p).kron(IntMatrix.identity(B.rank(q)))
            if (p, q + 1) in tgt_index:
                m = IntMatrix.identity(A.rank(p)).kron(B.d(q))
                if p % 2:
                    m = m.scale(-1)
                cur = blocks.get((tgt_index[(p, q + 1)], j))
                blocks[(tgt_index[(p, q + 1)], j)] = m if cur is None else cur + m
        diffs[n] = assemble(blocks,
                            [A.rank(p) * B.rank(q) for p, q in tgt_pairs],
                            [A.rank(p) * B.rank(q) for p, q in pairs])
    return ZComplex(ranks, diffs)


def _lo(A: ZComplex) -> int:
    return A.degrees()[0] if A.ranks else 0


def _hi(A: ZComplex) -> int:
    return A.degrees()[-1] if A.ranks else 0


def cone_of_map(f: GradedMap) -> ZComplex:
    """cone(f)^n = A^(n+1) + B^n with differential [[-d_A, 0], [f, d_B]]."""
    if f.degree != 0 or not f.is_chain_map():
        raise NotAChainMap("cone_of_map needs a degree-0 chain map")
    A, B = f.source, f.target
    ranks = {}
    for n in set(k - 1 for k in A.ranks) | set(B.ranks):
        r = A.rank(n + 1) + B.rank(n)
        if r:
            ranks[n] = r
    diffs = {}
    for n in ranks:
        if not ranks.get(n + 1, 0):
            continue
        blocks = {
            (0, 0): A.d(n + 1).scale(-1),
            (1, 0): f.block(n + 1),
            (1, 1): B.d(n),
        }
        diffs[n] = assemble(blocks, [A.rank(n + 2), B.rank(n + 1)], [A.rank(n + 1), B.rank(n)])
    return ZComplex(ranks, diffs)


# -- homology ----------------------------------------------------------------

class HomologyData:
    """H^n(A) presented as coker(rel) on a kernel basis.

    kernel: columns form a saturated basis K of ker d(n).
    rel:    boundaries of d(n-1) written in K-coordinates.
    After SNF(rel) = U rel V, the classes of K @ Uinv columns generate
    H^n with orders given by the diagonal (0 meaning infinite order).
    """

    def __init__(self, A: ZComplex, n: int):
        self.complex = A
        self.n = n
        self.kernel = kernel_basis(A.d(n))
        boundaries = A.d(n - 1)
        rel = solve_matrix(self.kernel, boundaries)
        if rel is None:
            raise InvalidComplex("boundaries do not lie in cocycles; complex is invalid")
        self.rel = rel
        U, D, _, Uinv, _ = snf_extended(rel)
        self._U = U
        self._Uinv = Uinv
        k = self.kernel.cols
        diag = [D.data[i][i] for i in range(min(D.rows, D.cols))]
        self.orders = tuple((diag[i] if i < len(diag) else 0) for i in range(k))
        free = sum(1 for o in self.orders if o == 0)
        torsion = tuple(o for o in self.orders if o > 1)
        self.group = FGAbGroup(free, torsion)

    def generator_columns(self) -> list[tuple[int, tuple[int, ...]]]:
        """(order, ambient column) for every nontrivial canonical generator."""
        reps = self.kernel @ self._Uinv
        out = []
        for t, o in enumerate(self.orders):
            if o != 1:
                out.append((o, reps.column(t)))
        return out

    def class_coords(self, v) -> tuple[int, ...]:
        """Coordinates of a cocycle's class on the canonical generators."""
        c = solve_matrix(self.kernel, IntMatrix.column_vector(list(v)))
        if c is None:
            raise ValueError("vector is not a cocycle")
        full = self._U @ c
        out = []
        for t, o in enumerate(self.orders):
            x = full.data[t][0]
            if o == 1:
                continue
            out.append(x % o if o else x)
        return tuple(out)

    def nontrivial_orders(self) -> tuple[int, ...]:
        return tuple(o for o in self.orders if o != 1)

    def is_boundary(self, v) -> bool:
        return all(x == 0 for x in self.class_coords(v))


def homology(A: ZComplex, n: int) -> FGAbGroup:
    """H^n(A) = ker d(n) / im d(n-1) in canonical invariant-factor form."""
    rep = validate(A)
    if not rep.ok:
        raise InvalidComplex("; ".join(rep.problems))
    return HomologyData(A, n).group


def homology_in_range(A: ZComplex) -> dict[int, FGAbGroup]:
    if A.is_zero():
        return {}
    lo, hi = A.support()
    out = {}
    for n in range(lo, hi + 1):
        g = homology(A, n)
        if not g.is_trivial():
            out[n] = g
    return out


def induced_homology_matrix(f: GradedMap, n: int,
                            hx: Optional[HomologyData] = None,
                            hy: Optional[HomologyData] = None) -> IntMatrix:
    """Matrix of H^n(f) on the canonical generators of source and target."""
    if not f.is_chain_map():
        raise NotAChainMap("induced map needs a chain map")
    hx = hx or HomologyData(f.source, n)
    hy = hy or HomologyData(f.target, n)
    cols = []
    for _, col in hx.generator_columns():
        img = f.block(n).mul_vector(col)
        cols.append(hy.class_coords(img))
    height = len(hy.nontrivial_orders())
    data = list(zip(*cols)) if cols else [() for _ in range(height)]
    return IntMatrix(height, len(cols), data)


def _map_is_iso(T: IntMatrix, src_orders, tgt_orders) -> bool:
    """Is the map of presented groups given by T an isomorphism?"""
    # abstract groups must already agree ...
    def inv(orders):
        free = sum(1 for o in orders if o == 0)
        return FGAbGroup(free, tuple(o for o in orders if o > 1))
    if inv(src_orders) != inv(tgt_orders):
        return False
    # ... and a surjection between isomorphic f.g. groups is an isomorphism
    rel = IntMatrix(T.rows, len(tgt_orders),
                    [[tgt_orders[i] if i == j else 0 for j in range(len(tgt_orders))]
                     for i in range(T.rows)])
    return cokernel_invariants(T.hstack(rel)).is_trivial()


def induced_map_is_iso(f: GradedMap, n: int) -> bool:
    hx = HomologyData(f.source, n)
    hy = HomologyData(f.target, n)
    T = induced_homology_matrix(f, n, hx, hy)
    return _map_is_iso(T, hx.nontrivial_orders(), hy.nontrivial_orders())


def is_quasi_iso(f: GradedMap) -> bool:
    """True iff cone(f) is acyclic in every degree."""
    cone = cone_of_map(f)
    if cone.is_zero():
        return True
    lo, hi = cone.support()
    return all(homology(cone, n).is_trivial() for n in range(lo - 1, hi + 2))


def exact_at(phi: IntMatrix, mid_orders, psi: IntMatrix, tgt_orders) -> bool:
    """Exactness of presented groups  G1 --phi--> G2 --psi--> G3  at G2.

    Groups are Z^k modulo diagonal relations given by their order vectors
    (order 0 meaning a free generator).
    """
    k2 = len(mid_orders)
    k3 = len(tgt_orders)
    rel3 = IntMatrix(k3, k3, [[tgt_orders[i] if i == j else 0 for j in range(k3)]
                              for i in range(k3)])
    # {x in Z^k2 : psi x lies in im rel3}
    big = kernel_basis(psi.hstack(rel3))
    P = big.submatrix(range(k2), range(big.cols))
    S = column_basis(P)
    rel2 = IntMatrix(k2, k2, [[mid_orders[i] if i == j else 0 for j in range(k2)]
                              for i in range(k2)])
    gens = phi.hstack(rel2)
    C = solve_matrix(S, gens)
    if C is None:
        return False  # image not inside the kernel: not even a complex
    return cokernel_invariants(C).is_trivial()


# -- Hom complexes -------------------------------------------------------------

class HomComplex:
    """Hom(A, B) with its block decomposition Hom^n = sum_d Hom(A^d, B^(d+n)).

    layout[n] lists (source degree d, offset, rows, cols) with blocks
    flattened row-major; flatten/unflatten convert between GradedMaps of
    degree n and coordinate vectors of the underlying complex.
    """

    def __init__(self, A: ZComplex, B: ZComplex):
        self.source = A
        self.target = B
        layout: dict[int, list[tuple[int, int, int, int]]] = {}
        ranks: dict[int, int] = {}
        if A.ranks and B.ranks:
            n_lo = _lo(B) - _hi(A)
            n_hi = _hi(B) - _lo(A)
            for n in range(n_lo, n_hi + 1):
                off = 0
                blocks = []
                for d in A.degrees():
                    r, c = B.rank(d + n), A.rank(d)
                    if r and c:
                        blocks.append((d, off, r, c))
                        off += r * c
                if blocks:
                    layout[n] = blocks
                    ranks[n] = off
        self.layout = layout
        diffs = {}
        for n, blocks in layout.items():
            tgt_blocks = layout.get(n + 1)
            if not tgt_blocks:
                continue
            tgt_pos = {d: i for i, (d, _, _, _) in enumerate(tgt_blocks)}
            parts = {}
            for j, (d, _, r, c) in enumerate(blocks):
                # left part d_B . f stays in source block d
                if d in tgt_pos:
                    parts[(tgt_pos[d], j)] = B.d(d + n).kron(IntMatrix.identity(c))
                # right part -(-1)^n f . d_A lands in block d-1
                if d - 1 in tgt_pos:
                    m = IntMatrix.identity(r).kron(A.d(d - 1).transpose())
                    if n % 2 == 0:
                        m = m.scale(-1)
                    key = (tgt_pos[d - 1], j)
                    parts[key] = m if key not in parts else parts[key] + m
            diffs[n] = assemble(parts, [r * c for _, _, r, c in tgt_blocks],
                                [r * c for _, _, r, c in blocks])
        self.complex = ZComplex(ranks, diffs)

    def piece_rank(self, n: int) -> int:
        return self.complex.rank(n)

    def flatten(self, f: GradedMap) -> tuple[int, ...]:
        if f.source != self.source or f.target != self.target:
            raise ObjectMismatch("graded map does not belong to this Hom complex")
        out = [0] * self.piece_rank(f.degree)
        for d, off, r, c in self.layout.get(f.degree, []):
            m = f.block(d)
            for i in range(r):
                base = off + i * c
                row = m.data[i]
                for j in range(c):
                    out[base + j] = row[j]
        return tuple(out)

    def unflatten(self, n: int, vec) -> GradedMap:
        body = {}
        for d, off, r, c in self.layout.get(n, []):
            body[d] = IntMatrix(r, c, [vec[off + i * c: off + i * c + c] for i in range(r)])
        return GradedMap(self.source, self.target, n, body)

    def d_matrix(self, n: int) -> IntMatrix:
        return self.complex.d(n)


_HOM_CACHE: dict[tuple[ZComplex, ZComplex], HomComplex] = {}


def hom_complex(A: ZComplex, B: ZComplex) -> HomComplex:
    key = (A, B)
    hc = _HOM_CACHE.get(key)
    if hc is None:
        hc = _HOM_CACHE[key] = HomComplex(A, B)
    return hc


def left_compose_operator(hc_src: HomComplex, hc_tgt: HomComplex,
                          q: GradedMap, l: int) -> IntMatrix:
    """Matrix of f |-> q . f from Hom^l(A, B) to Hom^(l+|q|)(A, B').

    Both Hom complexes must share the source A; q maps B to B'.
    """
    src_blocks = hc_src.layout.get(l, [])
    tgt_blocks = hc_tgt.layout.get(l + q.degree, [])
    tgt_index = {d: i for i, (d, _, _, _) in enumerate(tgt_blocks)}
    parts = {}
    for j, (d, _, r, c) in enumerate(src_blocks):
        i = tgt_index.get(d)
        if i is None:
            continue
        qb = q.block(d + l)
        if not qb.is_zero():
            parts[(i, j)] = qb.kron(IntMatrix.identity(c))
    return assemble(parts, [r * c for _, _, r, c in tgt_blocks],
                    [r * c for _, _, r, c in src_blocks])


def right_compose_operator(hc_src: HomComplex, hc_tgt: HomComplex,
                           p: GradedMap, l: int) -> IntMatrix:
    """Matrix of f |-> f . p from Hom^l(A, B) to Hom^(l+|p|)(A', B).

    Both Hom complexes must share the target B; p maps A' to A.
    """
    src_blocks = hc_src.layout.get(l, [])
    tgt_blocks = hc_tgt.layout.get(l + p.degree, [])
    tgt_index = {d: i for i, (d, _, _, _) in enumerate(tgt_blocks)}
    parts = {}
    for j, (d, _, r, c) in enumerate(src_blocks):
        e = d - p.degree
        i = tgt_index.get(e)
        if i is None:
            continue
        pb = p.block(e)
        if not pb.is_zero():
            parts[(i, j)] = IntMatrix.identity(r).kron(pb.transpose())
    return assemble(parts, [r * c for _, _, r, c in tgt_blocks],
                    [r * c for _, _, r, c in src_blocks])
