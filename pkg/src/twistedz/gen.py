"""Seeded random generators for complexes, twisted complexes and friends.

All generators take an explicit random.Random so that audit suites and
CLI commands are reproducible bit-for-bit.
"""
from __future__ import annotations

import random
from typing import Optional

from .zmodule import IntMatrix, kernel_basis, solve, solve_matrix
from .complexes import ZComplex, GradedMap, compose_graded, hom_complex


def _sparse_entry(rng: random.Random, bound: int = 2, zero_bias: float = 0.5) -> int:
    if rng.random() < zero_bias:
        return 0
    v = rng.randint(1, bound)
    return v if rng.random() < 0.5 else -v


def random_complex(rng: random.Random, max_len: int = 3, max_rank: int = 3,
                   lo: int = -3, hi: int = 3) -> ZComplex:
    """Random bounded complex with exact d.d = 0 within degrees [lo, hi]."""
    length = rng.randint(1, max_len)
    start = rng.randint(lo, hi - (length - 1))
    degs = list(range(start, start + length))
    ranks = {n: rng.randint(1, max_rank) for n in degs}
    diffs: dict[int, IntMatrix] = {}
    prev: Optional[IntMatrix] = None
    for n in degs[:-1]:
        r_tgt, r_src = ranks[n + 1], ranks[n]
        if prev is None:
            m = IntMatrix(r_tgt, r_src,
                          [[_sparse_entry(rng) for _ in range(r_src)] for _ in range(r_tgt)])
        else:
            # rows must pair to zero with the previous differential
            basis = kernel_basis(prev.transpose())
            rows = []
            for _ in range(r_tgt):
                coeffs = [_sparse_entry(rng) for _ in range(basis.cols)]
                rows.append(list(basis.mul_vector(coeffs)))
            m = IntMatrix(r_tgt, r_src, rows)
        diffs[n] = m
        prev = m
    return ZComplex(ranks, diffs)


def random_graded_map(rng: random.Random, A: ZComplex, B: ZComplex, degree: int,
                      bound: int = 2) -> GradedMap:
    body = {}
    for d in A.degrees():
        r, c = B.rank(d + degree), A.rank(d)
        if r and c:
            body[d] = IntMatrix(r, c, [[_sparse_entry(rng, bound) for _ in range(c)]
                                       for _ in range(r)])
    return GradedMap(A, B, degree, body)


def random_cocycle(rng: random.Random, A: ZComplex, B: ZComplex, degree: int,
                   bound: int = 2) -> GradedMap:
    """Random element of ker(d) in Hom^degree(A, B), exact by construction."""
    hc = hom_complex(A, B)
    basis = kernel_basis(hc.d_matrix(degree))
    coeffs = [_sparse_entry(rng, bound) for _ in range(basis.cols)]
    return hc.unflatten(degree, list(basis.mul_vector(coeffs)))


def random_chain_map(rng: random.Random, A: ZComplex, B: ZComplex, bound: int = 2) -> GradedMap:
    return random_cocycle(rng, A, B, 0, bound)


def _nonzero_cocycle(rng, A, B, degree, tries=4):
    best = random_cocycle(rng, A, B, degree)
    for _ in range(tries):
        if not best.is_zero():
            return best
        best = random_cocycle(rng, A, B, degree)
    return best


def random_twisted(rng: random.Random, instance=None, max_terms: int = 4,
                   max_rank: int = 3, lo: int = -3, hi: int = 3,
                   max_len: int = 3, attempts: int = 30,
                   index_window: tuple[int, int] = (-1, 2)):
    """Random twisted complex satisfying Maurer-Cartan exactly.

    Adjacent twists are random chain maps; higher twists are found by
    integer solving of the Maurer-Cartan system.  Draws with no integral
    solution are discarded and retried, ending in a guaranteed two-term
    fallback.  Term indices stay inside index_window.
    """
    from .dgcat import Atom, SumObject, TOTAL
    from .pretr import TwistedComplex
    instance = instance or TOTAL
    for _ in range(attempts):
        T = _try_random_twisted(rng, instance, max_terms, max_rank, lo, hi,
                                max_len, index_window)
        if T is not None:
            return T
    # fallback: two terms joined by one chain map (Maurer-Cartan is trivial)
    prefix = f"t{rng.getrandbits(24):06x}"
    i0 = index_window[0]
    a0 = Atom(f"{prefix}.0", random_complex(rng, max_len, max_rank, lo, hi))
    a1 = Atom(f"{prefix}.1", random_complex(rng, max_len, max_rank, lo, hi))
    f = _nonzero_cocycle(rng, a0.complex, a1.complex, 0)
    i1 = min(i0 + 1, index_window[1])
    if i1 == i0:
        return TwistedComplex(instance, {i0: SumObject.atom(a0)})
    return TwistedComplex(instance,
                          {i0: SumObject.atom(a0), i1: SumObject.atom(a1)},
                          {(i0, i1): f} if not f.is_zero() else {})


def _try_random_twisted(rng, instance, max_terms, max_rank, lo, hi, max_len,
                        index_window):
    from .dgcat import Atom, SumObject
    from .pretr import TwistedComplex
    w_lo, w_hi = index_window
    nterms = min(rng.randint(1, max_terms), w_hi - w_lo + 1)
    start = rng.randint(w_lo, max(w_lo, w_hi - (nterms - 1)))
    prefix = f"t{rng.getrandbits(24):06x}"
    indices = list(range(start, start + nterms))
    terms = {}
    for i in indices:
        atom = Atom(f"{prefix}.{i}", random_complex(rng, max_len, max_rank, lo, hi))
        terms[i] = SumObject.atom(atom)
    real = {i: s.words[0].atoms[0].complex for i, s in terms.items()}
    q: dict[tuple[int, int], GradedMap] = {}
    for i in indices[:-1]:
        f = _nonzero_cocycle(rng, real[i], real[i + 1], 0)
        if not f.is_zero():
            q[(i, i + 1)] = f
    for span in range(2, nterms):
        for i in indices:
            j = i + span
            if j not in terms:
                continue
            deg = i - j + 1
            rhs = GradedMap.zero(real[i], real[j], deg + 1)
            for k in range(i + 1, j):
                if (i, k) in q and (k, j) in q:
                    rhs = rhs + compose_graded(q[(k, j)], q[(i, k)])
            hc = hom_complex(real[i], real[j])
            if rhs.is_zero():
                cand = random_cocycle(rng, real[i], real[j], deg)
                if not cand.is_zero():
                    q[(i, j)] = cand
                continue
            target = rhs if (j + 1) % 2 == 0 else rhs.scale(-1)
            sol = solve(hc.d_matrix(deg), list(hc.flatten(target)))
            if sol is None:
                return None
            qij = hc.unflatten(deg, list(sol))
            if rng.random() < 0.5:
                qij = qij + random_cocycle(rng, real[i], real[j], deg)
            if not qij.is_zero():
                q[(i, j)] = qij
    return TwistedComplex(instance, terms, q)


def random_single_twisted(rng: random.Random, index: int = 0, instance=None,
                          max_rank: int = 3, lo: int = -3, hi: int = 3,
                          max_len: int = 3):
    """One-term twisted complex at a fixed index."""
    from .dgcat import Atom, TOTAL
    from .pretr import TwistedComplex
    instance = instance or TOTAL
    name = f"s{rng.getrandbits(24):06x}.{index}"
    atom = Atom(name, random_complex(rng, max_len, max_rank, lo, hi))
    return TwistedComplex.single(atom, index=index, instance=instance)


def random_pretr_element(rng: random.Random, A, B, degree: int, bound: int = 2):
    """Random element of the Hom complex between twisted complexes."""
    from .dgcat import realize_sum
    from .pretr import PreTrElement
    blocks = {}
    for i in A.indices():
        for j in B.indices():
            if rng.random() < 0.3:
                continue
            gm = random_graded_map(rng, realize_sum(A.term(i)), realize_sum(B.term(j)),
                                   degree + i - j, bound)
            if not gm.is_zero():
                blocks[(i, j)] = gm
    return PreTrElement(A, B, degree, blocks)


def random_pretr_cocycle(rng: random.Random, hom, degree: int = 0, bound: int = 2):
    """Random D-cocycle drawn from the kernel of the assembled differential."""
    basis = kernel_basis(hom.d_matrix(degree))
    coeffs = [_sparse_entry(rng, bound) for _ in range(basis.cols)]
    return hom.unflatten(degree, list(basis.mul_vector(coeffs)))


def random_ccomplex(rng: random.Random, chirality: str = "left", max_cols: int = 4,
                    max_rank: int = 3, lo: int = -3, hi: int = 3,
                    max_len: int = 3, attempts: int = 30):
    """Random C-complex satisfying the chirality identity exactly.

    Adjacent maps are chain maps; higher homotopies solve the coherence
    system over the integers, discarding draws without solutions.
    """
    from .ccomplex import CComplex
    for _ in range(attempts):
        C = _try_random_ccomplex(rng, chirality, max_cols, max_rank, lo, hi, max_len)
        if C is not None:
            return C
    cols = {0: random_complex(rng, max_len, max_rank, lo, hi),
            1: random_complex(rng, max_len, max_rank, lo, hi)}
    f = _nonzero_cocycle(rng, cols[0], cols[1], 0)
    higher = {(0, 1): f} if not f.is_zero() else {}
    return CComplex(chirality, cols, higher)


def _try_random_ccomplex(rng, chirality, max_cols, max_rank, lo, hi, max_len):
    from .ccomplex import CComplex, RIGHT
    ncols = rng.randint(1, max_cols)
    start = rng.randint(-1, 1)
    idx = list(range(start, start + ncols))
    cols = {m: random_complex(rng, max_len, max_rank, lo, hi) for m in idx}
    higher: dict[tuple[int, int], GradedMap] = {}
    for m in idx[:-1]:
        f = _nonzero_cocycle(rng, cols[m], cols[m + 1], 0)
        if not f.is_zero():
            higher[(m, m + 1)] = f
    for span in range(2, ncols):
        for m in idx:
            n = m + span
            if n not in cols:
                continue
            deg = m - n + 1
            rhs = GradedMap.zero(cols[m], cols[n], deg + 1)
            for l in range(m + 1, n):
                if (m, l) in higher and (l, n) in higher:
                    term = compose_graded(higher[(l, n)], higher[(m, l)])
                    if chirality == "right" and (l + 1) % 2:
                        term = term.scale(-1)
                    rhs = rhs + term
            hc = hom_complex(cols[m], cols[n])
            if rhs.is_zero():
                cand = random_cocycle(rng, cols[m], cols[n], deg)
                if not cand.is_zero():
                    higher[(m, n)] = cand
                continue
            target = rhs if (n + 1) % 2 == 0 else rhs.scale(-1)
            sol = solve(hc.d_matrix(deg), list(hc.flatten(target)))
            if sol is None:
                return None
            f = hc.unflatten(deg, list(sol))
            if rng.random() < 0.5:
                f = f + random_cocycle(rng, cols[m], cols[n], deg)
            if not f.is_zero():
                higher[(m, n)] = f
    return CComplex(chirality, cols, higher)


def random_filling_square(rng: random.Random, max_terms: int = 2, attempts: int = 6):
    """A square commuting up to homotopy between two standard triangles.

    Returns (u, phi, psi, s) with cocycles phi, psi and a homotopy s
    witnessing psi.u - u.phi = D(s); both triangles are built on u.
    Falls back to the identity square, which always commutes.
    """
    from .zmodule import assemble
    from .pretr import hom_pretr, identity_pretr, compose_pretr, element_operator
    A = random_twisted(rng, max_terms=max_terms, max_rank=2, lo=-2, hi=2, max_len=2,
                       index_window=(-2, 0))
    B = random_twisted(rng, max_terms=max_terms, max_rank=2, lo=-2, hi=2, max_len=2,
                       index_window=(0, 2))
    hab = hom_pretr(A, B)
    u = random_pretr_cocycle(rng, hab)
    haa = hom_pretr(A, A)
    hbb = hom_pretr(B, B)
    R_u = element_operator(hbb, 0, hab, 0, lambda x: compose_pretr(x, u))
    D_bb = hbb.d_matrix(0)
    D_ab = hab.d_matrix(-1)
    for _ in range(attempts):
        phi = random_pretr_cocycle(rng, haa)
        rhs = list(hab.flatten(compose_pretr(u, phi)))
        big = assemble({(0, 0): D_bb, (1, 0): R_u, (1, 1): D_ab.scale(-1)},
                       [D_bb.rows, R_u.rows], [D_bb.cols, D_ab.cols])
        x = solve(big, [0] * D_bb.rows + rhs)
        if x is None:
            continue
        psi = hbb.unflatten(0, list(x[:D_bb.cols]))
        s = hab.unflatten(-1, list(x[D_bb.cols:]))
        if not (phi.is_zero() and psi.is_zero()):
            return u, phi, psi, s
    e_a = identity_pretr(A)
    e_b = identity_pretr(B)
    zero_s = hab.unflatten(-1, [0] * hab.rank(-1))
    return u, e_a, e_b, zero_s


# -- restricted instances --------------------------------------------------------

def contractible_complex(rng: random.Random) -> ZComplex:
    """Cone of an identity map: contractible, nonzero."""
    from .complexes import cone_of_map
    F = random_complex(rng, max_len=2, max_rank=2)
    return cone_of_map(GradedMap.identity(F))


def coordinate_family(X: ZComplex, parts: list[ZComplex]):
    """Directed family on Hom(X, sum of parts) by coordinate target summands.

    Member "s<bits>" consists of the maps landing in parts[0] plus the
    contractible parts selected by the bit string; meets are bitwise.
    Returns (the summed target complex, the family).
    """
    from .dgcat import DistinguishedFamily, SubcomplexDescriptor
    W = parts[0]
    for p in parts[1:]:
        W = W.direct_sum(p)
    hc = hom_complex(X, W)
    k = len(parts) - 1

    def allowed_rows(degree: int, selected: tuple[int, ...]) -> set[int]:
        rows = set()
        off = 0
        for t, p in enumerate(parts):
            r = p.rank(degree)
            if t == 0 or t in selected:
                rows.update(range(off, off + r))
            off += r
        return rows

    members = {}
    for bits in range(1 << k):
        selected = tuple(t + 1 for t in range(k) if (bits >> t) & 1)
        gens = {}
        for l in hc.complex.degrees():
            cols = []
            dim = hc.complex.rank(l)
            for d, off, r, c in hc.layout.get(l, []):
                good = allowed_rows(d + l, selected)
                for u in range(r):
                    if u in good:
                        for v in range(c):
                            col = [0] * dim
                            col[off + u * c + v] = 1
                            cols.append(col)
            gens[l] = IntMatrix(dim, len(cols),
                                list(map(list, zip(*cols))) if cols else [[] for _ in range(dim)])
        members[f"s{bits:0{k}b}" if k else "s"] = _descriptor(hc.complex, gens)
    meets = {}
    names = sorted(members)
    for x in range(1 << k):
        for y in range(x + 1, 1 << k):
            kx = f"s{x:0{k}b}" if k else "s"
            ky = f"s{y:0{k}b}" if k else "s"
            meets[frozenset((kx, ky))] = f"s{x & y:0{k}b}" if k else "s"
    fam = DistinguishedFamily(hc.complex, members, meets)
    return W, fam


def _descriptor(ambient, gens):
    from .dgcat import SubcomplexDescriptor
    return SubcomplexDescriptor(ambient, gens)


def embed_chain_map(f: GradedMap, W: ZComplex, parts: list[ZComplex], which: int) -> GradedMap:
    """Include a chain map into parts[which] as a map into the summed target."""
    offsets = {}
    for n in W.degrees():
        off = 0
        for t, p in enumerate(parts):
            if t == which:
                offsets[n] = off
            off += p.rank(n)
    body = {}
    for d, m in f.body.items():
        rows = [[0] * m.cols for _ in range(W.rank(d))]
        base = offsets.get(d, 0)
        for u in range(m.rows):
            rows[base + u] = list(m.data[u])
        body[d] = IntMatrix(W.rank(d), m.cols, rows)
    return GradedMap(f.source, W, 0, body)


def restricted_pair_setup(rng: random.Random, into_contractible: bool = False):
    """A restricted instance with a one-term A and two-term B whose twist
    lands in the core target summand (or also in a contractible one).

    Returns (instance, A, B, family, choice ids by summand-bit string).
    """
    from .dgcat import Atom, SumObject, RestrictedInstance
    from .pretr import TwistedComplex
    X = random_complex(rng, max_len=2, max_rank=2)
    V0 = random_complex(rng, max_len=2, max_rank=2)
    W0 = random_complex(rng, max_len=2, max_rank=2)
    K1 = contractible_complex(rng)
    K2 = contractible_complex(rng)
    parts = [W0, K1, K2]
    W, fam = coordinate_family(X, parts)
    q_core = embed_chain_map(random_chain_map(rng, V0, W0), W, parts, 0)
    q = q_core
    if into_contractible:
        q = q + embed_chain_map(random_chain_map(rng, V0, K1), W, parts, 1)
    ax = Atom("X", X)
    a0 = Atom("Y0", V0)
    a1 = Atom("Y1", W)
    inst = RestrictedInstance({a.name: a for a in (ax, a0, a1)}, {("X", "Y1"): fam})
    A = TwistedComplex.single(ax, instance=inst)
    B = TwistedComplex(inst, {0: SumObject.atom(a0), 1: SumObject.atom(a1)},
                       {(0, 1): q} if not q.is_zero() else {})
    return inst, A, B, fam
