"""Objects and partially defined composition.

Two instances of the same interface live here:

* the *total* instance: objects are arbitrary weighted complexes, every
  composition is defined and equals matrix composition;
* a *restricted* instance: a finite universe of named atoms together
  with, per ordered pair, a directed family of distinguished
  subcomplexes of the Hom complex.  Composition is only defined when
  the factors lie in listed members and the composite lands in the
  requested member; otherwise it returns the first-class value
  UNDEFINED (not an error).

Formal direct sums are tuples of words; a word is a tuple of atoms plus
an integer twist used for weight bookkeeping.  Words realize to honest
complexes through an iterated tensor with a fixed degree-vector-lex
summand order, so object equalities downstream are equalities of data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .zmodule import IntMatrix, assemble, is_saturated_basis, solve_matrix
from .complexes import (
    ZComplex,
    GradedMap,
    HomComplex,
    ObjectMismatch,
    Report,
    hom_complex,
    compose_graded,
    is_quasi_iso,
    validate,
)


class FamilyNotDirected(ValueError):
    pass


class UnknownObject(ValueError):
    pass


class _Undefined:
    """Sentinel for partially defined compositions."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()


@dataclass(frozen=True)
class Atom:
    """A primitive object: a named complex with an integer weight tag."""
    name: str
    complex: ZComplex
    weight: int = 0

    def __repr__(self):
        return f"Atom({self.name!r}, weight={self.weight})"


@dataclass(frozen=True)
class Word:
    """Tensor word of atoms; the twist shifts the weight without
    changing the realization (trivial tensor factor)."""
    atoms: tuple[Atom, ...] = ()
    twist: int = 0

    @property
    def weight(self) -> int:
        return sum(a.weight for a in self.atoms) + self.twist

    def key(self):
        return (tuple((a.name, a.weight) for a in self.atoms), self.twist)

    def merge(self, other: "Word") -> "Word":
        return Word(self.atoms + other.atoms, self.twist + other.twist)

    def retwist(self, n: int) -> "Word":
        return Word(self.atoms, self.twist + n)

    def __repr__(self):
        inner = "*".join(a.name for a in self.atoms) or "1"
        return f"Word({inner}, twist={self.twist})"


_WORD_CACHE: dict[Word, tuple[ZComplex, dict[int, list[tuple[tuple, int, int]]]]] = {}


def realize_word(w: Word) -> ZComplex:
    return _realize_word_full(w)[0]


def word_layout(w: Word) -> dict[int, list[tuple[tuple, int, int]]]:
    """degree -> list of (degree vector, offset, size), lex-ordered."""
    return _realize_word_full(w)[1]


def _realize_word_full(w: Word):
    hit = _WORD_CACHE.get(w)
    if hit is not None:
        return hit
    factors = [a.complex for a in w.atoms]
    if any(f.is_zero() for f in factors):
        result = (ZComplex.zero(), {})
        _WORD_CACHE[w] = result
        return result
    if not factors:
        result = (ZComplex.free_at(0), {0: [((), 0, 1)]})
        _WORD_CACHE[w] = result
        return result
    degs = [f.degrees() for f in factors]
    lo = sum(d[0] for d in degs)
    hi = sum(d[-1] for d in degs)
    layout: dict[int, list[tuple[tuple, int, int]]] = {}
    ranks: dict[int, int] = {}
    for n in range(lo, hi + 1):
        vecs = _degree_vectors(degs, n)
        off = 0
        entries = []
        for v in vecs:
            size = 1
            for f, p in zip(factors, v):
                size *= f.rank(p)
            entries.append((v, off, size))
            off += size
        if entries:
            layout[n] = entries
            ranks[n] = off
    pos = {n: {v: (off, size) for v, off, size in entries} for n, entries in layout.items()}
    diffs = {}
    for n, entries in layout.items():
        tgt = pos.get(n + 1)
        if not tgt:
            continue
        parts = {}
        tgt_entries = layout[n + 1]
        tgt_idx = {v: i for i, (v, _, _) in enumerate(tgt_entries)}
        for j, (v, _, _) in enumerate(entries):
            prefix = 0
            for t in range(len(factors)):
                v2 = v[:t] + (v[t] + 1,) + v[t + 1:]
                i = tgt_idx.get(v2)
                if i is not None:
                    pre = 1
                    for f, p in zip(factors[:t], v[:t]):
                        pre *= f.rank(p)
                    post = 1
                    for f, p in zip(factors[t + 1:], v[t + 1:]):
                        post *= f.rank(p)
                    block = IntMatrix.identity(pre).kron(
                        factors[t].d(v[t]).kron(IntMatrix.identity(post)))
                    if prefix % 2:
                        block = block.scale(-1)
                    key = (i, j)
                    parts[key] = block if key not in parts else parts[key] + block
                prefix += v[t]
        diffs[n] = assemble(parts, [s for _, _, s in tgt_entries], [s for _, _, s in entries])
    result = (ZComplex(ranks, diffs), layout)
    _WORD_CACHE[w] = result
    return result


def _degree_vectors(degs: list[list[int]], n: int) -> list[tuple]:
    """All (p_1, ..., p_k) with p_i in degs[i] summing to n, lex order."""
    if not degs:
        return [()] if n == 0 else []
    out = []

    def rec(i, acc, rest):
        if i == len(degs) - 1:
            if rest in degs[i]:
                out.append(tuple(acc + [rest]))
            return
        for p in degs[i]:
            lo = sum(d[0] for d in degs[i + 1:])
            hi = sum(d[-1] for d in degs[i + 1:])
            if lo <= rest - p <= hi:
                rec(i + 1, acc + [p], rest - p)

    rec(0, [], n)
    return out


@dataclass(frozen=True)
class SumObject:
    """Formal finite direct sum, stored as a canonically sorted word tuple."""
    words: tuple[Word, ...] = ()

    @classmethod
    def of(cls, words) -> "SumObject":
        return cls(tuple(sorted(words, key=Word.key)))

    @classmethod
    def atom(cls, a: Atom) -> "SumObject":
        return cls((Word((a,)),))

    def is_zero(self) -> bool:
        return not self.words or all(realize_word(w).is_zero() for w in self.words)

    def __add__(self, other: "SumObject") -> "SumObject":
        return SumObject.of(self.words + other.words)

    def __repr__(self):
        return f"SumObject({list(self.words)})"


_SUM_CACHE: dict[SumObject, tuple[ZComplex, dict[int, list[tuple[int, int, int]]]]] = {}


def realize_sum(s: SumObject) -> ZComplex:
    return _realize_sum_full(s)[0]


def sum_layout(s: SumObject) -> dict[int, list[tuple[int, int, int]]]:
    """degree -> list of (word index, offset, size)."""
    return _realize_sum_full(s)[1]


def _realize_sum_full(s: SumObject):
    hit = _SUM_CACHE.get(s)
    if hit is not None:
        return hit
    parts = [realize_word(w) for w in s.words]
    ranks: dict[int, int] = {}
    layout: dict[int, list[tuple[int, int, int]]] = {}
    all_degs = sorted({n for p in parts for n in p.degrees()})
    for n in all_degs:
        off = 0
        entries = []
        for idx, p in enumerate(parts):
            r = p.rank(n)
            if r:
                entries.append((idx, off, r))
            off += r
        ranks[n] = off
        layout[n] = entries
    diffs = {}
    for n in ranks:
        if ranks.get(n + 1, 0) and ranks.get(n, 0):
            blocks = {(i, i): p.d(n) for i, p in enumerate(parts)
                      if p.rank(n) and p.rank(n + 1)}
            diffs[n] = assemble(blocks, [p.rank(n + 1) for p in parts],
                                [p.rank(n) for p in parts])
    result = (ZComplex(ranks, diffs), layout)
    _SUM_CACHE[s] = result
    return result


def word_offsets(s: SumObject, n: int) -> dict[int, tuple[int, int]]:
    """word index -> (offset, size) inside realize_sum(s) at degree n."""
    return {idx: (off, size) for idx, off, size in sum_layout(s).get(n, [])}


def sum_block(gm: GradedMap, src: SumObject, tgt: SumObject,
              a: int, b: int) -> GradedMap:
    """Extract the word-block (src word a -> tgt word b) of a map between
    realized sums."""
    A = realize_word(src.words[a])
    B = realize_word(tgt.words[b])
    body = {}
    for d in A.degrees():
        r, c = B.rank(d + gm.degree), A.rank(d)
        if not (r and c):
            continue
        so = word_offsets(src, d).get(a)
        to = word_offsets(tgt, d + gm.degree).get(b)
        block = gm.block(d).submatrix(range(to[0], to[0] + r), range(so[0], so[0] + c))
        body[d] = block
    return GradedMap(A, B, gm.degree, body)


def assemble_sum_map(src: SumObject, tgt: SumObject, degree: int,
                     blocks: dict[tuple[int, int], GradedMap]) -> GradedMap:
    """Build a map realize(src) -> realize(tgt) from word-pair blocks
    keyed (tgt word index, src word index)."""
    A = realize_sum(src)
    B = realize_sum(tgt)
    body = {}
    for d in A.degrees():
        if not (B.rank(d + degree) and A.rank(d)):
            continue
        src_off = word_offsets(src, d)
        tgt_off = word_offsets(tgt, d + degree)
        parts = {}
        src_order = sorted(src_off)
        tgt_order = sorted(tgt_off)
        src_pos = {w: i for i, w in enumerate(src_order)}
        tgt_pos = {w: i for i, w in enumerate(tgt_order)}
        for (bw, aw), m in blocks.items():
            if aw in src_pos and bw in tgt_pos:
                mb = m.block(d)
                if not mb.is_zero():
                    key = (tgt_pos[bw], src_pos[aw])
                    parts[key] = mb if key not in parts else parts[key] + mb
        body[d] = assemble(parts, [tgt_off[w][1] for w in tgt_order],
                           [src_off[w][1] for w in src_order])
    return GradedMap(A, B, degree, body)


# -- distinguished subcomplexes ------------------------------------------------

class SubcomplexDescriptor:
    """A subcomplex of an ambient complex, saturated in every degree.

    gens[n] has the ambient rank of degree n as row count; its columns
    must form a saturated basis closed under the ambient differential.
    The induced complex carries the differential written in the basis.
    """

    def __init__(self, ambient: ZComplex, gens: dict[int, IntMatrix]):
        self.ambient = ambient
        gg = {}
        for n, m in gens.items():
            n = int(n)
            if m.rows != ambient.rank(n):
                raise ObjectMismatch(
                    f"generators at degree {n} have {m.rows} rows, ambient rank is {ambient.rank(n)}")
            gg[n] = m
        for n in ambient.degrees():
            gg.setdefault(n, IntMatrix.zeros(ambient.rank(n), 0))
        self.gens_by_degree = gg
        ranks = {n: m.cols for n, m in gg.items() if m.cols}
        diffs = {}
        for n in ranks:
            if ranks.get(n + 1, 0):
                image = ambient.d(n) @ gg[n]
                sol = solve_matrix(gg[n + 1], image)
                if sol is None:
                    raise ObjectMismatch(f"generators at degree {n} are not closed under d")
                diffs[n] = sol
            elif not (ambient.d(n) @ gg[n]).is_zero():
                raise ObjectMismatch(f"generators at degree {n} are not closed under d")
        self.complex = ZComplex(ranks, diffs)

    @classmethod
    def full(cls, ambient: ZComplex) -> "SubcomplexDescriptor":
        return cls(ambient, {n: IntMatrix.identity(r) for n, r in ambient.ranks.items()})

    def gens(self, n: int) -> IntMatrix:
        m = self.gens_by_degree.get(n)
        if m is None:
            m = IntMatrix.zeros(self.ambient.rank(n), 0)
        return m

    def inclusion(self) -> GradedMap:
        return GradedMap(self.complex, self.ambient, 0,
                         {n: m for n, m in self.gens_by_degree.items()
                          if m.cols and m.rows})

    def member_coords(self, n: int, vec) -> Optional[tuple[int, ...]]:
        sol = solve_matrix(self.gens(n), IntMatrix.column_vector(list(vec)))
        return sol.column(0) if sol is not None else None

    def contains_vector(self, n: int, vec) -> bool:
        return self.member_coords(n, vec) is not None

    def validate(self) -> Report:
        problems = []
        for n, m in self.gens_by_degree.items():
            if m.cols and not is_saturated_basis(m):
                problems.append(f"generators at degree {n} are not a saturated basis")
        if not validate(self.complex).ok:
            problems.append("induced differential does not square to zero")
        return Report(not problems, problems)

    def certify_quasi_iso(self) -> bool:
        return is_quasi_iso(self.inclusion())


@dataclass
class DistinguishedFamily:
    """Finite directed family of certified subcomplexes of one Hom complex."""
    ambient: ZComplex
    members: dict[str, SubcomplexDescriptor] = field(default_factory=dict)
    meets: dict[frozenset, str] = field(default_factory=dict)

    def member(self, member_id: str) -> SubcomplexDescriptor:
        try:
            return self.members[member_id]
        except KeyError:
            raise FamilyNotDirected(f"no member {member_id!r} in family") from None

    def meet_of(self, ids) -> str:
        ids = list(ids)
        if not ids:
            raise FamilyNotDirected("empty constraint list")
        cur = ids[0]
        self.member(cur)
        for nxt in ids[1:]:
            self.member(nxt)
            if nxt == cur:
                continue
            key = frozenset((cur, nxt))
            if key not in self.meets:
                raise FamilyNotDirected(f"no listed lower bound for {cur!r}, {nxt!r}")
            cur = self.meets[key]
        return cur

    def validate(self, certify: bool = True) -> Report:
        problems = []
        for mid, desc in self.members.items():
            if desc.ambient != self.ambient:
                problems.append(f"member {mid!r} lives in a different ambient complex")
                continue
            rep = desc.validate()
            if not rep.ok:
                problems.extend(f"member {mid!r}: {p}" for p in rep.problems)
            elif certify and not desc.certify_quasi_iso():
                problems.append(f"member {mid!r}: inclusion is not a quasi-isomorphism")
        names = sorted(self.members)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                key = frozenset((a, b))
                if key not in self.meets:
                    problems.append(f"no listed lower bound for {a!r}, {b!r}")
                    continue
                mid = self.meets[key]
                if mid not in self.members:
                    problems.append(f"lower bound {mid!r} of ({a!r}, {b!r}) is not a member")
                    continue
                low = self.members[mid]
                for other in (a, b):
                    up = self.members[other]
                    for n in low.complex.degrees():
                        if solve_matrix(up.gens(n), low.gens(n)) is None:
                            problems.append(
                                f"lower bound {mid!r} is not contained in {other!r} at degree {n}")
                            break
        return Report(not problems, problems)


# -- instances -----------------------------------------------------------------

@dataclass(frozen=True)
class PairHom:
    """Hom data the instance exposes for a pair: the full complex plus
    (on the restricted instance) the attached family."""
    source: Atom
    target: Atom
    hom: HomComplex
    family: Optional[DistinguishedFamily] = None


@dataclass(frozen=True)
class HomElement:
    """A pure-degree element of an instance-level Hom complex."""
    source: Atom
    target: Atom
    map: GradedMap

    @property
    def degree(self) -> int:
        return self.map.degree


class TotalInstance:
    """The total instance: all weighted complexes, all compositions defined."""

    is_restricted = False

    def contains(self, atom: Atom) -> bool:
        return True

    def hom(self, A: Atom, B: Atom) -> PairHom:
        return PairHom(A, B, hom_complex(A.complex, B.complex), None)

    def family(self, A: Atom, B: Atom) -> Optional[DistinguishedFamily]:
        return None

    def __repr__(self):
        return "TotalInstance()"


TOTAL = TotalInstance()


class RestrictedInstance:
    """Finite universe with explicit distinguished families per pair.

    Pairs without a listed family get the trivial one-member family
    consisting of the full Hom complex.
    """

    is_restricted = True

    def __init__(self, atoms: dict[str, Atom],
                 families: dict[tuple[str, str], DistinguishedFamily]):
        self.atoms = dict(atoms)
        self.families = dict(families)

    def contains(self, atom: Atom) -> bool:
        return self.atoms.get(atom.name) == atom

    def _check(self, atom: Atom):
        if not self.contains(atom):
            raise UnknownObject(f"object {atom.name!r} is not in the universe")

    def hom(self, A: Atom, B: Atom) -> PairHom:
        self._check(A)
        self._check(B)
        return PairHom(A, B, hom_complex(A.complex, B.complex), self.family(A, B))

    def family(self, A: Atom, B: Atom) -> DistinguishedFamily:
        self._check(A)
        self._check(B)
        fam = self.families.get((A.name, B.name))
        if fam is None:
            ambient = hom_complex(A.complex, B.complex).complex
            fam = DistinguishedFamily(ambient, {"full": SubcomplexDescriptor.full(ambient)}, {})
            self.families[(A.name, B.name)] = fam
        return fam

    def __repr__(self):
        return f"RestrictedInstance(atoms={sorted(self.atoms)})"


def unit(inst, A: Atom) -> HomElement:
    """The degree-0 identity cocycle on A."""
    if not inst.contains(A):
        raise UnknownObject(f"object {A.name!r} is not in the universe")
    return HomElement(A, A, GradedMap.identity(A.complex))


def element_in_member(inst, elem: HomElement, desc: SubcomplexDescriptor) -> bool:
    hc = inst.hom(elem.source, elem.target).hom
    vec = hc.flatten(elem.map)
    return desc.contains_vector(elem.degree, vec)


def find_member(inst, elem: HomElement) -> Optional[str]:
    """Some listed member containing the element (deterministic scan)."""
    fam = inst.family(elem.source, elem.target)
    if fam is None:
        return None
    for mid in sorted(fam.members):
        if element_in_member(inst, elem, fam.members[mid]):
            return mid
    return None


def compose(inst, g: HomElement, f: HomElement, target: Optional[str] = None):
    """Partial composition g . f; returns UNDEFINED when the restricted
    instance does not provide it."""
    if f.target != g.source:
        raise ObjectMismatch("compose: target of f differs from source of g")
    composite = HomElement(f.source, g.target, compose_graded(g.map, f.map))
    if not inst.is_restricted:
        return composite
    if find_member(inst, f) is None or find_member(inst, g) is None:
        return UNDEFINED
    fam = inst.family(f.source, g.target)
    if target is not None:
        desc = fam.member(target)
        if element_in_member(inst, composite, desc):
            return composite
        return UNDEFINED
    if find_member(inst, composite) is not None:
        return composite
    return UNDEFINED


def refine(fam: DistinguishedFamily, constraints) -> tuple[str, SubcomplexDescriptor]:
    """A listed common lower bound of the constrained members.

    The returned member is verified to sit inside every constraint and
    to include quasi-isomorphically into the ambient complex.
    """
    mid = fam.meet_of(constraints)
    desc = fam.member(mid)
    for cid in constraints:
        upper = fam.member(cid)
        for n in desc.complex.degrees():
            if solve_matrix(upper.gens(n), desc.gens(n)) is None:
                raise FamilyNotDirected(
                    f"listed bound {mid!r} is not contained in {cid!r} at degree {n}")
    if not desc.certify_quasi_iso():
        raise FamilyNotDirected(f"member {mid!r} fails quasi-isomorphism certification")
    return mid, desc
