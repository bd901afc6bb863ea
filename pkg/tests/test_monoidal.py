import random

import pytest

from twistedz.zmodule import IntMatrix, FGAbGroup
from twistedz.complexes import ZComplex, GradedMap, dual_complex, validate
from twistedz.dgcat import Atom, Word, SumObject, TOTAL, realize_word, realize_sum
from twistedz.pretr import (
    TwistedComplex,
    compose_pretr,
    identity_pretr,
    hom_pretr,
    validate_twisted,
)
from twistedz.monoidal import (
    tensor_twisted,
    dual_twisted,
    internal_hom,
    tate_twist,
    tate_object,
    unit_object,
    word_map_tensor,
    koszul_transpose,
    theta_word,
    reflexivity_element,
    reflexivity_inverse,
    sensitive_instance,
    prop56_audit,
)
from twistedz.gen import random_complex, random_twisted, random_graded_map


def M(rows):
    return IntMatrix.from_rows(rows)


def small_twisted(rng, terms=2):
    return random_twisted(rng, max_terms=terms, max_rank=2, lo=-1, hi=1, max_len=2)


class TestWordMapTensor:
    def test_koszul_leibniz_for_tensor_of_maps(self):
        # d(f x g) = d(f) x g + (-1)^{|f|} f x d(g) on word realizations
        rng = random.Random(0)
        for _ in range(10):
            X1, X2 = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
            Y1, Y2 = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
            wx1, wx2 = Word((Atom("x1", X1),)), Word((Atom("x2", X2),))
            wy1, wy2 = Word((Atom("y1", Y1),)), Word((Atom("y2", Y2),))
            f = random_graded_map(rng, X1, Y1, rng.randint(-1, 1))
            g = random_graded_map(rng, X2, Y2, rng.randint(-1, 1))
            fg = word_map_tensor(f, wx1, wy1, g, wx2, wy2)
            lhs = fg.differential()
            rhs = word_map_tensor(f.differential(), wx1, wy1, g, wx2, wy2)
            tail = word_map_tensor(f, wx1, wy1, g.differential(), wx2, wy2)
            if f.degree % 2:
                tail = tail.scale(-1)
            assert lhs == rhs + tail

    def test_identity_tensor_identity(self):
        rng = random.Random(1)
        X, Y = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
        wx, wy = Word((Atom("x", X),)), Word((Atom("y", Y),))
        got = word_map_tensor(GradedMap.identity(X), wx, wx,
                              GradedMap.identity(Y), wy, wy)
        assert got == GradedMap.identity(realize_word(wx.merge(wy)))


class TestKoszulTranspose:
    def test_transpose_is_chain_map(self):
        # d(t f) = t(d f) exactly
        rng = random.Random(2)
        for _ in range(10):
            X, Y = random_complex(rng), random_complex(rng)
            f = random_graded_map(rng, X, Y, rng.randint(-2, 2))
            assert koszul_transpose(f.differential()) == koszul_transpose(f).differential()

    def test_contravariance_sign(self):
        # t(g . f) = (-1)^{|f||g|} t(f) . t(g)
        from twistedz.complexes import compose_graded
        rng = random.Random(3)
        for _ in range(10):
            X, Y, Z = (random_complex(rng) for _ in range(3))
            f = random_graded_map(rng, X, Y, rng.randint(-1, 1))
            g = random_graded_map(rng, Y, Z, rng.randint(-1, 1))
            lhs = koszul_transpose(compose_graded(g, f))
            rhs = compose_graded(koszul_transpose(f), koszul_transpose(g))
            if (f.degree * g.degree) % 2:
                rhs = rhs.scale(-1)
            assert lhs == rhs

    def test_theta_is_chain_isomorphism(self):
        from twistedz.monoidal import word_dual
        rng = random.Random(4)
        for _ in range(8):
            atoms = tuple(Atom(f"a{i}", random_complex(rng, 2, 2)) for i in range(3))
            w = Word(atoms)
            th = theta_word(w)
            Rd = realize_word(word_dual(w))
            D = dual_complex(realize_word(w))
            assert Rd.ranks == D.ranks
            gm = GradedMap(Rd, D, 0, th)
            assert gm.is_chain_map()


class TestTensorTwisted:
    def test_unit_laws_literal(self):
        rng = random.Random(5)
        unit = unit_object()
        for _ in range(8):
            A = small_twisted(rng)
            assert tensor_twisted(unit, A) == A
            assert tensor_twisted(A, unit) == A

    def test_single_terms_give_base_tensor(self):
        from twistedz.complexes import tensor_complex
        rng = random.Random(6)
        X, Y = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
        A = TwistedComplex.single(Atom("x", X))
        B = TwistedComplex.single(Atom("y", Y))
        T = tensor_twisted(A, B)
        assert T.indices() == [0]
        assert T.realization(0) == tensor_complex(X, Y)

    def test_mc_preserved(self):
        rng = random.Random(7)
        for _ in range(10):
            A, B = small_twisted(rng), small_twisted(rng)
            T = tensor_twisted(A, B)
            assert validate_twisted(T).ok

    def test_associativity_literal(self):
        rng = random.Random(8)
        for _ in range(6):
            A, B, C = small_twisted(rng), small_twisted(rng), small_twisted(rng)
            assert tensor_twisted(tensor_twisted(A, B), C) == \
                tensor_twisted(A, tensor_twisted(B, C))

    def test_weights_add(self):
        rng = random.Random(9)
        A = small_twisted(rng)
        Zn = tate_object(2)
        T = tensor_twisted(A, Zn)
        for i in T.indices():
            for w in T.term(i).words:
                assert w.weight == A.term(i - 4).words[0].weight + 2


class TestDualTwisted:
    def test_dual_of_unit(self):
        assert dual_twisted(unit_object()) == unit_object()

    def test_single_term_is_base_dual(self):
        rng = random.Random(10)
        X = random_complex(rng)
        A = TwistedComplex.single(Atom("x", X), index=1)
        D = dual_twisted(A)
        assert D.indices() == [-1]
        assert D.realization(-1) == dual_complex(X)

    def test_mc_preserved(self):
        rng = random.Random(11)
        for _ in range(10):
            A = small_twisted(rng, terms=3)
            assert validate_twisted(dual_twisted(A)).ok

    def test_dual_of_tensor_literal(self):
        rng = random.Random(12)
        for _ in range(6):
            A, B = small_twisted(rng), small_twisted(rng)
            assert dual_twisted(tensor_twisted(A, B)) == \
                tensor_twisted(dual_twisted(B), dual_twisted(A))

    def test_corrupted_exponent_fails(self):
        sens = sensitive_instance()
        assert validate_twisted(sens).ok
        assert validate_twisted(dual_twisted(sens)).ok
        assert not validate_twisted(dual_twisted(sens, _sign_shift=0)).ok


class TestInternalHomAndTate:
    def test_internal_hom_from_unit(self):
        rng = random.Random(13)
        B = small_twisted(rng)
        assert internal_hom(unit_object(), B) == B

    def test_internal_hom_to_unit_is_dual(self):
        rng = random.Random(14)
        A = small_twisted(rng)
        assert internal_hom(A, unit_object()) == dual_twisted(A)

    def test_adjunction_groups(self):
        from twistedz.complexes import HomologyData
        rng = random.Random(15)
        for _ in range(4):
            A = random_twisted(rng, max_terms=1, max_rank=2, lo=-1, hi=1, max_len=2)
            B = small_twisted(rng)
            C = random_twisted(rng, max_terms=1, max_rank=2, lo=-1, hi=1, max_len=2)
            lhs = HomologyData(hom_pretr(C, internal_hom(A, B)).underlying, 0).group
            rhs = HomologyData(hom_pretr(tensor_twisted(C, A), B).underlying, 0).group
            assert lhs == rhs

    def test_tate_twist_identities(self):
        rng = random.Random(16)
        A = small_twisted(rng)
        assert tate_twist(A, 0) == A
        assert tate_twist(tate_twist(A, 1), 1) == tate_twist(A, 2)
        assert tate_twist(tate_twist(A, 3), -3) == A
        assert tate_twist(unit_object(), 1) != unit_object()
        assert tate_twist(tate_twist(unit_object(), 1), -1) == unit_object()

    def test_tate_twist_preserves_mc(self):
        rng = random.Random(17)
        for _ in range(6):
            A = small_twisted(rng)
            assert validate_twisted(tate_twist(A, rng.randint(-2, 2))).ok

    def test_tate_object_realization(self):
        Z2 = tate_object(2)
        assert Z2.indices() == [4]
        assert realize_sum(Z2.term(4)) == ZComplex.free_at(0)
        assert Z2.term(4).words[0].weight == 2


class TestReflexivity:
    def test_reflexivity_isomorphism(self):
        rng = random.Random(18)
        for _ in range(8):
            A = small_twisted(rng, terms=3)
            i_A = reflexivity_element(A)
            j_A = reflexivity_inverse(A)
            assert i_A.is_cocycle() and j_A.is_cocycle()
            assert compose_pretr(j_A, i_A) == identity_pretr(A)
            assert compose_pretr(i_A, j_A) == identity_pretr(i_A.target)


class TestAudit:
    def test_audit_passes(self):
        rep = prop56_audit(trials=6, seed=0)
        assert rep.ok, rep.problems
        assert rep.negative_control_failed
