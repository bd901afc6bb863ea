import pytest
from hypothesis import given, settings, strategies as st

from twistedz.zmodule import (
    IntMatrix,
    FGAbGroup,
    DimensionMismatch,
    snf,
    snf_extended,
    solve,
    solve_matrix,
    kernel_basis,
    cokernel_invariants,
    column_basis,
    unimodular_inverse,
    is_saturated_basis,
    rank,
)

from oracles import reduce_diagonal, invariant_factors_via_minors


def M(rows):
    return IntMatrix.from_rows(rows)


small_entries = st.integers(min_value=-9, max_value=9)


@st.composite
def matrices(draw, max_dim=4):
    r = draw(st.integers(min_value=0, max_value=max_dim))
    c = draw(st.integers(min_value=0, max_value=max_dim))
    data = [[draw(small_entries) for _ in range(c)] for _ in range(r)]
    return IntMatrix(r, c, data)


def is_unimodular(U):
    inv = unimodular_inverse(U)
    return U @ inv == IntMatrix.identity(U.rows)


class TestSnf:
    def test_zero_matrix(self):
        res = snf(M([[0]]))
        assert res.D == M([[0]])
        assert res.U == M([[1]])
        assert res.V == M([[1]])

    def test_identity(self):
        res = snf(IntMatrix.identity(2))
        assert res.D == IntMatrix.identity(2)

    def test_frozen_example_24_68(self):
        # invariant factors 2 and |det|/2 = 4, cross-checked by two oracles
        mat = [[2, 4], [6, 8]]
        assert reduce_diagonal(mat) == [2, 4]
        assert invariant_factors_via_minors(mat) == [2, 4]
        res = snf(M(mat))
        assert res.diagonal() == (2, 4)
        assert res.U @ M(mat) @ res.V == res.D

    def test_empty_shapes(self):
        for r, c in [(0, 0), (0, 3), (3, 0)]:
            res = snf(IntMatrix.zeros(r, c))
            assert res.D == IntMatrix.zeros(r, c)
            assert res.U.rows == r and res.V.rows == c

    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_snf_properties(self, m):
        res = snf(m)
        assert res.U @ m @ res.V == res.D
        if m.rows:
            assert is_unimodular(res.U)
        if m.cols:
            assert is_unimodular(res.V)
        diag = res.diagonal()
        assert all(d >= 0 for d in diag)
        nonzero = [d for d in diag if d]
        # divisibility chain, zeros only at the tail
        assert list(diag[:len(nonzero)]) == nonzero
        for a, b in zip(nonzero, nonzero[1:]):
            assert b % a == 0
        # agreement with the minor-gcd oracle
        assert nonzero == invariant_factors_via_minors(m.tolists())

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_snf_deterministic(self, m):
        assert snf(m) == snf(m)

    @settings(max_examples=100, deadline=None)
    @given(matrices())
    def test_rank_nullity(self, m):
        assert rank(m) + kernel_basis(m).cols == m.cols


class TestCokernel:
    def test_z_mod_2(self):
        assert cokernel_invariants(M([[2]])) == FGAbGroup(0, (2,))

    def test_no_relations(self):
        assert cokernel_invariants(IntMatrix.zeros(3, 0)) == FGAbGroup(3)

    def test_diag_2_3_canonicalizes(self):
        # Z/2 + Z/3 = Z/6
        assert cokernel_invariants(M([[2, 0], [0, 3]])) == FGAbGroup(0, (6,))

    def test_group_validation(self):
        with pytest.raises(ValueError):
            FGAbGroup(0, (3, 2))
        with pytest.raises(ValueError):
            FGAbGroup(0, (1,))
        assert FGAbGroup(1, (2, 4)).order() is None
        assert FGAbGroup(0, (2, 4)).order() == 8


class TestSolve:
    def test_simple(self):
        assert solve(M([[2]]), [4]) == (2,)

    def test_parity_obstruction(self):
        assert solve(M([[2]]), [3]) is None

    def test_frozen_2x2(self):
        x = solve(M([[1, 2], [3, 4]]), [1, 1])
        assert x is not None
        assert M([[1, 2], [3, 4]]).mul_vector(x) == (1, 1)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve(M([[1, 2]]), [1, 2])

    @settings(max_examples=100, deadline=None)
    @given(matrices(), st.data())
    def test_solutions_verify(self, m, data):
        if m.cols == 0:
            b = [0] * m.rows
        else:
            x0 = [data.draw(small_entries) for _ in range(m.cols)]
            b = list(m.mul_vector(x0))
        x = solve(m, b)
        assert x is not None
        assert list(m.mul_vector(x)) == b

    @settings(max_examples=100, deadline=None)
    @given(matrices(), st.data())
    def test_no_false_positives(self, m, data):
        b = [data.draw(small_entries) for _ in range(m.rows)]
        x = solve(m, b)
        if x is not None:
            assert list(m.mul_vector(x)) == b


class TestKernel:
    def test_injective(self):
        assert kernel_basis(M([[1]])).cols == 0

    def test_zero_map(self):
        k = kernel_basis(M([[0]]))
        assert k.cols == 1 and abs(k.data[0][0]) == 1

    def test_frozen_3_2(self):
        k = kernel_basis(M([[3, 2]]))
        assert k.cols == 1
        assert M([[3, 2]]) @ k == IntMatrix.zeros(1, 1)
        # spans the same lattice as (2, -3)
        assert solve_matrix(k, IntMatrix.column_vector([2, -3])) is not None
        assert is_saturated_basis(k)

    @settings(max_examples=100, deadline=None)
    @given(matrices())
    def test_kernel_properties(self, m):
        k = kernel_basis(m)
        assert (m @ k).is_zero()
        if k.cols:
            assert is_saturated_basis(k)


class TestHelpers:
    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_column_basis_spans_image(self, m):
        basis = column_basis(m)
        # every column of m is an integer combination of the basis
        assert solve_matrix(basis, m) is not None
        # and basis columns lie in the image lattice of m
        assert solve_matrix(m, basis) is not None

    def test_snf_extended_inverses(self):
        m = M([[2, 4, 4], [-6, 6, 12], [10, 4, 16]])
        U, D, V, Uinv, Vinv = snf_extended(m)
        assert U @ m @ V == D
        assert U @ Uinv == IntMatrix.identity(3)
        assert Vinv @ V == IntMatrix.identity(3)

    def test_unimodular_inverse_rejects(self):
        with pytest.raises(ValueError):
            unimodular_inverse(M([[2]]))
