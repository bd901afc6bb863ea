"""Exact linear algebra over the integers.

Everything downstream (homology, homotopy searches, quasi-isomorphism
tests) reduces to Smith normal form, integer kernels and integer linear
solving, so this module is deliberately self-contained and uses Python's
arbitrary-precision ints only.  No floating point anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Optional, Sequence


class DimensionMismatch(ValueError):
    pass


class IntMatrix:
    """Immutable dense integer matrix (row-major tuples).

    Zero-row and zero-column matrices are legal and denote zero maps
    between free groups of the corresponding ranks.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable[int]]):
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative matrix dimensions")
        rs = tuple(tuple(int(x) for x in row) for row in data)
        if len(rs) != rows or any(len(r) != cols for r in rs):
            raise DimensionMismatch(
                f"expected {rows}x{cols} entries, got {[len(r) for r in rs]}"
            )
        self.rows = rows
        self.cols = cols
        self.data = rs

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_rows(cls, data: Sequence[Sequence[int]]) -> "IntMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(rows, cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, ((0,) * cols,) * rows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets: Iterable[tuple[int, int, int]]) -> "IntMatrix":
        buf = [[0] * cols for _ in range(rows)]
        for i, j, v in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise DimensionMismatch(f"triplet ({i},{j}) outside {rows}x{cols}")
            buf[i][j] += int(v)
        return cls(rows, cols, buf)

    @classmethod
    def column_vector(cls, entries: Sequence[int]) -> "IntMatrix":
        return cls(len(entries), 1, tuple((int(x),) for x in entries))

    # -- basic queries ---------------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        return f"IntMatrix({self.rows}x{self.cols}, {list(map(list, self.data))})"

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.data)

    def tolists(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    # -- arithmetic -------------------------------------------------------
    def _same_shape(self, other: "IntMatrix"):
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch(f"{self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(
            self.rows, self.cols,
            tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)),
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(
            self.rows, self.cols,
            tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)),
        )

    def __neg__(self) -> "IntMatrix":
        return self.scale(-1)

    def scale(self, k: int) -> "IntMatrix":
        if k == 1:
            return self
        return IntMatrix(self.rows, self.cols, tuple(tuple(k * x for x in row) for row in self.data))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        ot = tuple(zip(*other.data)) if other.data else tuple()
        out = []
        for row in self.data:
            if other.cols and any(row):
                out.append(tuple(sum(a * b for a, b in zip(row, col) if a) for col in ot))
            else:
                out.append((0,) * other.cols)
        return IntMatrix(self.rows, other.cols, out)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.data)) if self.data else ())

    def mul_vector(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector length {len(v)} vs {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(row, v) if a) for row in self.data)

    def kron(self, other: "IntMatrix") -> "IntMatrix":
        out = []
        for ra in self.data:
            for rb in other.data:
                out.append(tuple(a * b for a in ra for b in rb))
        if not out:
            return IntMatrix(self.rows * other.rows, self.cols * other.cols,
                             ((0,) * (self.cols * other.cols),) * (self.rows * other.rows))
        return IntMatrix(self.rows * other.rows, self.cols * other.cols, out)

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch("hstack row mismatch")
        return IntMatrix(self.rows, self.cols + other.cols,
                         tuple(ra + rb for ra, rb in zip(self.data, other.data)))

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise DimensionMismatch("vstack column mismatch")
        return IntMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    def submatrix(self, row_range: range, col_range: range) -> "IntMatrix":
        return IntMatrix(len(row_range), len(col_range),
                         tuple(tuple(self.data[i][j] for j in col_range) for i in row_range))


def assemble(blocks: dict[tuple[int, int], IntMatrix],
             row_sizes: Sequence[int], col_sizes: Sequence[int]) -> IntMatrix:
    """Assemble a block matrix from a sparse dict of blocks.

    Missing blocks are zero.  Zero-size rows/columns are fine.
    """
    row_off = [0]
    for s in row_sizes:
        row_off.append(row_off[-1] + s)
    col_off = [0]
    for s in col_sizes:
        col_off.append(col_off[-1] + s)
    buf = [[0] * col_off[-1] for _ in range(row_off[-1])]
    for (bi, bj), m in blocks.items():
        if m.rows != row_sizes[bi] or m.cols != col_sizes[bj]:
            raise DimensionMismatch(
                f"block ({bi},{bj}) is {m.rows}x{m.cols}, slot wants {row_sizes[bi]}x{col_sizes[bj]}")
        r0, c0 = row_off[bi], col_off[bj]
        for i, row in enumerate(m.data):
            tgt = buf[r0 + i]
            for j, v in enumerate(row):
                if v:
                    tgt[c0 + j] = v
    return IntMatrix(row_off[-1], col_off[-1], buf)


@dataclass(frozen=True)
class SnfResult:
    """U @ M @ V == D with U, V unimodular and D diagonal, d1 | d2 | ..."""
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D.data[i][i] for i in range(min(self.D.rows, self.D.cols)))

    def rank(self) -> int:
        return sum(1 for d in self.diagonal() if d != 0)


@dataclass(frozen=True)
class FGAbGroup:
    """Finitely generated abelian group in invariant-factor form.

    torsion is the chain t1 | t2 | ... with every ti >= 2.
    """
    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        ts = tuple(int(t) for t in self.torsion)
        for a, b in zip(ts, ts[1:]):
            if b % a:
                raise ValueError(f"torsion {ts} violates divisibility chain")
        if any(t < 2 for t in ts):
            raise ValueError(f"torsion coefficients must be >= 2, got {ts}")
        object.__setattr__(self, "torsion", ts)

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def order(self) -> Optional[int]:
        """Group order, or None when infinite."""
        if self.free_rank:
            return None
        n = 1
        for t in self.torsion:
            n *= t
        return n

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def _apply_row_op_inverse(Uinv, op):
    # U got E@U; keep Uinv = (E@U)^-1 tracked as Uinv @ E^-1.
    kind = op[0]
    if kind == "swap":
        _, i, j = op
        for row in Uinv:
            row[i], row[j] = row[j], row[i]
    elif kind == "neg":
        _, i = op
        for row in Uinv:
            row[i] = -row[i]
    else:  # ("add", k, i, j): row_j += k*row_i  =>  col_i -= k*col_j in Uinv
        _, k, i, j = op
        for row in Uinv:
            row[i] -= k * row[j]


def _apply_col_op_inverse(Vinv, op):
    # V got V@E; keep Vinv = E^-1 @ Vinv.
    kind = op[0]
    if kind == "swap":
        _, i, j = op
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]
    elif kind == "neg":
        _, j = op
        Vinv[j] = [-x for x in Vinv[j]]
    else:  # ("add", k, i, j): col_j += k*col_i  =>  row_i -= k*row_j in Vinv
        _, k, i, j = op
        Vinv[i] = [a - k * b for a, b in zip(Vinv[i], Vinv[j])]


def _snf_work(M: IntMatrix):
    r, c = M.rows, M.cols
    D = [list(row) for row in M.data]
    U = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    V = [[1 if i == j else 0 for j in range(c)] for i in range(c)]
    Uinv = [row[:] for row in U]
    Vinv = [row[:] for row in V]

    def row_swap(i, j):
        if i == j:
            return
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        _apply_row_op_inverse(Uinv, ("swap", i, j))

    def row_neg(i):
        D[i] = [-x for x in D[i]]
        U[i] = [-x for x in U[i]]
        _apply_row_op_inverse(Uinv, ("neg", i))

    def row_add(k, i, j):
        # row_j += k * row_i
        D[j] = [a + k * b for a, b in zip(D[j], D[i])]
        U[j] = [a + k * b for a, b in zip(U[j], U[i])]
        _apply_row_op_inverse(Uinv, ("add", k, i, j))

    def col_swap(i, j):
        if i == j:
            return
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        _apply_col_op_inverse(Vinv, ("swap", i, j))

    def col_add(k, i, j):
        # col_j += k * col_i
        for row in D:
            row[j] += k * row[i]
        for row in V:
            row[j] += k * row[i]
        _apply_col_op_inverse(Vinv, ("add", k, i, j))

    def pivot_at(t):
        best = None
        for i in range(t, r):
            for j in range(t, c):
                v = D[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        return best

    for t in range(min(r, c)):
        while True:
            best = pivot_at(t)
            if best is None:
                break
            _, pi, pj = best
            row_swap(t, pi)
            col_swap(t, pj)
            if D[t][t] < 0:
                row_neg(t)
            # Clear row t and column t (restarts when a smaller pivot shows up).
            dirty = False
            for i in range(t + 1, r):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    row_add(-q, t, i)
                    if D[i][t]:
                        dirty = True
            for j in range(t + 1, c):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    col_add(-q, t, j)
                    if D[t][j]:
                        dirty = True
            if dirty:
                continue
            # Divisibility fix: fold a bad trailing entry into row t and redo.
            piv = D[t][t]
            bad = None
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if D[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(1, bad, t)
        if pivot_at(t) is None and D[t][t] == 0:
            break

    return D, U, V, Uinv, Vinv


def snf(M: IntMatrix) -> SnfResult:
    """Smith normal form: deterministic, minimal-|pivot| strategy."""
    D, U, V, _, _ = _snf_work(M)
    return SnfResult(IntMatrix.from_rows(U) if U else IntMatrix.zeros(0, 0),
                     IntMatrix(M.rows, M.cols, D),
                     IntMatrix.from_rows(V) if V else IntMatrix.zeros(0, 0))


def snf_extended(M: IntMatrix):
    """(U, D, V, Uinv, Vinv) with U@M@V == D and the tracked inverses."""
    D, U, V, Uinv, Vinv = _snf_work(M)
    mk = lambda rows, n: IntMatrix.from_rows(rows) if rows else IntMatrix.zeros(n, n)
    return (mk(U, M.rows), IntMatrix(M.rows, M.cols, D), mk(V, M.cols),
            mk(Uinv, M.rows), mk(Vinv, M.cols))


def rank(M: IntMatrix) -> int:
    return snf(M).rank()


def cokernel_invariants(M: IntMatrix) -> FGAbGroup:
    """Invariants of coker(M : Z^cols -> Z^rows)."""
    diag = snf(M).diagonal()
    nonzero = [d for d in diag if d]
    return FGAbGroup(M.rows - len(nonzero), tuple(d for d in nonzero if d > 1))


def solve(M: IntMatrix, b: Sequence[int]) -> Optional[tuple[int, ...]]:
    """One integer solution x of M x = b, or None if none exists."""
    res = solve_matrix(M, IntMatrix.column_vector(b))
    return res.column(0) if res is not None else None


def solve_matrix(M: IntMatrix, B: IntMatrix) -> Optional[IntMatrix]:
    """Integer solution X of M X = B (columnwise), or None."""
    if B.rows != M.rows:
        raise DimensionMismatch(f"rhs has {B.rows} rows, matrix has {M.rows}")
    U, D, V, _, _ = snf_extended(M)
    C = U @ B
    diag = tuple(D.data[i][i] for i in range(min(D.rows, D.cols)))
    Y = [[0] * B.cols for _ in range(M.cols)]
    for j in range(B.cols):
        for i in range(M.rows):
            ci = C.data[i][j]
            if i < len(diag) and diag[i]:
                q, rem = divmod(ci, diag[i])
                if rem:
                    return None
                Y[i][j] = q
            elif ci:
                return None
    return V @ IntMatrix(M.cols, B.cols, Y)


def kernel_basis(M: IntMatrix) -> IntMatrix:
    """Basis of ker(M) as columns; the kernel is split off as a direct summand."""
    _, D, V, _, _ = snf_extended(M)
    nz = sum(1 for i in range(min(D.rows, D.cols)) if D.data[i][i])
    return V.submatrix(range(V.rows), range(nz, V.cols))


def column_basis(M: IntMatrix) -> IntMatrix:
    """Basis (as columns) of the subgroup of Z^rows spanned by the columns of M."""
    _, D, _, Uinv, _ = snf_extended(M)
    cols = []
    for t in range(min(D.rows, D.cols)):
        d = D.data[t][t]
        if d:
            cols.append([d * Uinv.data[i][t] for i in range(M.rows)])
    out = IntMatrix(M.rows, len(cols), list(map(list, zip(*cols))) if cols else [[] for _ in range(M.rows)])
    return out


def unimodular_inverse(M: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular matrix (raises if not unimodular)."""
    if M.rows != M.cols:
        raise DimensionMismatch("only square matrices can be unimodular")
    U, D, V, _, _ = snf_extended(M)
    if any(D.data[i][i] not in (1, -1) for i in range(M.rows)):
        raise ValueError("matrix is not unimodular")
    # U M V = I  =>  M^-1 = V U  (diagonal entries are +1 by sign normalization)
    inv = V @ U
    return inv


def is_saturated_basis(M: IntMatrix) -> bool:
    """True when the columns are independent and span a direct summand."""
    diag = snf(M).diagonal()
    nz = [d for d in diag if d]
    return len(nz) == M.cols and all(d == 1 for d in nz)
