"""Exact integer linear algebra.

Everything here works on Python ints, so there is no overflow and no
rounding. Matrices are small (the solvers target desk-scale instances),
which keeps the plain list-of-lists algorithms below fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod
from typing import Iterable, Sequence

from .errors import DimensionError, RankError, SingularMatrixError, StructureError


@dataclass(frozen=True)
class IntMatrix:
    """Dense row-major matrix of exact integers.

    Zero-sized matrices are allowed so that empty blocks of a normal form
    (for example ``blockB`` when every pivot is 1) stay ordinary values.
    """

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative matrix dimension")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionError("ragged rows")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def column(cls, values: Iterable[int]) -> IntMatrix:
        values = [int(v) for v in values]
        return cls(len(values), 1, tuple(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[int, ...]:
        return self.entries[j::self.cols] if self.cols else ()

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def T(self) -> IntMatrix:
        return IntMatrix.from_rows([list(self.col(j)) for j in range(self.cols)], self.rows)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.cols)]
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(self.row(i), c)) for c in cols] for i in range(self.rows)],
            other.cols,
        )

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Matrix-vector product ``self @ vector``."""
        if len(vector) != self.cols:
            raise DimensionError(f"vector of length {len(vector)} for {self.shape} matrix")
        return tuple(sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> IntMatrix:
        if cols is None:
            cols = range(self.cols)
        cols = list(cols)
        return IntMatrix.from_rows([[self[i, j] for j in cols] for i in rows], len(cols))

    def scale(self, factor: int) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(factor * x for x in self.entries))

    def max_abs(self) -> int:
        return max((abs(x) for x in self.entries), default=0)

    def __repr__(self) -> str:
        return f"IntMatrix({self.to_rows()!r})"


def as_matrix(value) -> IntMatrix:
    if isinstance(value, IntMatrix):
        return value
    return IntMatrix.from_rows(value)


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def det(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    M = as_matrix(M)
    if not M.is_square:
        raise DimensionError(f"determinant of non-square {M.shape} matrix")
    n = M.rows
    if n == 0:
        return 1
    a = M.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                # exact division is the Bareiss invariant
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def rank(M) -> int:
    M = as_matrix(M)
    a = M.to_rows()
    r = 0
    for c in range(M.cols):
        pivot = next((i for i in range(r, M.rows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        for i in range(r + 1, M.rows):
            if a[i][c]:
                f, g = a[i][c], a[r][c]
                a[i] = [g * x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == M.rows:
            break
    return r


def _require_full_column_rank(H: IntMatrix) -> None:
    if H.rows < H.cols:
        raise StructureError(f"need d >= n, got {H.rows}x{H.cols}")
    if rank(H) != H.cols:
        raise RankError(f"matrix of shape {H.shape} does not have rank {H.cols}")


def rank_minors(H) -> list[tuple[tuple[int, ...], int]]:
    """All ``(row subset, determinant)`` pairs of n x n row-submatrices.

    Enumerates C(d, n) subsets, which is exponential in d - n; callers
    stay in the d - n <= 3 regime.
    """
    H = as_matrix(H)
    return [(rows, det(H.submatrix(rows))) for rows in combinations(range(H.rows), H.cols)]


def max_rank_minor(H) -> int:
    """Maximal absolute value of the n x n minors of a rank-n matrix."""
    H = as_matrix(H)
    _require_full_column_rank(H)
    return max(abs(d) for _, d in rank_minors(H))


def has_singular_rank_submatrix(H) -> bool:
    H = as_matrix(H)
    _require_full_column_rank(H)
    return any(d == 0 for _, d in rank_minors(H))


def adjugate(B) -> IntMatrix:
    """Classical adjoint, so that ``B @ adjugate(B) == det(B) * I``."""
    B = as_matrix(B)
    if not B.is_square:
        raise DimensionError(f"adjugate of non-square {B.shape} matrix")
    n = B.rows
    if n == 1:
        return IntMatrix.identity(1)
    rows = B.to_rows()
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            adj[j][i] = (-1) ** (i + j) * det(IntMatrix.from_rows(minor, n - 1))
    return IntMatrix.from_rows(adj, n)


def unimodular_inverse(U) -> IntMatrix:
    U = as_matrix(U)
    d = det(U)
    if d not in (1, -1):
        raise SingularMatrixError(f"matrix with determinant {d} is not unimodular")
    return adjugate(U).scale(d)


# -- Hermite normal form ------------------------------------------------------


@dataclass(frozen=True)
class HnfForm:
    """A rank-n matrix brought to the block shape

        [ I_k  0 ]
        [ A    B ]      B lower triangular, diagonal >= 2
        [ Abar Bbar ]

    by unimodular column operations and a row permutation:
    ``H.submatrix(row_perm) @ col_transform == full()``.

    ``col_perm[j]`` is the column of the (unpermuted) Hermite form that
    became column ``j`` here; ``col_transform`` already includes it.
    """

    k: int
    s: int
    m: int
    blockA: IntMatrix
    blockB: IntMatrix
    blockAbar: IntMatrix
    blockBbar: IntMatrix
    row_perm: tuple[int, ...]
    col_perm: tuple[int, ...]
    col_transform: IntMatrix

    @property
    def n(self) -> int:
        return self.k + self.s

    @property
    def d(self) -> int:
        return self.k + self.s + self.m

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(self.blockB[i, i] for i in range(self.s))

    @property
    def delta_small(self) -> int:
        """Product of the non-unit pivots, i.e. |det| of the top n rows."""
        return prod(self.pivots)

    def full(self) -> IntMatrix:
        k, s, m = self.k, self.s, self.m
        rows = [[int(i == j) for j in range(k + s)] for i in range(k)]
        rows += [list(self.blockA.row(i)) + list(self.blockB.row(i)) for i in range(s)]
        rows += [list(self.blockAbar.row(i)) + list(self.blockBbar.row(i)) for i in range(m)]
        return IntMatrix.from_rows(rows, k + s)

    def stacked_residual(self) -> IntMatrix:
        """The (s + m) x k matrix A over Abar."""
        rows = [list(self.blockA.row(i)) for i in range(self.s)]
        rows += [list(self.blockAbar.row(i)) for i in range(self.m)]
        return IntMatrix.from_rows(rows, self.k)

    def to_form_coordinates(self, coeffs: Sequence[int]) -> tuple[int, ...]:
        """Map input-lattice coefficients t to form coefficients U^{-1} t."""
        return unimodular_inverse(self.col_transform).apply(coeffs)

    def to_input_coordinates(self, coeffs: Sequence[int]) -> tuple[int, ...]:
        return self.col_transform.apply(coeffs)


def _combine_columns(a: list[list[int]], U: list[list[int]], r: int, c: int, j: int) -> None:
    """Column operation zeroing a[r][j] against a[r][c] (unimodular)."""
    x, y = a[r][c], a[r][j]
    if y == 0:
        return
    if x != 0 and y % x == 0:
        q = y // x
        for mat in (a, U):
            for row in mat:
                row[j] -= q * row[c]
        return
    g, s, t = xgcd(x, y)
    p, q = -y // g, x // g
    for mat in (a, U):
        for row in mat:
            rc, rj = row[c], row[j]
            row[c] = s * rc + t * rj
            row[j] = p * rc + q * rj


def column_hnf(H) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Lower column-echelon Hermite form ``H @ U`` of a rank-n matrix.

    Returns ``(HU, U, pivot_rows)``. Pivots are positive and every entry
    left of a pivot is reduced into ``[0, pivot)``.
    """
    H = as_matrix(H)
    d, n = H.shape
    a = H.to_rows()
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    pivot_rows: list[int] = []
    c = 0
    for r in range(d):
        if c == n:
            break
        for j in range(c + 1, n):
            _combine_columns(a, U, r, c, j)
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            for mat in (a, U):
                for row in mat:
                    row[c] = -row[c]
        pivot = a[r][c]
        for j in range(c):
            q = a[r][j] // pivot
            if q:
                for mat in (a, U):
                    for row in mat:
                        row[j] -= q * row[c]
        pivot_rows.append(r)
        c += 1
    if c < n:
        raise RankError(f"matrix of shape {H.shape} has rank {c} < {n}")
    return a, U, pivot_rows


def hnf_normalize(H) -> HnfForm:
    """Bring a rank-n d x n matrix (d >= n) into the block form of HnfForm."""
    H = as_matrix(H)
    if H.rows < H.cols or H.cols == 0:
        raise StructureError(f"need d >= n >= 1, got shape {H.shape}")
    hu, U, pivot_rows = column_hnf(H)
    d, n = H.shape
    unit = [j for j in range(n) if hu[pivot_rows[j]][j] == 1]
    big = [j for j in range(n) if hu[pivot_rows[j]][j] != 1]
    col_perm = tuple(unit + big)
    pivot_set = set(pivot_rows)
    row_perm = tuple(
        [pivot_rows[j] for j in unit]
        + [pivot_rows[j] for j in big]
        + [i for i in range(d) if i not in pivot_set]
    )
    transform = IntMatrix.from_rows([[U[i][j] for j in col_perm] for i in range(n)], n)
    F = [[hu[i][j] for j in col_perm] for i in row_perm]
    k, s = len(unit), len(big)
    m = d - n

    def block(r0, r1, c0, c1):
        return IntMatrix.from_rows([row[c0:c1] for row in F[r0:r1]], c1 - c0)

    return HnfForm(
        k=k,
        s=s,
        m=m,
        blockA=block(k, k + s, 0, k),
        blockB=block(k, k + s, k, n),
        blockAbar=block(n, d, 0, k),
        blockBbar=block(n, d, k, n),
        row_perm=row_perm,
        col_perm=col_perm,
        col_transform=transform,
    )


# -- Smith normal form --------------------------------------------------------


@dataclass(frozen=True)
class SnfDecomposition:
    """``S == P @ B @ Q`` with S diagonal and P, Q unimodular."""

    S: IntMatrix
    P: IntMatrix
    Q: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.S[i, i] for i in range(self.S.rows))


def snf(B) -> SnfDecomposition:
    B = as_matrix(B)
    if not B.is_square:
        raise DimensionError(f"Smith form of non-square {B.shape} matrix")
    if det(B) == 0:
        raise SingularMatrixError("Smith form requested for a singular matrix")
    n = B.rows
    a = B.to_rows()
    P = [[int(i == j) for j in range(n)] for i in range(n)]
    Q = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(dst, src, q):
        # row[dst] -= q * row[src]
        for mat in (a, P):
            mat[dst] = [x - q * y for x, y in zip(mat[dst], mat[src])]

    def col_op(dst, src, q):
        for mat in (a, Q):
            for row in mat:
                row[dst] -= q * row[src]

    for t in range(n):
        while True:
            _, pi, pj = min(
                (abs(a[i][j]), i, j)
                for i in range(t, n)
                for j in range(t, n)
                if a[i][j] != 0
            )
            a[t], a[pi] = a[pi], a[t]
            P[t], P[pi] = P[pi], P[t]
            for mat in (a, Q):
                for row in mat:
                    row[t], row[pj] = row[pj], row[t]
            clean = True
            for i in range(t + 1, n):
                q = a[i][t] // a[t][t]
                if q:
                    row_op(i, t, q)
                clean = clean and a[i][t] == 0
            for j in range(t + 1, n):
                q = a[t][j] // a[t][t]
                if q:
                    col_op(j, t, q)
                clean = clean and a[t][j] == 0
            if not clean:
                continue
            pivot = a[t][t]
            bad = next(
                (i for i in range(t + 1, n) for j in range(t + 1, n) if a[i][j] % pivot),
                None,
            )
            if bad is None:
                break
            row_op(t, bad, -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            P[t] = [-x for x in P[t]]
    return SnfDecomposition(
        S=IntMatrix.from_rows(a, n),
        P=IntMatrix.from_rows(P, n),
        Q=IntMatrix.from_rows(Q, n),
    )
