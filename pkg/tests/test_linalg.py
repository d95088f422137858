from __future__ import annotations

from itertools import combinations

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form

from deltafpt.errors import DimensionError, RankError, SingularMatrixError
from deltafpt.linalg import (
    IntMatrix,
    adjugate,
    det,
    has_singular_rank_submatrix,
    hnf_normalize,
    max_rank_minor,
    rank,
    snf,
    unimodular_inverse,
    xgcd,
)


def square(n, lo=-6, hi=6):
    return st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n)


@st.composite
def full_rank(draw, max_n=4, max_extra=2, bound=6):
    n = draw(st.integers(1, max_n))
    d = n + draw(st.integers(0, max_extra))
    rows = draw(st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n), min_size=d, max_size=d))
    H = IntMatrix.from_rows(rows, n)
    from hypothesis import assume

    assume(rank(H) == n)
    return H


def test_det_small():
    assert det([[2, 1], [1, 2]]) == 3
    assert det(IntMatrix.zeros(0, 0)) == 1
    with pytest.raises(DimensionError):
        det([[1, 2, 3]])


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(square))
def test_det_matches_sympy(rows):
    assert det(rows) == sympy.Matrix(rows).det()


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(square))
def test_adjugate_identity(rows):
    M = IntMatrix.from_rows(rows, len(rows))
    n = M.rows
    assert (M @ adjugate(M)).to_rows() == [[det(M) * (i == j) for j in range(n)] for i in range(n)]


def test_adjugate_example():
    assert adjugate([[2, 0], [1, 3]]).to_rows() == [[3, 0], [-1, 2]]


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_xgcd(a, b):
    g, x, y = xgcd(a, b)
    assert g >= 0 and a * x + b * y == g
    assert g == sympy.gcd(a, b)


def test_delta_examples():
    assert max_rank_minor([[1, 0], [0, 2], [1, 1]]) == 2
    assert max_rank_minor([[2, 1], [0, 1]]) == 2
    assert has_singular_rank_submatrix([[1, 0], [2, 0], [0, 1]])
    assert not has_singular_rank_submatrix([[1, 0], [0, 2], [1, 1]])
    with pytest.raises(RankError):
        max_rank_minor([[1, 2], [2, 4]])


@settings(max_examples=100, deadline=None)
@given(full_rank())
def test_delta_brute(H):
    minors = [abs(sympy.Matrix(H.submatrix(r).to_rows()).det()) for r in combinations(range(H.rows), H.cols)]
    assert max_rank_minor(H) == max(minors)
    assert has_singular_rank_submatrix(H) == (0 in minors)


def check_form(H, form):
    assert abs(det(form.col_transform)) == 1
    assert sorted(form.row_perm) == list(range(H.rows))
    assert H.submatrix(form.row_perm) @ form.col_transform == form.full()
    assert form.n == H.cols and form.d == H.rows
    for i in range(form.s):
        assert form.blockB[i, i] >= 2
        assert all(form.blockB[i, j] == 0 for j in range(i + 1, form.s))
    assert form.delta_small == abs(det(H.submatrix(form.row_perm[: H.cols])))


def test_form_example():
    H = IntMatrix.from_rows([[1, 0], [0, 2], [1, 1]])
    form = hnf_normalize(H)
    assert (form.k, form.s, form.m) == (1, 1, 1)
    check_form(H, form)


@settings(max_examples=150, deadline=None)
@given(full_rank())
def test_form_properties(H):
    form = hnf_normalize(H)
    check_form(H, form)
    t = tuple(range(1, H.cols + 1))
    assert form.to_input_coordinates(form.to_form_coordinates(t)) == t


def test_form_rejects_rank_deficient():
    with pytest.raises(RankError):
        hnf_normalize([[1, 1], [2, 2]])


def check_snf(B, dec):
    n = B.rows
    assert abs(det(dec.P)) == 1 and abs(det(dec.Q)) == 1
    assert dec.P @ B @ dec.Q == dec.S
    diag = dec.diagonal
    assert all(dec.S[i, j] == 0 for i in range(n) for j in range(n) if i != j)
    assert all(x > 0 for x in diag)
    assert all(diag[i + 1] % diag[i] == 0 for i in range(n - 1))
    assert sympy.prod(diag) == abs(det(B))


def test_snf_example():
    dec = snf([[2, 1], [0, 2]])
    assert dec.diagonal == (1, 4)
    check_snf(IntMatrix.from_rows([[2, 1], [0, 2]]), dec)


def test_snf_singular():
    with pytest.raises(SingularMatrixError):
        snf([[1, 2], [2, 4]])


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4).flatmap(square))
def test_snf_matches_sympy(rows):
    B = IntMatrix.from_rows(rows, len(rows))
    if det(B) == 0:
        return
    dec = snf(B)
    check_snf(B, dec)
    ref = smith_normal_form(sympy.Matrix(rows), domain=sympy.ZZ)
    assert dec.diagonal == tuple(abs(int(ref[i, i])) for i in range(B.rows))


def test_unimodular_inverse():
    U = IntMatrix.from_rows([[2, 1], [1, 1]])
    assert U @ unimodular_inverse(U) == IntMatrix.identity(2)
    with pytest.raises(SingularMatrixError):
        unimodular_inverse([[2, 0], [0, 1]])


def test_matrix_basics():
    M = IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]])
    assert M.shape == (2, 3)
    assert M.T.to_rows() == [[1, 4], [2, 5], [3, 6]]
    assert M.apply([1, 0, -1]) == (-2, -2)
    assert M.submatrix([1], [0, 2]).to_rows() == [[4, 6]]
    assert M.max_abs() == 6
    assert IntMatrix.zeros(0, 3).shape == (0, 3)
