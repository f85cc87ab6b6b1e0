from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from multibord.errors import InputError
from multibord.exact_linalg import (
    GF2,
    QQ,
    ZZ,
    CoeffSystem,
    ExactMatrix,
    format_scalar,
    kernel_basis,
    parse_scalar,
    rank,
    smith_normal_form,
    solve_linear,
)

small = st.integers(-6, 6)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_scalar_round_trip():
    assert parse_scalar("3/6") == Fraction(1, 2)
    assert parse_scalar("-4") == -4
    assert format_scalar(Fraction(-2, 4)) == "-1/2"
    assert format_scalar(Fraction(6, 3)) == "2"
    with pytest.raises(InputError):
        parse_scalar("1/0")


def test_coeff_systems():
    assert CoeffSystem.parse("F2") == GF2
    assert CoeffSystem.parse("Q") == QQ
    assert GF2(3) == 1
    assert CoeffSystem("F", 5).inverse(2) == 3
    with pytest.raises(InputError):
        CoeffSystem("F", 4)


def test_snf_known():
    # boundary of a filled triangle: edges -> vertices
    d1 = ExactMatrix([[-1, 0, -1], [1, -1, 0], [0, 1, 1]])
    U, D, V = smith_normal_form(d1)
    assert [D[i, i] for i in range(3)] == [1, 1, 0]
    A = ExactMatrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    _, D, _ = smith_normal_form(A)
    assert [abs(D[i, i]) for i in range(3)] == [2, 6, 12]


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_snf_factorization(rows):
    A = ExactMatrix(rows)
    U, D, V = smith_normal_form(A)
    assert U @ A @ V == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    diag = [D[i, i] for i in range(min(A.shape))]
    for i in range(A.rows):
        for j in range(A.cols):
            if i != j:
                assert D[i, j] == 0
    nz = [d for d in diag if d]
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    assert len(nz) == rank(A)


@settings(max_examples=60, deadline=None)
@given(matrices(), st.sampled_from([ZZ, QQ, GF2, CoeffSystem("F", 3)]))
def test_kernel_and_solve(rows, k):
    A = ExactMatrix(rows, k)
    for v in kernel_basis(A):
        assert all(x == 0 for x in A.apply(v))
    assert len(kernel_basis(A)) == A.cols - rank(A)
    x0 = tuple(k(i + 1) for i in range(A.cols))
    b = A.apply(x0)
    x = solve_linear(A, b)
    assert x is not None and A.apply(x) == b


def test_solve_inconsistent():
    assert solve_linear(ExactMatrix([[2]]), [1]) is None
    assert solve_linear(ExactMatrix([[2]], QQ), [1]) == (Fraction(1, 2),)
    assert solve_linear(ExactMatrix([[1], [1]], GF2), [0, 1]) is None


def test_det_and_inverse():
    A = ExactMatrix([[2, 1], [7, 4]])
    assert A.det() == 1
    assert A @ A.inverse() == ExactMatrix.identity(2)
    B = ExactMatrix([[1, 1], [1, 0]], GF2)
    assert B @ B.inverse() == ExactMatrix.identity(2, GF2)
