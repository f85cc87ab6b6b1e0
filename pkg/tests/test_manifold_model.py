import itertools

import pytest
from hypothesis import given, settings, strategies as st

from multibord.errors import DegreeError, InputError
from multibord.exact_linalg import GF2, ZZ, ExactMatrix
from multibord.manifold_model import builtin_manifold, cap, gamma, pd

ORIENTED = [
    builtin_manifold("sphere", {"n": 2}),
    builtin_manifold("sphere", {"n": 3}),
    builtin_manifold("torus", {"n": 2}),
    builtin_manifold("torus", {"n": 3}),
    builtin_manifold("surface", {"genus": 2}),
    builtin_manifold("complex_projective", {"n": 2}),
    builtin_manifold("product", {"a": {"name": "sphere", "params": {"n": 2}}, "b": {"name": "sphere", "params": {"n": 2}}}),
]
ALL = ORIENTED + [builtin_manifold("projective_plane", coeffs=GF2)]


def test_builtin_ranks():
    assert builtin_manifold("sphere", {"n": 2}).ring.ranks == (1, 0, 1)
    assert builtin_manifold("torus", {"n": 2}).ring.ranks == (1, 2, 1)
    assert builtin_manifold("euclidean", {"m": 4}).ring.ranks == (0, 0, 0, 0, 1)
    with pytest.raises(InputError):
        builtin_manifold("projective_plane")
    with pytest.raises(InputError):
        builtin_manifold("klein_bottle")


@pytest.mark.parametrize("M", ALL, ids=lambda M: M.name)
def test_duality_round_trip(M):
    assert M.check() == []
    assert pd(M, M.fundamental_class()) == M.ring.unit()
    for d in range(M.dim + 1):
        for i in range(M.homology_rank(d)):
            x = M.homology(d, [1 if j == i else 0 for j in range(M.homology_rank(d))])
            assert gamma(M, pd(M, x)) == x
            assert cap(M.ring.unit(), x) == x


@pytest.mark.parametrize("M", ALL, ids=lambda M: M.name)
def test_cap_cup_compatible(M):
    R = M.ring
    for p, q in itertools.product(range(M.dim + 1), repeat=2):
        for d in range(p + q, M.dim + 1):
            for a in R.basis_elements(p):
                for b in R.basis_elements(q):
                    for i in range(M.homology_rank(d)):
                        x = M.homology(d, [1 if j == i else 0 for j in range(M.homology_rank(d))])
                        assert cap(a, cap(b, x)) == cap(a.cup(b), x)


@pytest.mark.parametrize("M", ORIENTED, ids=lambda M: M.name)
def test_cup_pairing_unimodular(M):
    R = M.ring
    top = R.top_class()
    for d in range(M.dim + 1):
        rows = [[a.cup(b).coords[0] * top.coords[0] for b in R.basis_elements(M.dim - d)] for a in R.basis_elements(d)]
        if rows:
            assert abs(ExactMatrix(rows, ZZ).det()) == 1


def test_sphere_point_and_torus_cycles():
    S = builtin_manifold("sphere", {"n": 2})
    assert pd(S, S.point_class()) == S.ring.top_class()
    T = builtin_manifold("torus", {"n": 2})
    alpha, beta = T.ring.basis(1, 0), T.ring.basis(1, 1)
    # the (1,0)-cycle: pd is the class pairing to 1 against it
    x = T.homology(1, [1, 0])
    assert T.pairing(alpha, x) == 1 and T.pairing(beta, x) == 0
    c = cap(alpha, T.fundamental_class())
    assert c == gamma(T, alpha)
    assert T.pairing(beta, c) in (1, -1) and T.pairing(alpha, c) == 0


def test_unoriented_duality_needs_f2():
    P = builtin_manifold("projective_plane", coeffs=GF2)
    assert pd(P, P.point_class()) == P.ring.top_class()
    with pytest.raises(DegreeError):
        cap(P.ring.top_class(), P.homology(1, [1]))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ORIENTED), st.data())
def test_pd_linear(M, data):
    d = data.draw(st.integers(0, M.dim))
    r = M.homology_rank(d)
    u = [data.draw(st.integers(-4, 4)) for _ in range(r)]
    v = [data.draw(st.integers(-4, 4)) for _ in range(r)]
    s = [a + b for a, b in zip(u, v)]
    assert pd(M, M.homology(d, s)) == pd(M, M.homology(d, u)) + pd(M, M.homology(d, v))
