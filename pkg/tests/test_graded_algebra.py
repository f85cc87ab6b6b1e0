import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multibord.errors import DegreeError, InputError
from multibord.exact_linalg import GF2, QQ, ZZ
from multibord.graded_algebra import (
    GradedRing,
    complex_projective_ring,
    compact_support_euclidean_ring,
    exterior_ring,
    projective_plane_ring,
    scale_add,
    sphere_ring,
    surface_ring,
    tensor_ring,
    validate_ring,
)
from multibord.pl_geometry.domain import projective_plane, torus_grid

BUILTIN_RINGS = [
    sphere_ring(2),
    sphere_ring(3, QQ),
    exterior_ring(2),
    exterior_ring(3),
    surface_ring(2),
    projective_plane_ring(),
    complex_projective_ring(3),
    compact_support_euclidean_ring(4),
    tensor_ring(sphere_ring(2), sphere_ring(2)),
    tensor_ring(exterior_ring(2), sphere_ring(1)),
]


@pytest.mark.parametrize("R", BUILTIN_RINGS, ids=lambda R: R.name)
def test_builtin_rings_valid(R):
    assert validate_ring(R) == []


def test_unit_and_torus_products():
    T = exterior_ring(2)
    one, a, b = T.unit(), T.basis(1, 0), T.basis(1, 1)
    assert one.cup(a) == a
    assert a.cup(b) == T.top_class()
    assert b.cup(a) == -T.top_class()
    assert a.cup(a).is_zero()


def test_projective_plane_square():
    P = projective_plane_ring()
    a = P.basis(1, 0)
    assert a.cup(a) == P.top_class()
    with pytest.raises(InputError):
        projective_plane_ring(ZZ)


def test_cup_above_top_rejected():
    R = complex_projective_ring(1)
    h = R.basis(2, 0)
    with pytest.raises(DegreeError):
        h.cup(h)


def test_scale_add_examples():
    R = sphere_ring(2)
    s = R.basis(2, 0)
    assert scale_add(1, s, -1, s).is_zero()
    assert scale_add(2, s, 0, s) == s * 2
    F = sphere_ring(2, GF2)
    t = F.basis(2, 0)
    assert scale_add(1, t, 1, t).is_zero()
    with pytest.raises(DegreeError):
        scale_add(1, R.unit(), 1, s)


def test_corrupted_table_reports_violations():
    # torus ring with a*b = b*a = top: breaks graded commutativity for that pair only
    tables = {(1, 1): [[[0], [1]], [[1], [0]]]}
    R = GradedRing(2, [1, 2, 1], tables, ZZ, "bad")
    v = validate_ring(R)
    assert [x.law for x in v] == ["graded-commutativity"]
    assert v[0].degrees == (1, 1) and v[0].indices == (0, 1)
    # the same symmetric table is fine in characteristic 2
    assert validate_ring(GradedRing(2, [1, 2, 1], tables, GF2, "ok2")) == []


def _alexander_whitney_pairing(K, alpha, beta):
    """<alpha cup beta, [K]> over F_2, cochains given as edge indicator vectors."""
    total = 0
    for t in K.triangles:
        v0, v1, v2 = sorted(int(x) for x in t)
        total += alpha[K.edge_index(v0, v1)] * beta[K.edge_index(v1, v2)]
    return total % 2


def _indicator(K, edges):
    z = np.zeros(K.n_edges, dtype=int)
    z[list(edges)] = 1
    return z


def test_torus_cup_matches_simplicial_oracle():
    K = torus_grid(3, 3)
    assert K.n_triangles == 18
    s, t = (_indicator(K, K.cocycles[n]) for n in ("s", "t"))
    assert _alexander_whitney_pairing(K, s, t) == 1
    assert _alexander_whitney_pairing(K, s, s) == 0
    T = exterior_ring(2, GF2)
    assert T.basis(1, 0).cup(T.basis(1, 1)) == T.top_class()
    assert T.basis(1, 0).cup(T.basis(1, 0)).is_zero()


def test_projective_plane_cup_matches_simplicial_oracle():
    K = projective_plane(2)
    w = _indicator(K, K.cocycles["w1"])
    assert _alexander_whitney_pairing(K, w, w) == 1
    P = projective_plane_ring()
    assert P.basis(1, 0).cup(P.basis(1, 0)) == P.top_class()


ring_and_degrees = st.sampled_from(BUILTIN_RINGS[:-3] + [tensor_ring(sphere_ring(2), sphere_ring(2))])


def _random_element(R, d, data):
    k = R.coeffs
    return R.element(d, [k(data.draw(st.integers(-3, 3))) for _ in range(R.rank(d))])


@settings(max_examples=80, deadline=None)
@given(ring_and_degrees, st.data())
def test_cup_bilinear_and_graded(R, data):
    n = R.top_degree
    p = data.draw(st.integers(0, n))
    q = data.draw(st.integers(0, n - p))
    a, a2 = _random_element(R, p, data), _random_element(R, p, data)
    b = _random_element(R, q, data)
    ab = a.cup(b)
    assert ab.degree == p + q
    assert (a + a2).cup(b) == ab + a2.cup(b)
    sign = 1 if R.coeffs == GF2 else (-1) ** (p * q)
    assert ab == b.cup(a) * sign
