import json

import pytest
from hypothesis import given, settings, strategies as st

from multibord.errors import DegreeError, InputError
from multibord.exact_linalg import GF2, QQ, ExactMatrix
from multibord.fixtures import builtin_fixture, builtin_fixture_document, parse_fixture
from multibord.immersion_algebra import (
    ImmersionAlgebraic,
    euler_from_double_class,
    gysin_shriek,
    herbert_chain,
    mk_scaled,
    multipoint_classes,
    phi,
    projection_formula_check,
    pullback,
    pushforward,
    rational_consistency,
    vk_scaled,
)
from multibord.manifold_model import builtin_manifold

FIX = builtin_fixture()


@pytest.mark.parametrize("name", sorted(FIX.immersions))
def test_fixture_coherence(name):
    F = FIX.immersion(name)
    assert rational_consistency(F, 4)["passed"]
    assert projection_formula_check(F)["passed"]


def test_line_in_plane():
    F = FIX.immersion("cp1_in_cp2")
    assert F.euler == pullback(F, gysin_shriek(F, F.source.ring.unit()))
    for k in (2, 3, 4):
        assert vk_scaled(F, k).is_zero()


def test_nodal_cubic():
    # plane cubic of genus 0: (3-1)(3-2)/2 = 1 node, normal degree 3*3 - 2 = 7
    F = FIX.immersion("nodal_cubic_s2_cp2")
    assert F.euler.coords == (7,)
    mc = multipoint_classes(F, 2)
    assert mc.v.coords == (2,)
    assert mc.m.coords == (1,)


def test_boy_mod2_chain():
    F = FIX.immersion("rp2_r3_boy")
    assert F.mode == "F2" and F.unoriented_extension
    chain = herbert_chain(F, 3)
    v2, v3 = chain[1][0], chain[2][0]
    a = F.source.ring.basis(1, 0)
    assert v2 == a
    assert v3 == a.cup(a) and not v3.is_zero()
    assert chain[2][1] == F.target.ring.top_class()


def test_whitney_double_class():
    F = FIX.immersion("whitney_s2_r4")
    v2 = multipoint_classes(F, 2).v
    assert abs(v2.coords[0]) == 2
    # Euler number from the double class D = (-1)^(m-1) * v2 of the tangent side
    D = F.source.homology(0, [-v2.coords[0]])
    assert euler_from_double_class(F, D) == F.euler


def test_embedding_euler_is_self_intersection():
    F = FIX.immersion("diagonal_s2_s2xs2")
    assert pullback(F, gysin_shriek(F, F.source.ring.unit())).coords == (2,)
    assert vk_scaled(F, 2).is_zero()


def test_scaled_composite_vs_recursion_synthetic():
    F = FIX.immersion("synthetic_cp3_cp4")
    chain = herbert_chain(F, 4)
    assert len(chain) == 3 and chain[-1][1] is None  # 3 does not divide f_!(v_3) over Z
    FQ = F.with_coeffs(QQ)
    chain_q = herbert_chain(FQ, 4)
    for k, (v, _) in enumerate(chain_q, start=1):
        fact = 1
        for j in range(2, k):
            fact *= j
        assert v * fact == vk_scaled(FQ, k)


def test_phi_definition():
    F = FIX.immersion("nodal_cubic_s2_cp2")
    one = F.source.ring.unit()
    assert phi(F, one, 1) == pullback(F, gysin_shriek(F, one)) - F.euler.cup(one)
    assert mk_scaled(F, 2) == gysin_shriek(F, vk_scaled(F, 2))


def test_pushforward_point():
    F = FIX.immersion("cp1_in_cp2")
    assert pushforward(F, F.source.point_class()) == F.target.point_class()


def test_invalid_immersions_rejected():
    S2, CP2 = builtin_manifold("sphere", {"n": 2}), builtin_manifold("complex_projective", {"n": 2})
    e = S2.ring.element(2, [1])
    with pytest.raises(DegreeError):
        ImmersionAlgebraic(S2, builtin_manifold("sphere", {"n": 2}), {}, {}, e)
    with pytest.raises(DegreeError):
        ImmersionAlgebraic(S2, builtin_manifold("euclidean", {"m": 3}), {}, {}, e)
    with pytest.raises(InputError):
        ImmersionAlgebraic(S2, CP2, {2: ExactMatrix([[1, 2]])}, {}, e)
    doc = builtin_fixture_document()
    doc["immersions"]["cp1_in_cp2"]["target"] = "nowhere"
    with pytest.raises(InputError):
        parse_fixture(doc)


def test_fixture_json_round_trip(tmp_path):
    doc = builtin_fixture_document()
    again = parse_fixture(json.loads(json.dumps(doc)))
    assert sorted(again.immersions) == sorted(FIX.immersions)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(-20, 40))
def test_plane_curve_double_point_formula(d, e):
    """S^2 -> CP^2 of degree d with normal degree e: v_2 = (d^2 - e) s, 2 m_2 = (d^2 - e) h^2."""
    S2, CP2 = builtin_manifold("sphere", {"n": 2}), builtin_manifold("complex_projective", {"n": 2})
    F = ImmersionAlgebraic(
        S2, CP2, {2: ExactMatrix([[d]])}, {2: ExactMatrix([[d]])}, S2.ring.element(2, [e]), name="curve"
    )
    assert vk_scaled(F, 2).coords == (d * d - e,)
    assert mk_scaled(F, 2).coords == (d * d - e,)
    assert rational_consistency(F, 4)["passed"]
    assert projection_formula_check(F)["passed"]
    m2 = herbert_chain(F, 2)[-1][1]
    if (d * d - e) % 2:
        assert m2 is None
    else:
        assert m2.coords == ((d * d - e) // 2,)


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-4, 4))
def test_projection_formula_surface_in_s2xs2(a, b, e):
    S2 = builtin_manifold("sphere", {"n": 2})
    P = builtin_manifold(
        "product", {"a": {"name": "sphere", "params": {"n": 2}}, "b": {"name": "sphere", "params": {"n": 2}}}
    )
    F = ImmersionAlgebraic(S2, P, {2: ExactMatrix([[a, b]])}, {2: ExactMatrix([[a], [b]])}, S2.ring.element(2, [e]))
    assert projection_formula_check(F)["passed"]
    assert rational_consistency(F, 3)["passed"]
    if a != b:
        # f_* that is not the transpose of f^* breaks the projection formula
        G = ImmersionAlgebraic(S2, P, {2: ExactMatrix([[a, b]])}, {2: ExactMatrix([[b], [a]])}, S2.ring.element(2, [e]))
        assert not projection_formula_check(G)["passed"]
