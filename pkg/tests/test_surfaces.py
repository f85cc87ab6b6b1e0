import numpy as np
import pytest

from multibord.errors import GenericityError

from multibord.multipoint import signed_count, sign_parity_exceptions
from multibord.pl_geometry import (
    builtin_mesh,
    builtin_parametric,
    fold_locus,
    mesh_double_locus_r3,
    mesh_double_points_r4,
    mesh_triple_points_r3,
    perturb_generic,
    pushoff_euler_number,
    tangent_direction_points,
)
from multibord.multipoint import homology_class


@pytest.fixture(scope="module")
def whitney13():
    mesh, recs, _ = perturb_generic(builtin_parametric("whitney").mesh(13), 1, certify=mesh_double_points_r4)
    return mesh, recs


def test_whitney_double_point(whitney13):
    mesh, recs = whitney13
    assert len(recs) == 2
    assert sorted(recs[0].simplices) == sorted(recs[1].simplices)
    assert {r.sign for r in recs} == {-1}
    assert np.allclose(recs[0].point, 0, atol=1e-6)  # w(0,0,+-1) = 0
    assert sign_parity_exceptions(recs, 2) == []


def test_whitney_pushoff(whitney13):
    mesh, _ = whitney13
    r = pushoff_euler_number(mesh, 1)
    assert r.euler == 2 and r.total == 0


def test_flat_sphere_in_r4():
    mesh, recs, _ = perturb_generic(builtin_parametric("sphere_r4").mesh(6), 1, certify=mesh_double_points_r4)
    assert recs == []
    assert pushoff_euler_number(mesh, 3).euler == 0
    p = builtin_parametric("sphere_r4")
    assert tangent_direction_points(p, (0.3, -0.5, 0.7, 0.4), p.domain(6)) == []


def test_mirror_flips_reversal_keeps(whitney13):
    mesh, recs = whitney13
    mir = mesh_double_points_r4(mesh.mirrored())
    assert sum(r.sign for r in mir) == -sum(r.sign for r in recs)
    rev = mesh_double_points_r4(mesh.reversed())
    assert sum(r.sign for r in rev) == sum(r.sign for r in recs)
    assert pushoff_euler_number(mesh.mirrored(), 1).euler == -2
    assert pushoff_euler_number(mesh.reversed(), 1).euler == 2


def test_boy_triple_point():
    mesh, segs, _ = perturb_generic(builtin_parametric("boy").mesh(20), 1, certify=mesh_double_locus_r3)
    recs = mesh_triple_points_r3(mesh, segs)
    c = signed_count(recs, 3, 1)
    assert c.geometric_points == 1 and c.unordered_total == 1
    assert len(recs) == 6


def test_embedded_torus_has_no_double_curve():
    raw = builtin_parametric("torus", {"R": 2, "r": 1}).mesh(16)
    # the symmetric sample has exactly coplanar neighbours: reported, not guessed
    with pytest.raises(GenericityError):
        mesh_double_locus_r3(raw)
    _, segs, _ = perturb_generic(raw, 1, certify=mesh_double_locus_r3)
    assert segs == []


def test_three_pancakes_triple_points():
    mesh, segs, _ = perturb_generic(builtin_mesh("three_pancakes", 8), 1, certify=mesh_double_locus_r3)
    recs = mesh_triple_points_r3(mesh, segs)
    c = signed_count(recs, 3, 1)
    assert c.geometric_points == 8 and len(recs) == 48
    assert sign_parity_exceptions(recs, 1) == []
    # three closed spheres: the signed triple count is a homological invariant (zero here)
    assert c.ordered_total == 0


def test_torus_fold_locus():
    p = builtin_parametric("torus", {"R": 2, "r": 1})
    K = p.domain(24)
    fl = fold_locus(p, (0, 0, 1), K)
    assert len(fl.curves) == 2
    assert homology_class(fl.chain, K).is_zero


def test_curve_tangent_points():
    circle = builtin_parametric("circle")
    pts = tangent_direction_points(circle, (0.6, 0.8))
    assert len(pts) == 2 and sum(q.sign for q in pts) == 2
    lim = builtin_parametric("limacon")
    pts = tangent_direction_points(lim, (0.6, 0.8))
    assert len(pts) == 4 and sum(q.sign for q in pts) == 4  # turning number 2
    f8 = builtin_parametric("figure8")
    assert sum(q.sign for q in tangent_direction_points(f8, (0.6, 0.8))) == 0  # turning number 0


def test_whitney_tangent_total():
    p = builtin_parametric("whitney")
    K = p.domain(13)
    for u in ((0.3, -0.5, 0.7, 0.4), (0, 0, 1, 0)):
        assert sum(q.sign for q in tangent_direction_points(p, u, K)) == 2


def test_sphere_fold_locus_single_null_curve():
    p = builtin_parametric("sphere_r3")
    K = p.domain(8)
    for u in ((0.3, -0.5, 0.81), (0, 0, 1)):
        fl = fold_locus(p, u, K)
        assert len(fl.curves) == 1
        assert homology_class(fl.chain, K).is_zero
