import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multibord.errors import GenericityError, InputError
from multibord.exact_linalg import GF2, ExactMatrix, rank, solve_linear
from multibord.multipoint import (
    CASES,
    MultiPointSet,
    assemble_curves,
    betti1_z2,
    double_preimage_chain,
    get_case,
    homology_class,
    sign_parity_exceptions,
    signed_count,
)
from multibord.pl_geometry import (
    IntersectionRecord,
    builtin_mesh,
    cube_sphere,
    mesh_double_locus_r3,
    perturb_generic,
    projective_plane,
    torus_grid,
)
from multibord.pl_geometry.intersect import DoubleSegment


def _boundary2(K):
    """Z/2 boundary matrix edges x triangles."""
    rows = [[0] * K.n_triangles for _ in range(K.n_edges)]
    for t, es in enumerate(K.tri_edges.tolist()):
        for e in es:
            rows[e][t] = 1
    return ExactMatrix(rows, GF2)


def _is_boundary(K, z):
    return solve_linear(_boundary2(K), [int(x) for x in z]) is not None


def _chain(K, edges):
    z = np.zeros(K.n_edges, dtype=np.int64)
    for e in edges:
        z[e] ^= 1
    return z


def _row_cycle(K, N, j):
    """Horizontal loop through the vertex row j of torus_grid(N, N)."""
    return [K.edge_index(j * N + i, j * N + (i + 1) % N) for i in range(N)]


def test_triangle_boundary_is_zero():
    K = torus_grid(4, 4)
    c = homology_class(K.tri_edges[5], K)
    assert c.is_zero and c.coords == (0, 0)


def test_torus_row_cycle_is_basis_vector():
    N = 4
    K = torus_grid(N, N)
    edges = _row_cycle(K, N, 0)
    c = homology_class(edges, K)
    assert not c.is_zero
    assert sorted(c.coords) == [0, 1]
    assert not _is_boundary(K, _chain(K, edges))
    # two parallel copies cancel
    two = homology_class(edges + _row_cycle(K, N, 2), K)
    assert two.is_zero
    assert _is_boundary(K, _chain(K, edges + _row_cycle(K, N, 2)))


def test_betti_numbers_match_rank():
    for K in (torus_grid(3, 4), projective_plane(2), cube_sphere(2)):
        d2 = _boundary2(K)
        rows = [[0] * K.n_edges for _ in range(K.n_vertices)]
        for e, (a, b) in enumerate(K.edges.tolist()):
            rows[a][e] = rows[b][e] = 1
        d1 = ExactMatrix(rows, GF2)
        assert betti1_z2(K) == K.n_edges - rank(d1) - rank(d2)


def test_not_a_cycle():
    K = torus_grid(3, 3)
    with pytest.raises(InputError):
        homology_class([0], K)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["torus", "rp2"]), st.data())
def test_homology_class_matches_snf(kind, data):
    K = torus_grid(4, 4) if kind == "torus" else projective_plane(2)
    tris = data.draw(st.lists(st.integers(0, K.n_triangles - 1), max_size=12))
    z = np.zeros(K.n_edges, dtype=np.int64)
    for t in tris:
        z[K.tri_edges[t]] ^= 1
    if kind == "torus":
        gens = [_row_cycle(K, 4, 1), [K.edge_index(i * 4 + 1, ((i + 1) % 4) * 4 + 1) for i in range(4)]]
    else:
        gens = []
    pick = [data.draw(st.booleans()) for _ in gens]
    for g, p in zip(gens, pick):
        if p:
            z ^= _chain(K, g)
    c = homology_class(np.flatnonzero(z), K)
    assert c.is_zero == _is_boundary(K, z)
    if kind == "torus":
        base = [homology_class(g, K).coords for g in gens]
        expect = tuple(sum(b[i] * p for b, p in zip(base, pick)) % 2 for i in range(2))
        assert c.coords == expect


def test_assemble_empty_and_open():
    assert assemble_curves([]) == []
    seg = DoubleSegment(0, 5, (("E", 1, 5), ("F", 0, 3)), (), (), ())
    with pytest.raises(GenericityError):
        assemble_curves([seg])


def test_two_tori_curves():
    m, segs, _ = perturb_generic(builtin_mesh("two_tori", 16), 1, certify=mesh_double_locus_r3)
    curves = assemble_curves(segs)
    assert sum(len(c) for c in curves) == 2 * len(segs)
    # each ambient double curve gives one curve of ordered pairs per sheet order
    assert len(curves) == 4
    for c in curves:
        firsts = {a for a, _ in c.pairs}
        sheet = {a < m.domain.n_triangles // 2 for a in firsts}
        assert len(sheet) == 1
    cls = homology_class(double_preimage_chain(m.domain, segs), m.domain)
    assert cls.is_zero


def _rec(k, simplices, sign):
    return IntersectionRecord(k, tuple(simplices), (), (), sign)


def test_signed_count_rules():
    even = [_rec(2, (1, 2), -1), _rec(2, (2, 1), -1)]
    assert signed_count(even, 2, 2).unordered_total == -2
    odd = [_rec(2, (1, 2), 1), _rec(2, (2, 1), -1)]
    r = signed_count(odd, 2, 1)
    assert (r.ordered_total, r.unordered_total, r.mode) == (0, 1, "F2")
    with pytest.raises(GenericityError):
        signed_count(even[:1], 2, 2)
    # an even-codim triple orbit whose total 5 is not divisible by 2! = 2
    perms = ((1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2))
    trip = [_rec(3, p, 1) for p in perms] + [_rec(3, (3, 2, 1), 0)]
    with pytest.raises(GenericityError):
        signed_count(trip, 3, 2)


def test_parity_exceptions_detected():
    assert sign_parity_exceptions([_rec(2, (1, 2), 1), _rec(2, (2, 1), 1)], 2) == []
    assert len(sign_parity_exceptions([_rec(2, (1, 2), 1), _rec(2, (2, 1), 1)], 1)) == 1
    assert sign_parity_exceptions([_rec(2, (1, 2), 0), _rec(2, (2, 1), 0)], 1) == []


def test_multipoint_set():
    recs = [_rec(2, (1, 2), 1), _rec(2, (2, 1), 1), _rec(2, (4, 7), -1), _rec(2, (7, 4), -1)]
    S = MultiPointSet.from_records(recs, 2)
    assert S.geometric_points == 2 and S.free_orbits_complete()


def test_case_registry():
    assert {"torus-r3", "boy", "whitney", "circle-r2"} <= set(CASES)
    with pytest.raises(InputError):
        get_case("klein")
    assert get_case("whitney").codim == 2 and get_case("boy").codim == 1
