"""Multiple-point manifolds from raw intersection data, and the verdicts.

* :func:`assemble_curves` glues double-locus segments of a surface in R^3
  into closed curves of V_2 (ordered pairs), using the endpoint labels.
* :func:`homology_class` computes Z/2 H_1 coordinates of an edge cycle.
* :func:`signed_count` reduces 0-dimensional records to ordered and
  unordered totals.
* :func:`verify_lemma_double` and :func:`verify_euler_corollary` compare the
  double-point side with the tangent-direction side on registered cases.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GenericityError, InputError
from .fixtures import builtin_fixture
from .immersion_algebra import euler_from_double_class
from .pl_geometry.domain import SurfaceComplex
from .pl_geometry.intersect import (
    DoubleSegment,
    mesh_double_locus_r3,
    mesh_double_points_r4,
    pushoff_euler_number,
    segment_crossings,
)
from .pl_geometry.parametric import ParametricImmersion, builtin_parametric
from .pl_geometry.shapes import IntersectionRecord, perturb_generic
from .pl_geometry.smooth import chain_from_vertex_pairs, fold_locus, tangent_direction_points

# Global sign applied to ordered double-point records.  The determinant
# convention det[u_1, v_1, u_2, v_2] already satisfies the double-point
# formula on the Whitney sphere, so no correction is needed.
CALIBRATED_SIGN = 1


# ---------------------------------------------------------------- curve assembly


@dataclass(frozen=True)
class DoubleCurve:
    """Closed curve of V_2: a cyclic list of ordered triangle pairs."""

    pairs: tuple
    labels: tuple
    multiplicity: int = 1

    def __len__(self):
        return len(self.pairs)


def assemble_curves(segments: Sequence[DoubleSegment]) -> list[DoubleCurve]:
    """Glue ordered double segments into closed curves of V_2.

    Each endpoint label must be shared by exactly two ordered segments; any
    other count means the double locus has an open end.
    """
    ordered = [o for s in segments for o in s.ordered()]
    if not ordered:
        return []
    at: dict[tuple, list[int]] = {}
    for i, (_, _, labels, _) in enumerate(ordered):
        for lab in labels:
            at.setdefault(lab, []).append(i)
    bad = [lab for lab, v in at.items() if len(v) != 2]
    if bad:
        lab = sorted(bad)[0]
        raise GenericityError(f"double locus has an open end at {lab}", {"label": list(lab)})
    used = np.zeros(len(ordered), dtype=bool)
    curves = []
    for start in range(len(ordered)):
        if used[start]:
            continue
        seq, labs = [], []
        cur = start
        lab = ordered[start][2][0]
        while not used[cur]:
            used[cur] = True
            a, b, labels, _ = ordered[cur]
            seq.append((a, b))
            nxt_lab = labels[1] if labels[0] == lab else labels[0]
            labs.append(nxt_lab)
            i, j = at[nxt_lab]
            cur = j if i == cur else i
            lab = nxt_lab
        curves.append(DoubleCurve(tuple(seq), tuple(labs)))
    return curves


def _slide(domain: SurfaceComplex, label: tuple, tri: int) -> int:
    if label[0] == "E":
        return int(domain.edges[label[1], 0])
    return int(domain.triangles[tri].min())


def double_preimage_chain(domain: SurfaceComplex, segments: Sequence[DoubleSegment]) -> np.ndarray:
    """Z/2 edge chain of f_2(V_2): every ordered segment projected to its first triangle."""
    pairs = []
    for s in segments:
        for first, _, labels, _ in s.ordered():
            pairs.append((_slide(domain, labels[0], first), _slide(domain, labels[1], first)))
    return chain_from_vertex_pairs(domain, pairs)


# ---------------------------------------------------------------- Z/2 homology


@dataclass(frozen=True)
class CycleClass:
    """Z/2 class of a 1-cycle.

    ``coords`` are pairings with the domain's reference cocycles when it has
    them (named in ``basis``), else the tree-cotree coordinates.
    """

    domain_name: str
    coords: tuple
    basis: tuple
    cotree_coords: tuple

    @property
    def is_zero(self) -> bool:
        return not any(self.cotree_coords)

    def to_json(self) -> dict:
        return {"domain": self.domain_name, "coords": list(self.coords), "basis": list(self.basis), "zero": self.is_zero}


class _TreeCotree:
    """Spanning forest T, dual spanning forest C on the other edges, leftovers L."""

    def __init__(self, K: SurfaceComplex):
        nv, ne, nt = K.n_vertices, K.n_edges, K.n_triangles
        E = K.edges
        adj: list[list] = [[] for _ in range(nv)]
        for e, (a, b) in enumerate(E.tolist()):
            adj[a].append((b, e))
            adj[b].append((a, e))
        in_tree = np.zeros(ne, dtype=bool)
        seen = np.zeros(nv, dtype=bool)
        for root in range(nv):
            if seen[root]:
                continue
            seen[root] = True
            queue = [root]
            for v in queue:
                for w, e in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        in_tree[e] = True
                        queue.append(w)
        ET = K.edge_tris
        in_cotree = np.zeros(ne, dtype=bool)
        parent_edge = np.full(nt, -1)
        order = []
        tseen = np.zeros(nt, dtype=bool)
        tadj: list[list] = [[] for _ in range(nt)]
        for e in np.flatnonzero(~in_tree):
            a, b = ET[e]
            tadj[a].append((int(b), int(e)))
            tadj[b].append((int(a), int(e)))
        for root in range(nt):
            if tseen[root]:
                continue
            tseen[root] = True
            queue = [root]
            for f in queue:
                order.append(f)
                for g, e in tadj[f]:
                    if not tseen[g]:
                        tseen[g] = True
                        in_cotree[e] = True
                        parent_edge[g] = e
                        queue.append(g)
        self.leftover = np.flatnonzero(~in_tree & ~in_cotree)
        self.order = [f for f in order if parent_edge[f] >= 0]
        self.parent_edge = parent_edge
        self.tri_edges = K.tri_edges

    def reduce(self, z: np.ndarray) -> np.ndarray:
        z = z.copy()
        for f in self.order:
            if z[self.parent_edge[f]]:
                z[self.tri_edges[f]] ^= 1
        return z[self.leftover]


_TCT_CACHE: "weakref.WeakKeyDictionary[SurfaceComplex, _TreeCotree]" = weakref.WeakKeyDictionary()


def _tree_cotree(K: SurfaceComplex) -> _TreeCotree:
    tc = _TCT_CACHE.get(K)
    if tc is None:
        tc = _TreeCotree(K)
        _TCT_CACHE[K] = tc
    return tc


def betti1_z2(K: SurfaceComplex) -> int:
    return len(_tree_cotree(K).leftover)


def homology_class(chain, domain: SurfaceComplex) -> CycleClass:
    """Z/2 H_1 class of an edge chain given as edge ids (or a 0/1 vector)."""
    z = np.zeros(domain.n_edges, dtype=np.int8)
    chain = np.asarray(chain)
    if chain.dtype == bool or (len(chain) == domain.n_edges and set(np.unique(chain)) <= {0, 1} and chain.dtype != np.int64):
        z[:] = chain.astype(np.int8) % 2
    else:
        np.add.at(z, chain.astype(np.int64), 1)
        z %= 2
    deg = np.zeros(domain.n_vertices, dtype=np.int64)
    sel = domain.edges[z.astype(bool)]
    np.add.at(deg, sel.reshape(-1), 1)
    if np.any(deg % 2):
        v = int(np.flatnonzero(deg % 2)[0])
        raise InputError(f"chain is not a cycle: vertex {v} has odd degree")
    cot = tuple(int(x) for x in _tree_cotree(domain).reduce(z))
    if domain.cocycles:
        names = tuple(sorted(domain.cocycles))
        coords = tuple(int(z[domain.cocycles[n]].sum() % 2) for n in names)
    else:
        names = tuple(f"cotree[{int(e)}]" for e in _tree_cotree(domain).leftover)
        coords = cot
    return CycleClass(domain.name, coords, names, cot)


# ---------------------------------------------------------------- 0-dimensional loci


@dataclass(frozen=True)
class CountResult:
    k: int
    ordered_total: int
    unordered_total: int
    geometric_points: int
    mode: str

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "ordered_total": self.ordered_total,
            "unordered_total": self.unordered_total,
            "geometric_points": self.geometric_points,
            "mode": self.mode,
        }


def orbits(records: Sequence[IntersectionRecord]) -> dict:
    """Group ordered records by their unordered simplex set."""
    out: dict[tuple, list] = {}
    for r in records:
        out.setdefault(tuple(sorted(r.simplices)), []).append(r)
    return out


@dataclass(frozen=True)
class MultiPointSet:
    """Ordered k-fold records grouped into Sigma_k orbits (0-dimensional loci)."""

    k: int
    records: tuple
    orbits: dict

    @classmethod
    def from_records(cls, records: Sequence[IntersectionRecord], k: int) -> "MultiPointSet":
        return cls(k, tuple(records), orbits(records))

    @property
    def geometric_points(self) -> int:
        return len(self.orbits)

    def free_orbits_complete(self) -> bool:
        return all(len(rs) == math.factorial(self.k) for rs in self.orbits.values())


def signed_count(records: Sequence[IntersectionRecord], k: int, codim: int) -> CountResult:
    """Ordered total and unordered total of a 0-dimensional k-fold locus.

    Even codimension: unordered = ordered / (k-1)!.  Odd codimension: the
    unordered total is the number of geometric points mod 2.
    """
    orb = orbits(records)
    fact = math.factorial(k)
    for key, rs in orb.items():
        if len(rs) != fact:
            raise GenericityError(f"orbit {list(key)} has {len(rs)} records, expected {fact}", {"simplices": list(key)})
    ordered = sum(r.sign for r in records)
    points = len(orb)
    if codim % 2 == 0:
        q, rem = divmod(ordered, math.factorial(k - 1))
        if rem:
            raise GenericityError(f"ordered total {ordered} is not divisible by {k - 1}!", {"ordered_total": ordered})
        return CountResult(k, ordered, q, points, "Z")
    return CountResult(k, ordered, points % 2, points, "F2")


def _perm_parity(seq) -> int:
    seq = list(seq)
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def sign_parity_exceptions(records: Sequence[IntersectionRecord], codim: int) -> list:
    """Orbits breaking the permutation law sign(sigma . x) = sgn(sigma)^codim sign(x).

    For double points: equal signs in even codimension, opposite in odd.
    Unsigned records (non-orientable domains) are skipped.
    """
    bad = []
    for key, rs in orbits(records).items():
        if all(r.sign == 0 for r in rs):
            continue
        expect = {r.sign * _perm_parity(r.simplices) ** codim for r in rs}
        if len(expect) != 1 or 0 in expect:
            bad.append({"simplices": list(key), "signs": [r.sign for r in rs]})
    return bad


# ---------------------------------------------------------------- case registry


@dataclass(frozen=True)
class Case:
    name: str
    kind: str  # "curve_r2", "surface_r3", "surface_r4"
    builtin: str
    params: dict = field(default_factory=dict)
    resolutions: tuple = ()
    seeds: tuple = (1, 2)
    directions: tuple = ()
    fixture: Optional[str] = None
    mirrored: bool = False
    reversed: bool = False
    magnitude: str = "1/10000000"

    def parametric(self) -> ParametricImmersion:
        return builtin_parametric(self.builtin, self.params)

    @property
    def codim(self) -> int:
        return {"curve_r2": 1, "surface_r3": 1, "surface_r4": 2}[self.kind]

    @property
    def ambient(self) -> int:
        return {"curve_r2": 2, "surface_r3": 3, "surface_r4": 4}[self.kind]


R3_DIRS = ((0.3, -0.5, 0.81), (0.7, 0.2, -0.4), (-0.2, 0.6, 0.5))
R4_DIRS = ((0.3, -0.5, 0.7, 0.4), (-0.61, 0.23, 0.11, 0.75), (0.2, 0.9, -0.3, -0.25))
R2_DIRS = ((0.6, 0.8), (-0.28, 0.96), (0.96, -0.28))

CASES = {
    c.name: c
    for c in (
        Case("torus-r3", "surface_r3", "torus", {"R": 2, "r": 1}, (24, 32), (1, 2), ((0.0, 0.0, 1.0),) + R3_DIRS, "torus_r3"),
        Case("boy", "surface_r3", "boy", {}, (26, 20), (1, 2), R3_DIRS, "rp2_r3_boy"),
        Case("whitney", "surface_r4", "whitney", {}, (13, 26), (1, 2), R4_DIRS, "whitney_s2_r4"),
        Case("whitney-mirrored", "surface_r4", "whitney", {}, (13,), (1, 2), R4_DIRS, None, mirrored=True),
        Case("whitney-reversed", "surface_r4", "whitney", {}, (13,), (1, 2), R4_DIRS, "whitney_s2_r4", reversed=True),
        Case("sphere-r4", "surface_r4", "sphere_r4", {}, (13,), (1, 2), R4_DIRS, "sphere_in_r4"),
        Case("circle-r2", "curve_r2", "circle", {}, (64, 256), (1, 2), R2_DIRS),
        Case("figure8", "curve_r2", "figure8", {}, (256, 512), (1, 2), R2_DIRS),
        Case("limacon", "curve_r2", "limacon", {}, (256, 512), (1, 2), R2_DIRS),
    )
}


def get_case(name: str) -> Case:
    try:
        return CASES[name]
    except KeyError:
        raise InputError(f"unknown case {name!r}; known: {', '.join(sorted(CASES))}") from None


def _flip_mesh(case: Case, mesh):
    if case.mirrored:
        mesh = mesh.mirrored()
    if case.reversed:
        mesh = mesh.reversed()
    return mesh


def _flip_param(case: Case, p: ParametricImmersion, domain: SurfaceComplex):
    """Apply the case's mirror (ambient) and reversal (domain) to the smooth side.

    Reversal changes the orientation of both the tangent and the normal
    bundle, so tangent-point indices are unchanged; the reversed domain is
    still passed through for completeness.
    """
    if case.mirrored:
        ev = p.evaluate
        jac = p.jacobian

        def mirrored(P, ev=ev):
            Y = ev(P).copy()
            Y[:, 0] *= -1
            return Y

        mjac = None
        if jac is not None:
            def mjac(P, jac=jac):
                J = jac(P).copy()
                J[:, 0, :] *= -1
                return J

        p = ParametricImmersion(p.name + "-mirrored", p.kind, p.ambient, mirrored, p.params, mjac, p.h)
    if case.reversed:
        domain = domain.reversed()
    return p, domain


def _mesh_for(case: Case, res: int, seed: int, certify):
    p = case.parametric()
    if case.kind == "curve_r2":
        return perturb_generic(p.polygon(res), seed, case.magnitude, certify)
    mesh = _flip_mesh(case, p.mesh(res))
    return perturb_generic(mesh, seed, case.magnitude, certify)


def _tangent_total(case: Case, p, domain, u) -> tuple[int, int]:
    pts = tangent_direction_points(p, u, domain)
    return sum(q.sign for q in pts), len(pts)


# ---------------------------------------------------------------- verdicts


def verify_lemma_double(case: Case) -> dict:
    """Double-point side against (-1)^(m-1) times the tangent-direction side.

    Surfaces in R^3 are compared as Z/2 H_1 classes, curves in R^2 as counts
    mod 2 (with the integer ordered total asserted to vanish), surfaces in
    R^4 as integers.
    """
    m = case.ambient
    sgn = (-1) ** (m - 1)
    rows = []
    p0 = case.parametric()
    if case.kind == "surface_r3":
        for res in case.resolutions:
            for seed in case.seeds:
                mesh, segs, att = _mesh_for(case, res, seed, mesh_double_locus_r3)
                curves = assemble_curves(segs)
                lhs = homology_class(double_preimage_chain(mesh.domain, segs), mesh.domain)
                for u in case.directions:
                    fl = fold_locus(p0, u, mesh.domain)
                    rhs = homology_class(fl.chain, mesh.domain)
                    rows.append({
                        "resolution": res, "seed": seed, "attempt": att, "direction": list(u),
                        "triangles": mesh.domain.n_triangles, "double_segments": len(segs),
                        "double_curves": len(curves), "fold_curves": len(fl.curves),
                        "lhs": lhs.to_json(), "rhs": rhs.to_json(), "agree": lhs.coords == rhs.coords,
                    })
        mode = "F2"
        lhs_val = rows[0]["lhs"]["coords"] if rows else None
        rhs_val = rows[0]["rhs"]["coords"] if rows else None
    elif case.kind == "surface_r4":
        for res in case.resolutions:
            for seed in case.seeds:
                mesh, recs, att = _mesh_for(case, res, seed, mesh_double_points_r4)
                cnt = signed_count(recs, 2, case.codim)
                lhs = CALIBRATED_SIGN * cnt.ordered_total
                p, dom = _flip_param(case, p0, p0.domain(res))
                for u in case.directions:
                    tot, npts = _tangent_total(case, p, dom, u)
                    rhs = sgn * tot
                    rows.append({
                        "resolution": res, "seed": seed, "attempt": att, "direction": list(u),
                        "ordered_total": lhs, "tangent_total": tot, "tangent_points": npts,
                        "lhs": lhs, "rhs": rhs, "agree": lhs == rhs,
                    })
        mode = "Z"
        lhs_val = rows[0]["lhs"] if rows else None
        rhs_val = rows[0]["rhs"] if rows else None
    elif case.kind == "curve_r2":
        for res in case.resolutions:
            for seed in case.seeds:
                curve, recs, att = _mesh_for(case, res, seed, segment_crossings)
                cnt = signed_count(recs, 2, case.codim)
                for u in case.directions:
                    pts = tangent_direction_points(p0, u)
                    lhs = len(recs) % 2
                    rhs = len(pts) % 2
                    rows.append({
                        "resolution": res, "seed": seed, "attempt": att, "direction": list(u),
                        "ordered_records": len(recs), "ordered_total": cnt.ordered_total,
                        "tangent_points": len(pts), "tangent_total": sum(q.sign for q in pts),
                        "lhs": lhs, "rhs": rhs, "agree": lhs == rhs and cnt.ordered_total == 0,
                    })
        mode = "F2"
        lhs_val = rows[0]["lhs"] if rows else None
        rhs_val = rows[0]["rhs"] if rows else None
    else:
        raise InputError(f"case {case.name} has unknown kind {case.kind}")
    verdict = "PASS" if rows and all(r["agree"] for r in rows) else "FAIL"
    return {
        "check": "lemma-double",
        "case": case.name,
        "mode": mode,
        "sign_factor": sgn,
        "calibrated_sign": CALIBRATED_SIGN,
        "lhs": lhs_val,
        "rhs": rhs_val,
        "verdict": verdict,
        "seeds": list(case.seeds),
        "resolutions": list(case.resolutions),
        "directions": [list(u) for u in case.directions],
        "runs": rows,
    }


def verify_euler_corollary(case: Case) -> dict:
    """Normal Euler number three ways for a surface in R^4.

    ``pushoff`` (local pushoff count), ``(-1)^m D`` with D the tangent-direction
    total, and ``-ordered`` with ordered the signed double count; when the case
    names a fixture, also the fixture's Euler class against
    ``euler_from_double_class``.  Since f_!(1) = 0 in R^4 all must agree.
    """
    if case.kind != "surface_r4":
        raise InputError("the Euler corollary check needs a surface in R^4")
    m = case.ambient
    rows = []
    p0 = case.parametric()
    for res in case.resolutions:
        for seed in case.seeds:
            mesh, recs, att = _mesh_for(case, res, seed, mesh_double_points_r4)
            cnt = signed_count(recs, 2, case.codim)
            ordered = CALIBRATED_SIGN * cnt.ordered_total
            po = pushoff_euler_number(mesh, seed)
            p, dom = _flip_param(case, p0, p0.domain(res))
            for u in case.directions:
                D, _ = _tangent_total(case, p, dom, u)
                predicted = (-1) ** m * D
                rows.append({
                    "resolution": res, "seed": seed, "attempt": att, "direction": list(u),
                    "pushoff": po.euler, "pushoff_global": po.total, "ordered_total": ordered,
                    "tangent_total": D, "predicted": predicted,
                    "agree": po.euler == predicted == -ordered and po.total == 0,
                })
    algebra = None
    if case.fixture is not None and rows:
        F = builtin_fixture().immersion(case.fixture)
        D = rows[0]["tangent_total"]
        pred = euler_from_double_class(F, F.source.homology(0, [D]))
        fixture_e = F.euler
        algebra = {
            "fixture": case.fixture,
            "predicted_euler": pred.to_json(),
            "fixture_euler": fixture_e.to_json(),
            "agree": pred.coords[0] == fixture_e.coords[0],
        }
    ok = bool(rows) and all(r["agree"] for r in rows) and (algebra is None or algebra["agree"])
    value = rows[0]["pushoff"] if rows else None
    return {
        "check": "euler-corollary",
        "case": case.name,
        "mode": "Z",
        "value": value,
        "calibrated_sign": CALIBRATED_SIGN,
        "verdict": "PASS" if ok else "FAIL",
        "seeds": list(case.seeds),
        "resolutions": list(case.resolutions),
        "directions": [list(u) for u in case.directions],
        "runs": rows,
        "algebra": algebra,
    }
