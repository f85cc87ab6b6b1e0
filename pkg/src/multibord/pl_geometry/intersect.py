"""Self-intersection enumeration for PL curves and surfaces.

Candidate simplex pairs come from a k-d tree on bounding spheres; every
topological decision is an exact orientation sign.  Simplices that share a
domain vertex are never tested against each other: they model the collar of
the diagonal, which is removed from V x V.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from ..errors import GenericityError, InputError
from .parallel import chunked, pmap
from .predicates import det_exact, det_sign, orient
from .shapes import IntersectionRecord, ImmersedPolyCurve, ImmersedTriMesh, derived_seed

# ---------------------------------------------------------------- broad phase


def _spheres(C: np.ndarray):
    c = C.mean(axis=1)
    r = np.sqrt(((C - c[:, None, :]) ** 2).sum(axis=2)).max(axis=1)
    return c, r


def candidate_pairs(CA: np.ndarray, CB: Optional[np.ndarray] = None) -> np.ndarray:
    """Index pairs of simplices whose bounding spheres meet, lexicographically sorted.

    ``CA``/``CB`` are (K, j, m) corner arrays.  Without ``CB`` pairs are i < j
    within ``CA``.
    """
    ca, ra = _spheres(CA)
    slack = 1.0 + 1e-9
    if CB is None:
        if len(ca) < 2:
            return np.zeros((0, 2), dtype=np.int64)
        tree = cKDTree(ca)
        P = tree.query_pairs(2 * ra.max() * slack, output_type="ndarray")
        if len(P) == 0:
            return np.zeros((0, 2), dtype=np.int64)
        d = np.linalg.norm(ca[P[:, 0]] - ca[P[:, 1]], axis=1)
        P = P[d <= (ra[P[:, 0]] + ra[P[:, 1]]) * slack]
    else:
        cb, rb = _spheres(CB)
        ta, tb = cKDTree(ca), cKDTree(cb)
        hits = ta.query_ball_tree(tb, (ra.max() + rb.max()) * slack)
        ii = np.repeat(np.arange(len(hits)), [len(h) for h in hits])
        jj = np.fromiter((j for h in hits for j in h), dtype=np.int64, count=len(ii))
        P = np.stack([ii, jj], axis=1).astype(np.int64) if len(ii) else np.zeros((0, 2), dtype=np.int64)
        if len(P):
            d = np.linalg.norm(ca[P[:, 0]] - cb[P[:, 1]], axis=1)
            P = P[d <= (ra[P[:, 0]] + rb[P[:, 1]]) * slack]
    P = np.asarray(P, dtype=np.int64)
    order = np.lexsort((P[:, 1], P[:, 0]))
    return P[order]


def share_vertex(SA: np.ndarray, SB: np.ndarray) -> np.ndarray:
    """Row-wise: do simplices ``SA[i]`` and ``SB[i]`` share a vertex?"""
    return np.any(SA[:, :, None] == SB[:, None, :], axis=(1, 2))


# ---------------------------------------------------------------- curves in R^2


def segment_crossings(c: ImmersedPolyCurve) -> list[IntersectionRecord]:
    """Ordered crossing records of non-adjacent segments, two per crossing."""
    if c.ambient != 2:
        raise InputError("segment_crossings needs a planar curve")
    n = c.n
    G = c.grid
    S = c.segments()
    i, j = np.triu_indices(n, 1)
    keep = ((j - i) > 1) & ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    a, b = G[S[i, 0]], G[S[i, 1]]
    p, q = G[S[j, 0]], G[S[j, 1]]
    o1 = orient(np.stack([a, b, p], 1))
    o2 = orient(np.stack([a, b, q], 1))
    o3 = orient(np.stack([p, q, a], 1))
    o4 = orient(np.stack([p, q, b], 1))
    cross = (o1 * o2 < 0) & (o3 * o4 < 0)
    apart = (o1 * o2 > 0) | (o3 * o4 > 0)
    bad = ~cross & ~apart
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise GenericityError(
            f"segments {int(i[k])} and {int(j[k])} touch non-transversally",
            {"simplices": [int(i[k]), int(j[k])]},
        )
    idx = np.flatnonzero(cross)
    X = c.coords
    recs = []
    for k in idx:
        si, sj = int(i[k]), int(j[k])
        A, B, P, Q = X[S[si, 0]], X[S[si, 1]], X[S[sj, 0]], X[S[sj, 1]]
        d1, d2 = B - A, Q - P
        den = d1[0] * d2[1] - d1[1] * d2[0]
        w = P - A
        s = (w[0] * d2[1] - w[1] * d2[0]) / den
        t = (w[0] * d1[1] - w[1] * d1[0]) / den
        pt = tuple(A + s * d1)
        e1 = G[S[si, 1]] - G[S[si, 0]]
        e2 = G[S[sj, 1]] - G[S[sj, 0]]
        sg12 = int(det_sign(np.array([e1, e2])))
        sg21 = int(det_sign(np.array([e2, e1])))
        recs.append(IntersectionRecord(2, (si, sj), ((s,), (t,)), pt, sg12))
        recs.append(IntersectionRecord(2, (sj, si), ((t,), (s,)), pt, sg21))
    recs.sort(key=lambda r: r.simplices)
    return recs


# ---------------------------------------------------------------- surfaces in R^3


def _edge_triangle(P0: np.ndarray, P1: np.ndarray, Q: np.ndarray):
    """Exact status of segment P0P1 against triangle Q: 1 cross, 0 miss, -1 degenerate.

    Also returns the float crossing parameter along the segment.
    """
    s1 = orient(np.stack([Q[:, 0], Q[:, 1], Q[:, 2], P0], 1))
    s2 = orient(np.stack([Q[:, 0], Q[:, 1], Q[:, 2], P1], 1))
    t1 = orient(np.stack([P0, P1, Q[:, 0], Q[:, 1]], 1))
    t2 = orient(np.stack([P0, P1, Q[:, 1], Q[:, 2]], 1))
    t3 = orient(np.stack([P0, P1, Q[:, 2], Q[:, 0]], 1))
    T = np.stack([t1, t2, t3], 1)
    mixed = np.any(T > 0, axis=1) & np.any(T < 0, axis=1)
    same = (t1 == t2) & (t2 == t3) & (t1 != 0)
    straddle = s1 * s2 < 0
    apart = s1 * s2 > 0
    status = np.where(straddle & same, 1, np.where(apart | mixed, 0, -1))
    n = np.cross(Q[:, 1] - Q[:, 0], Q[:, 2] - Q[:, 0])
    v0 = np.einsum("ij,ij->i", n, P0 - Q[:, 0])
    v1 = np.einsum("ij,ij->i", n, P1 - Q[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(status == 1, v0 / (v0 - v1), np.nan)
    return status, lam


def _bary(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Least-squares barycentric coordinates of points X on triangles C (float)."""
    E = np.stack([C[:, 1] - C[:, 0], C[:, 2] - C[:, 0]], axis=-1)
    rhs = X - C[:, 0]
    sol = np.linalg.lstsq(E[0], rhs[0], rcond=None)[0] if len(X) == 1 else None
    if sol is not None:
        c = sol[None, :]
    else:
        G = np.einsum("kmi,kmj->kij", E, E)
        r = np.einsum("kmi,km->ki", E, rhs)
        c = np.linalg.solve(G, r[..., None])[..., 0]
    return np.stack([1 - c[:, 0] - c[:, 1], c[:, 0], c[:, 1]], axis=1)


@dataclass(frozen=True)
class DoubleSegment:
    """Intersection segment of triangles ``a < b`` of a surface in R^3.

    Each endpoint has a label naming its position in V x V: ``("E", e, t)``
    is (point on edge e, point inside triangle t) and ``("F", t, e)`` the
    reverse.  Labels are given in (a, b) order.
    """

    a: int
    b: int
    labels: tuple
    bary_a: tuple
    bary_b: tuple
    points: tuple

    def ordered(self):
        """Both ordered versions: (first, second, labels, bary_first)."""
        swap = tuple(("F", lab[2], lab[1]) if lab[0] == "E" else ("E", lab[2], lab[1]) for lab in self.labels)
        return ((self.a, self.b, self.labels, self.bary_a), (self.b, self.a, swap, self.bary_b))

    def to_json(self) -> dict:
        return {
            "triangles": [self.a, self.b],
            "labels": [list(l) for l in self.labels],
            "points": [[round(float(x), 12) for x in p] for p in self.points],
        }


def _double_r3_chunk(G: np.ndarray, tris: np.ndarray, tri_edges: np.ndarray, pairs: np.ndarray):
    A, B = pairs[:, 0], pairs[:, 1]
    CA, CB = G[tris[A]], G[tris[B]]
    found = []
    stats, lams = [], []
    for side, (C1, C2) in enumerate(((CA, CB), (CB, CA))):
        for i in range(3):
            st, lam = _edge_triangle(C1[:, i], C1[:, (i + 1) % 3], C2)
            stats.append(st)
            lams.append(lam)
    S = np.stack(stats, 1)
    L = np.stack(lams, 1)
    bad = np.any(S < 0, axis=1)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        return ("error", [int(A[k]), int(B[k])], "edge-triangle contact")
    count = (S == 1).sum(axis=1)
    odd = (count != 0) & (count != 2)
    if np.any(odd):
        k = int(np.flatnonzero(odd)[0])
        return ("error", [int(A[k]), int(B[k])], f"{int(count[k])} edge crossings")
    for k in np.flatnonzero(count == 2):
        found.append((int(A[k]), int(B[k]), S[k].tolist(), L[k].tolist()))
    return ("ok", found)


def mesh_double_locus_r3(m: ImmersedTriMesh) -> list[DoubleSegment]:
    """Chain-level double locus: one segment per intersecting non-adjacent pair."""
    if m.ambient != 3:
        raise InputError("mesh_double_locus_r3 needs a mesh in R^3")
    G = m.grid
    tris = m.triangles
    C = G[tris]
    P = candidate_pairs(C)
    P = P[~share_vertex(tris[P[:, 0]], tris[P[:, 1]])]
    parts = pmap(_double_r3_chunk, [(G, tris, m.domain.tri_edges, P[s:e]) for s, e in chunked(len(P))])
    found = []
    for res in parts:
        if res[0] == "error":
            raise GenericityError(f"triangles {res[1]} are not in general position ({res[2]})", {"simplices": res[1]})
        found.extend(res[1])
    X = m.coords
    TE = m.domain.tri_edges
    out = []
    for a, b, st, lam in found:
        labels, pa, pb, pts = [], [], [], []
        for slot in range(6):
            if st[slot] != 1:
                continue
            on_a = slot < 3
            i = slot % 3
            t_edge, t_face = (a, b) if on_a else (b, a)
            v0, v1 = tris[t_edge, i], tris[t_edge, (i + 1) % 3]
            x = X[v0] + lam[slot] * (X[v1] - X[v0])
            be = np.zeros(3)
            be[i], be[(i + 1) % 3] = 1 - lam[slot], lam[slot]
            bf = _bary(x[None, :], X[tris[t_face]][None])[0]
            e = int(TE[t_edge, i])
            if on_a:
                labels.append(("E", e, b))
                pa.append(tuple(be))
                pb.append(tuple(bf))
            else:
                labels.append(("F", a, e))
                pa.append(tuple(bf))
                pb.append(tuple(be))
            pts.append(tuple(x))
        out.append(DoubleSegment(a, b, tuple(labels), tuple(pa), tuple(pb), tuple(pts)))
    return out


def _plane(G, t):
    a0, a1, a2 = ([int(x) for x in G[v]] for v in t)
    u = [a1[i] - a0[i] for i in range(3)]
    v = [a2[i] - a0[i] for i in range(3)]
    n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
    return (a0, a1, a2), n, sum(n[i] * a0[i] for i in range(3))


def _inside_exact(corners, n, num, den):
    """Signs of X = num/den against the three edges of a triangle in its plane."""
    out = []
    sden = 1 if den > 0 else -1
    for i in range(3):
        p, q = corners[i], corners[(i + 1) % 3]
        e = [q[k] - p[k] for k in range(3)]
        w = [num[k] - den * p[k] for k in range(3)]
        cr = [e[1] * w[2] - e[2] * w[1], e[2] * w[0] - e[0] * w[2], e[0] * w[1] - e[1] * w[0]]
        v = sum(cr[k] * n[k] for k in range(3)) * sden
        out.append((v > 0) - (v < 0))
    return out


def mesh_triple_points_r3(m: ImmersedTriMesh, doubles: Optional[list] = None) -> list[IntersectionRecord]:
    """Triple points with all 6 ordered records each.

    Records are signed by ``det[n_1, n_2, n_3]`` of the oriented triangle
    normals when the domain is orientable, unsigned otherwise.
    """
    if doubles is None:
        doubles = mesh_double_locus_r3(m)
    nbr: dict[int, set] = {}
    for d in doubles:
        nbr.setdefault(d.a, set()).add(d.b)
        nbr.setdefault(d.b, set()).add(d.a)
    G = m.grid
    tris = m.triangles
    X = m.coords
    recs = []
    for a in sorted(nbr):
        for b in sorted(x for x in nbr[a] if x > a):
            for c in sorted(x for x in nbr[a] & nbr[b] if x > b):
                planes = [_plane(G, tris[t]) for t in (a, b, c)]
                N = [p[1] for p in planes]
                h = [p[2] for p in planes]
                den = det_exact(N)
                if den == 0:
                    raise GenericityError(f"triangles {[a, b, c]} have dependent planes", {"simplices": [a, b, c]})
                num = []
                for k in range(3):
                    Mk = [[h[r] if col == k else N[r][col] for col in range(3)] for r in range(3)]
                    num.append(det_exact(Mk))
                signs = [_inside_exact(p[0], p[1], num, den) for p in planes]
                flat = [s for row in signs for s in row]
                if any(any(s < 0 for s in row) for row in signs):
                    continue
                if 0 in flat:
                    raise GenericityError(f"triple point on a triangle boundary: {[a, b, c]}", {"simplices": [a, b, c]})
                pt = np.array([float(Fraction(v, den)) for v in num])
                bary = {t: tuple(_bary(pt[None], X[tris[t]][None])[0]) for t in (a, b, c)}
                for perm in permutations((0, 1, 2)):
                    ts = tuple((a, b, c)[i] for i in perm)
                    sg = 0
                    if m.domain.orientable:
                        d = det_exact([N[i] for i in perm])
                        sg = (d > 0) - (d < 0)
                    recs.append(IntersectionRecord(3, ts, tuple(bary[t] for t in ts), tuple(pt), sg))
    recs.sort(key=lambda r: r.simplices)
    return recs


# ---------------------------------------------------------------- surfaces in R^4


def _tri_tri_r4(CA: np.ndarray, CB: np.ndarray):
    """Exact status of triangle pairs in R^4: 1 meet in one interior point, 0 miss, -1 degenerate.

    Uses the kernel of the 5 x 6 matrix of homogeneous corners; its entries
    are signed orientations of 5-point subsets.
    """
    cols = [CA[:, 0], CA[:, 1], CA[:, 2], CB[:, 0], CB[:, 1], CB[:, 2]]
    k = []
    for i in range(6):
        rest = [cols[j] for j in range(6) if j != i]
        s = orient(np.stack(rest, 1))
        k.append(s if i % 2 == 0 else -s)
    K = np.stack(k, 1).astype(np.int8)
    ka, kb = K[:, :3], K[:, 3:]
    pos_a, neg_a = np.all(ka > 0, 1), np.all(ka < 0, 1)
    pos_b, neg_b = np.all(kb > 0, 1), np.all(kb < 0, 1)
    hit = (pos_a & neg_b) | (neg_a & pos_b)
    # a certain miss: some alpha (or beta) weights have strictly opposite signs,
    # or the alpha and beta blocks agree strictly on sign
    mixed_a = np.any(ka > 0, 1) & np.any(ka < 0, 1)
    mixed_b = np.any(kb > 0, 1) & np.any(kb < 0, 1)
    wrong = (pos_a & pos_b) | (neg_a & neg_b)
    miss = mixed_a | mixed_b | wrong
    status = np.where(hit, 1, np.where(miss, 0, -1))
    # all-zero kernel (dependent configuration) is degenerate unless clearly apart
    allzero = np.all(K == 0, 1)
    status = np.where(allzero, -1, status)
    return status


def _tangent_det_sign(CA: np.ndarray, CB: np.ndarray) -> np.ndarray:
    M = np.stack([CA[:, 1] - CA[:, 0], CA[:, 2] - CA[:, 0], CB[:, 1] - CB[:, 0], CB[:, 2] - CB[:, 0]], 1)
    return det_sign(M)


def _r4_chunk(GA: np.ndarray, TA: np.ndarray, GB: np.ndarray, TB: np.ndarray, pairs: np.ndarray):
    A, B = pairs[:, 0], pairs[:, 1]
    CA, CB = GA[TA[A]], GB[TB[B]]
    st = _tri_tri_r4(CA, CB)
    bad = st < 0
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        return ("error", [int(A[k]), int(B[k])])
    hit = np.flatnonzero(st == 1)
    sab = _tangent_det_sign(CA[hit], CB[hit])
    sba = _tangent_det_sign(CB[hit], CA[hit])
    if np.any(sab == 0):
        k = int(hit[np.flatnonzero(sab == 0)[0]])
        return ("error", [int(A[k]), int(B[k])])
    return ("ok", [(int(A[h]), int(B[h]), int(x), int(y)) for h, x, y in zip(hit, sab, sba)])


def _r4_point(XA: np.ndarray, XB: np.ndarray):
    """Float intersection point and barycentrics of two triangles in R^4."""
    M = np.stack([XA[1] - XA[0], XA[2] - XA[0], -(XB[1] - XB[0]), -(XB[2] - XB[0])], 1)
    s, t, u, v = np.linalg.solve(M, XB[0] - XA[0])
    p = XA[0] + s * (XA[1] - XA[0]) + t * (XA[2] - XA[0])
    return p, (1 - s - t, s, t), (1 - u - v, u, v)


def _r4_intersections(GA, TA, GB, TB, pairs):
    parts = pmap(_r4_chunk, [(GA, TA, GB, TB, pairs[s:e]) for s, e in chunked(len(pairs))])
    hits = []
    for res in parts:
        if res[0] == "error":
            raise GenericityError(f"triangles {res[1]} are not in general position in R^4", {"simplices": res[1]})
        hits.extend(res[1])
    return hits


def mesh_double_points_r4(m: ImmersedTriMesh) -> list[IntersectionRecord]:
    """Signed ordered double-point records of a surface mesh in R^4.

    The record (x_1, x_2) has sign ``det[u_1, v_1, u_2, v_2]`` of the oriented
    edge frames of the two triangles.
    """
    if m.ambient != 4:
        raise InputError("mesh_double_points_r4 needs a mesh in R^4")
    if not m.domain.orientable:
        raise InputError("signed double points need an oriented domain")
    G = m.grid
    tris = m.triangles
    C = G[tris]
    P = candidate_pairs(C)
    P = P[~share_vertex(tris[P[:, 0]], tris[P[:, 1]])]
    X = m.coords
    recs = []
    for a, b, sab, sba in _r4_intersections(G, tris, G, tris, P):
        p, ba, bb = _r4_point(X[tris[a]], X[tris[b]])
        recs.append(IntersectionRecord(2, (a, b), (ba, bb), tuple(p), sab))
        recs.append(IntersectionRecord(2, (b, a), (bb, ba), tuple(p), sba))
    recs.sort(key=lambda r: r.simplices)
    return recs


# ---------------------------------------------------------------- pushoff


@dataclass(frozen=True)
class PushoffResult:
    euler: int
    local_count: int
    far_count: int
    total: int
    seed: int
    attempt: int
    displacement: float
    direction: tuple

    def to_json(self) -> dict:
        return {
            "euler_number": self.euler,
            "local_count": self.local_count,
            "far_count": self.far_count,
            "global_count": self.total,
            "seed": self.seed,
            "attempt": self.attempt,
            "displacement": self.displacement,
            "direction": [round(x, 12) for x in self.direction],
        }


def _normal_projectors(m: ImmersedTriMesh) -> np.ndarray:
    """Per-vertex projector onto the normal plane, from the star edge vectors."""
    X = m.coords
    tris = m.triangles
    nv = len(X)
    star: list[list] = [[] for _ in range(nv)]
    for a, b, c in tris.tolist():
        star[a] += [b, c]
        star[b] += [c, a]
        star[c] += [a, b]
    proj = np.empty((nv, 4, 4))
    for v in range(nv):
        E = X[sorted(set(star[v]))] - X[v]
        _, _, Vt = np.linalg.svd(E, full_matrices=True)
        T = Vt[:2]
        proj[v] = np.eye(4) - T.T @ T
    return proj


def pushoff_euler_number(
    m: ImmersedTriMesh, seed: int, fraction: float = 0.02, retries: int = 8
) -> PushoffResult:
    """Normal Euler number of a surface mesh in R^4 as a pushoff intersection count.

    Each vertex moves by ``delta * P_v w`` where ``P_v`` projects onto the
    normal plane and ``w`` is a seeded unit vector; ``delta`` is ``fraction``
    of the shortest mapped edge.  Intersections of f with its pushoff f' are
    split into local pairs (the same triangle or triangles sharing a vertex)
    and far pairs.  The local count is the Euler number; the global count is
    the intersection number of two homologous cycles in R^4 and must vanish.
    """
    if m.ambient != 4 or not m.domain.orientable:
        raise InputError("pushoff_euler_number needs an oriented surface mesh in R^4")
    tris = m.triangles
    X = m.coords
    E = np.concatenate([X[tris[:, 1]] - X[tris[:, 0]], X[tris[:, 2]] - X[tris[:, 1]], X[tris[:, 0]] - X[tris[:, 2]]])
    delta = fraction * float(np.linalg.norm(E, axis=1).min())
    proj = _normal_projectors(m)
    G = m.grid
    last = None
    for attempt in range(retries):
        rng = np.random.default_rng(derived_seed(seed, 0x5055, attempt))
        w = rng.normal(size=4)
        w /= np.linalg.norm(w)
        Xp = X + delta * np.einsum("vij,j->vi", proj, w)
        Gp = np.rint(Xp * float(m.denom))
        if np.abs(Gp).max() >= 2.0**45:
            raise InputError("pushoff leaves the exact coordinate range")
        P = candidate_pairs(G[tris], Gp[tris])
        try:
            hits = _r4_intersections(G, tris, Gp, tris, P)
        except GenericityError as exc:
            last = exc
            continue
        local = far = 0
        for a, b, sab, _ in hits:
            if a == b or np.intersect1d(tris[a], tris[b]).size:
                local += sab
            else:
                far += sab
        return PushoffResult(local, local, far, local + far, int(seed), attempt, delta, tuple(float(x) for x in w))
    raise GenericityError(f"pushoff not transverse after {retries} directions", getattr(last, "detail", {}))
