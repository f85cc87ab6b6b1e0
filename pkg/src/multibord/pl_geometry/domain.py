"""Closed triangulated surfaces used as immersion domains.

A :class:`SurfaceComplex` carries the abstract incidence data plus, for
parametric use, the parameter point of every triangle corner.  Corner
parameters matter for quotients and periodic charts: a triangle of the
projective plane remembers which antipodal lift it was cut from, and a torus
triangle straddling the seam keeps unwrapped coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InputError


@dataclass(frozen=True, eq=False)
class SurfaceComplex:
    """Triangulated closed surface.

    ``triangles`` are consistently oriented when ``orientable``.  ``kind`` is
    the parameter domain of ``corner_params`` (``"sphere"``, ``"torus"``,
    ``"rp2"`` or ``"abstract"``).  ``cocycles`` maps names to edge index
    arrays of reference Z/2 cocycles used for canonical H_1 coordinates.
    """

    n_vertices: int
    triangles: np.ndarray
    orientable: bool
    kind: str = "abstract"
    vertex_params: Optional[np.ndarray] = None
    corner_params: Optional[np.ndarray] = None
    cocycles: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        tris = np.ascontiguousarray(self.triangles, dtype=np.int64)
        object.__setattr__(self, "triangles", tris)
        tris.setflags(write=False)
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise InputError("triangles must be an (T, 3) index array")
        if tris.size and (tris.min() < 0 or tris.max() >= self.n_vertices):
            raise InputError("triangle index out of range")
        if np.any(tris[:, 0] == tris[:, 1]) or np.any(tris[:, 1] == tris[:, 2]) or np.any(tris[:, 0] == tris[:, 2]):
            raise InputError("triangle with repeated vertex")
        half = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        keys = np.sort(half, axis=1)
        edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        if np.any(counts != 2):
            bad = edges[counts != 2][0]
            raise InputError(f"edge {tuple(int(x) for x in bad)} lies in {int(counts[counts != 2][0])} triangles")
        T = len(tris)
        tri_edges = inverse.reshape(3, T).T.copy()
        order = np.argsort(inverse, kind="stable")
        edge_tris = (order % T).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "tri_edges", tri_edges)
        object.__setattr__(self, "edge_tris", edge_tris)
        if self.orientable:
            # each undirected edge must be traversed once in each direction
            fwd = half[:, 0] < half[:, 1]
            per_edge = np.bincount(inverse, weights=fwd, minlength=len(edges))
            if np.any(per_edge != 1):
                raise InputError("triangles are not consistently oriented")
        self._check_links()

    def _check_links(self):
        # the link of every vertex must be a single cycle
        T = self.triangles
        nbr: dict[int, list] = {}
        for a, b, c in T.tolist():
            nbr.setdefault(a, []).append((b, c))
            nbr.setdefault(b, []).append((c, a))
            nbr.setdefault(c, []).append((a, b))
        if len(nbr) != self.n_vertices:
            raise InputError("complex has isolated vertices")
        for v, pairs in nbr.items():
            adj: dict[int, list] = {}
            for x, y in pairs:
                adj.setdefault(x, []).append(y)
                adj.setdefault(y, []).append(x)
            if any(len(s) != 2 for s in adj.values()):
                raise InputError(f"link of vertex {v} is not a cycle")
            start = pairs[0][0]
            prev, cur, n = None, start, 0
            while True:
                a, b = adj[cur]
                nxt = b if a == prev else a
                prev, cur = cur, nxt
                n += 1
                if cur == start:
                    break
            if n != len(adj):
                raise InputError(f"link of vertex {v} is disconnected")

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def edge_index(self, a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        lo = np.searchsorted(self.edges[:, 0], key[0], side="left")
        hi = np.searchsorted(self.edges[:, 0], key[0], side="right")
        sub = self.edges[lo:hi, 1]
        j = np.searchsorted(sub, key[1])
        if j >= len(sub) or sub[j] != key[1]:
            raise KeyError(key)
        return int(lo + j)

    def components(self) -> np.ndarray:
        """Component label per triangle."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        E = self.edge_tris
        T = self.n_triangles
        g = coo_matrix((np.ones(len(E)), (E[:, 0], E[:, 1])), shape=(T, T))
        return connected_components(g, directed=False)[1]

    def reversed(self) -> "SurfaceComplex":
        if not self.orientable:
            raise InputError("cannot reverse a non-orientable complex")
        cp = None if self.corner_params is None else self.corner_params[:, [0, 2, 1]]
        return SurfaceComplex(
            self.n_vertices, self.triangles[:, [0, 2, 1]], True, self.kind, self.vertex_params, cp,
            dict(self.cocycles), self.name + "-reversed",
        )


def _cube_face_grid(N: int):
    """Integer cube-surface points and outward triangles on the +x, +y, +z faces.

    Points are (i, j, k) in {0..N}^3 measured from the cube center times 2,
    i.e. coordinates in {-N, -N+2, ..., N}.
    """
    tris = []
    for axis in range(3):
        u_ax, v_ax = (axis + 1) % 3, (axis + 2) % 3
        for a in range(N):
            for b in range(N):
                def pt(i, j):
                    p = [0, 0, 0]
                    p[axis] = N
                    p[u_ax] = -N + 2 * i
                    p[v_ax] = -N + 2 * j
                    return tuple(p)

                p00, p10, p11, p01 = pt(a, b), pt(a + 1, b), pt(a + 1, b + 1), pt(a, b + 1)
                # (u, v, axis) is right-handed so (u, v) order is outward
                if (a + b) % 2 == 0:
                    tris += [(p00, p10, p11), (p00, p11, p01)]
                else:
                    tris += [(p00, p10, p01), (p10, p11, p01)]
    return tris


def cube_sphere(N: int) -> SurfaceComplex:
    """Cube-sphere triangulation of S^2 with 12 N^2 triangles, outward oriented.

    The triangulation is invariant under the antipodal map, which makes the
    projective plane quotient a simplicial complex.
    """
    if N < 2:
        raise InputError("cube_sphere needs N >= 2")
    plus = _cube_face_grid(N)
    minus = [tuple(tuple(-c for c in p) for p in (t[0], t[2], t[1])) for t in plus]
    index: dict[tuple, int] = {}
    pts = []
    tris = []
    for t in plus + minus:
        row = []
        for p in t:
            if p not in index:
                index[p] = len(pts)
                pts.append(p)
            row.append(index[p])
        tris.append(row)
    P = np.array(pts, dtype=float)
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    T = np.array(tris)
    return SurfaceComplex(len(P), T, True, "sphere", P, P[T], {}, f"cube-sphere(N={N})")


def _positive(p) -> bool:
    for c in p:
        if c != 0:
            return c > 0
    raise InputError("origin is not a sphere point")


def projective_plane(N: int) -> SurfaceComplex:
    """Antipodal quotient of ``cube_sphere(N)``: 6 N^2 triangles.

    Corner parameters hold the lift of each triangle on the +x/+y/+z faces.
    The reference cocycle ``"w1"`` marks edges whose lift joins a vertex
    representative to the antipode of another, i.e. the orientation cover.
    """
    if N < 2:
        raise InputError("projective_plane needs N >= 2")
    plus = _cube_face_grid(N)
    index: dict[tuple, int] = {}
    reps = []
    tris, corner, flip = [], [], []
    for t in plus:
        row, sgn = [], []
        for p in t:
            q = p if _positive(p) else tuple(-c for c in p)
            if q not in index:
                index[q] = len(reps)
                reps.append(q)
            row.append(index[q])
            sgn.append(1 if q == p else -1)
        tris.append(row)
        corner.append(t)
        flip.append(sgn)
    R = np.array(reps, dtype=float)
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    C = np.array(corner, dtype=float)
    C /= np.linalg.norm(C, axis=2, keepdims=True)
    K = SurfaceComplex(len(R), np.array(tris), False, "rp2", R, C, {}, f"RP2(N={N})")
    S = np.array(flip)
    marks = np.zeros(K.n_edges, dtype=bool)
    for i in range(3):
        j = (i + 1) % 3
        marks[K.tri_edges[:, i]] = S[:, i] * S[:, j] < 0
    object.__setattr__(K, "cocycles", {"w1": np.flatnonzero(marks)})
    return K


def torus_grid(N: int, M: Optional[int] = None, offset=(0.5, 0.5)) -> SurfaceComplex:
    """Flat torus [0,1)^2 with an N x M grid, two triangles per square.

    Vertices sit at ((i + offset_s)/N, (j + offset_t)/M).  Reference cocycles:
    ``"s"`` marks edges crossing the s-seam and pairs to 1 with the (1, 0)
    circle; ``"t"`` likewise for the t-seam and the (0, 1) circle.
    """
    M = N if M is None else M
    if N < 3 or M < 3:
        raise InputError("torus_grid needs at least a 3x3 grid")

    def vid(i, j):
        return (i % N) * M + (j % M)

    tris, corner = [], []
    for i in range(N):
        for j in range(M):
            a, b, c, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            for t in ((a, b, c), (a, c, d)):
                tris.append([vid(*p) for p in t])
                corner.append([((p[0] + offset[0]) / N, (p[1] + offset[1]) / M) for p in t])
    V = np.array([((i + offset[0]) / N, (j + offset[1]) / M) for i in range(N) for j in range(M)])
    K = SurfaceComplex(N * M, np.array(tris), True, "torus", V, np.array(corner), {}, f"torus({N}x{M})")
    E = K.edges
    si, sj = E[:, 0] // M, E[:, 1] // M
    ti, tj = E[:, 0] % M, E[:, 1] % M
    s_seam = np.abs(si - sj) == N - 1
    t_seam = np.abs(ti - tj) == M - 1
    object.__setattr__(K, "cocycles", {"s": np.flatnonzero(s_seam), "t": np.flatnonzero(t_seam)})
    return K


def disjoint_union(*parts: SurfaceComplex) -> SurfaceComplex:
    """Disjoint union; parameters are dropped unless all parts share a kind."""
    tris, offset = [], 0
    for K in parts:
        tris.append(K.triangles + offset)
        offset += K.n_vertices
    same = len({K.kind for K in parts}) == 1 and all(K.corner_params is not None for K in parts)
    vp = np.concatenate([K.vertex_params for K in parts]) if same else None
    cp = np.concatenate([K.corner_params for K in parts]) if same else None
    U = SurfaceComplex(
        offset, np.concatenate(tris), all(K.orientable for K in parts), parts[0].kind if same else "abstract",
        vp, cp, {}, "+".join(K.name for K in parts),
    )
    return U


def circle_params(n: int) -> np.ndarray:
    """Half-offset samples (i + 1/2)/n of the unit interval."""
    if n < 3:
        raise InputError("a polygon needs at least 3 vertices")
    return (np.arange(n) + 0.5) / n
