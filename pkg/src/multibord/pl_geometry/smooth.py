"""Fold loci and tangent-direction points of smooth parametric immersions.

For a constant direction u in R^m these are the solutions of "u is tangent
to the image": the zero curve of <u, n> for surfaces in R^3, isolated zeros
of the normal component of u for surfaces in R^4, and points with tangent
parallel to u for curves in R^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ..errors import InputError, ResolutionError
from .domain import SurfaceComplex, circle_params
from .parametric import ParametricImmersion

NEWTON_TOL = 1e-12
BISECT_TOL = 1e-9


def unit(u) -> np.ndarray:
    v = np.asarray(u, dtype=float).reshape(-1)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0:
        raise InputError("direction must be a nonzero vector")
    return v / n


def _normalize_params(p: ParametricImmersion, P: np.ndarray) -> np.ndarray:
    if p.kind in ("sphere", "rp2"):
        return P / np.linalg.norm(P, axis=-1, keepdims=True)
    return P


# ---------------------------------------------------------------- fold locus


@dataclass(frozen=True, eq=False)
class FoldLocus:
    """Zero curve of <u, n> on the domain complex.

    ``crossings`` maps each crossed domain edge to its refined parameter
    point; ``curves`` lists closed polylines as edge id sequences; ``chain``
    holds the edges of the Z/2 edge-path projection (see
    :func:`edge_path_chain`).
    """

    domain: SurfaceComplex
    direction: tuple
    crossings: dict
    curves: list
    chain: np.ndarray

    def to_json(self) -> dict:
        return {
            "direction": [round(x, 12) for x in self.direction],
            "curve_count": len(self.curves),
            "curve_lengths": [len(c) for c in self.curves],
            "crossed_edges": len(self.crossings),
        }


def _surface_normal_r3(p: ParametricImmersion, P: np.ndarray) -> np.ndarray:
    D = p.differential(P)
    return np.cross(D[:, :, 0], D[:, :, 1])


def fold_locus(p: ParametricImmersion, u, domain: SurfaceComplex) -> FoldLocus:
    """Marching-triangles extraction of {<u, n> = 0} with bisection refinement.

    Values are taken at the lifted corners of each triangle so the curve is
    well defined on quotient domains.  A corner value of exactly zero counts
    as positive.
    """
    if p.ambient != 3 or p.source_dim != 2:
        raise InputError("fold_locus needs a surface in R^3")
    if domain.corner_params is None:
        raise InputError("fold_locus needs a parametrized domain")
    u = unit(u)
    T = domain.n_triangles
    corners = domain.corner_params.reshape(T * 3, -1)
    g = (_surface_normal_r3(p, corners) @ u).reshape(T, 3)
    scale = float(np.abs(g).max())
    flat = np.all(np.abs(g) <= 1e-12 * scale, axis=1)
    if np.any(flat):
        t = int(np.flatnonzero(flat)[0])
        raise ResolutionError(f"<u, n> vanishes on triangle {t} without a sign change; refine the grid", {"triangle": t})
    pos = g >= 0
    TE = domain.tri_edges
    crossed_by_tri: list[list[int]] = [[] for _ in range(T)]
    todo = []
    for i in range(3):
        j = (i + 1) % 3
        hit = np.flatnonzero(pos[:, i] != pos[:, j])
        for t in hit:
            crossed_by_tri[t].append(int(TE[t, i]))
            todo.append((int(TE[t, i]), int(t), i, j))
    # refine each crossed edge once, from its first triangle
    crossings = {}
    seen = {}
    for e, t, i, j in sorted(todo):
        if e in seen:
            continue
        seen[e] = True
        a, b = domain.corner_params[t, i], domain.corner_params[t, j]
        ga, gb = g[t, i], g[t, j]

        def f(s, a=a, b=b):
            q = _normalize_params(p, (a + s * (b - a))[None])
            return float(_surface_normal_r3(p, q)[0] @ u)

        s = brentq(f, 0.0, 1.0, xtol=BISECT_TOL) if ga * gb < 0 else (0.0 if ga == 0 else 1.0)
        crossings[e] = tuple(_normalize_params(p, (a + s * (b - a))[None])[0])
    for t in range(T):
        if len(crossed_by_tri[t]) not in (0, 2):
            raise ResolutionError(f"triangle {t} has {len(crossed_by_tri[t])} crossed edges", {"triangle": t})
    curves = _chase(crossed_by_tri, domain)
    chain = edge_path_chain(domain, [(t, *crossed_by_tri[t]) for t in range(T) if crossed_by_tri[t]])
    return FoldLocus(domain, tuple(float(x) for x in u), crossings, curves, chain)


def _chase(crossed_by_tri, domain: SurfaceComplex) -> list:
    """Closed curves through crossed edges, each as an edge id cycle."""
    used = set()
    curves = []
    ET = domain.edge_tris
    for t0 in range(len(crossed_by_tri)):
        if not crossed_by_tri[t0] or t0 in used:
            continue
        start = crossed_by_tri[t0][0]
        cur_t, cur_e = t0, start
        loop = [start]
        while True:
            used.add(cur_t)
            e1, e2 = crossed_by_tri[cur_t]
            nxt = e2 if e1 == cur_e else e1
            if nxt == start:
                break
            loop.append(nxt)
            a, b = ET[nxt]
            cur_t = int(b if a == cur_t else a)
            cur_e = nxt
        curves.append(loop)
    return curves


def edge_path_chain(domain: SurfaceComplex, pieces) -> np.ndarray:
    """Z/2 edge chain homologous to a curve given by per-triangle pieces.

    Each piece is ``(triangle, e1, e2)`` for a segment joining points on
    edges e1 and e2 of the triangle.  A point on an edge slides to the edge's
    smaller vertex; the segment becomes the triangle edge between the two
    slid endpoints (or nothing if they coincide).
    """
    E = domain.edges
    return chain_from_vertex_pairs(domain, [(int(E[e1, 0]), int(E[e2, 0])) for _, e1, e2 in pieces])


def chain_from_vertex_pairs(domain: SurfaceComplex, pairs) -> np.ndarray:
    """Z/2 sum of the edges joining each vertex pair; equal pairs contribute nothing."""
    coeff = np.zeros(domain.n_edges, dtype=np.int8)
    for a, b in pairs:
        if a != b:
            coeff[domain.edge_index(a, b)] ^= 1
    return np.flatnonzero(coeff)


# ---------------------------------------------------------------- tangent directions


@dataclass(frozen=True)
class TangentPoint:
    param: tuple
    point: tuple
    sign: int
    sheet: int = 0

    def to_json(self) -> dict:
        out = {
            "param": [round(float(x), 10) for x in self.param],
            "point": [round(float(x), 10) for x in self.point],
            "sign": self.sign,
        }
        if self.sheet:
            out["sheet"] = self.sheet
        return out


def _curve_tangent_points(p: ParametricImmersion, u: np.ndarray, samples: int) -> list[TangentPoint]:
    def g(t):
        d = p.raw_jacobian(np.array([[t]]))[0, :, 0]
        return u[0] * d[1] - u[1] * d[0]

    t = circle_params(samples)
    D = p.raw_jacobian(t[:, None])[:, :, 0]
    vals = u[0] * D[:, 1] - u[1] * D[:, 0]
    if np.any(vals == 0):
        raise ResolutionError("tangent parallel to u at a sample point; choose another direction")
    out = []
    for i in range(samples):
        j = (i + 1) % samples
        if vals[i] * vals[j] > 0:
            continue
        a, b = t[i], t[j] + (1.0 if j == 0 else 0.0)
        r = brentq(lambda s: g(s % 1.0), a, b, xtol=1e-14)
        dg = (g((r + 1e-7) % 1.0) - g((r - 1e-7) % 1.0)) / 2e-7
        d = p.raw_jacobian(np.array([[r % 1.0]]))[0, :, 0]
        sheet = 1 if d @ u > 0 else -1
        out.append(TangentPoint((r % 1.0,), tuple(p(np.array([[r % 1.0]]))[0]), int(np.sign(dg)) * sheet, sheet))
    out.sort(key=lambda q: q.param)
    return out


def _projected_frame(D: np.ndarray, N0: np.ndarray) -> np.ndarray:
    """Normal frame at a point with tangent columns D, continuous in N0."""
    Q, _ = np.linalg.qr(D)
    N = N0 - Q @ (Q.T @ N0)
    n1 = N[:, 0] / np.linalg.norm(N[:, 0])
    n2 = N[:, 1] - (n1 @ N[:, 1]) * n1
    n2 /= np.linalg.norm(n2)
    return np.stack([n1, n2], axis=1)


def _centroid_frame(D: np.ndarray) -> np.ndarray:
    U, _, _ = np.linalg.svd(D, full_matrices=True)
    N = U[:, 2:].copy()
    if np.linalg.det(np.concatenate([D, N], axis=1)) < 0:
        N[:, 1] *= -1
    return N


def _surface_tangent_points_r4(p: ParametricImmersion, u: np.ndarray, domain: SurfaceComplex) -> list[TangentPoint]:
    if not domain.orientable:
        raise InputError("signed tangent-direction points need an oriented domain")
    T = domain.n_triangles
    C = domain.corner_params
    cent = _normalize_params(p, C.mean(axis=1))
    Dc = p.differential(cent)
    Dv = p.differential(C.reshape(T * 3, -1)).reshape(T, 3, 4, 2)
    sols = []
    for t in range(T):
        N0 = _centroid_frame(Dc[t])
        h = np.array([_projected_frame(Dv[t, k], N0).T @ u for k in range(3)])
        M = np.stack([h[1] - h[0], h[2] - h[0]], axis=1)
        if abs(np.linalg.det(M)) < 1e-300:
            continue
        lam = np.linalg.solve(M, -h[0])
        bary = np.array([1 - lam.sum(), lam[0], lam[1]])
        if bary.min() < -0.25:
            continue
        x0 = _normalize_params(p, (bary @ C[t])[None])[0]
        res = _newton(p, u, x0, N0)
        if res is not None:
            sols.append(res)
    return _dedupe(p, sols)


def _newton(p: ParametricImmersion, u: np.ndarray, x0: np.ndarray, N0: np.ndarray, iters: int = 60):
    frame = p.tangent_frame(x0[None])[0]
    step = 1e-7

    def H(y):
        x = p.chart(x0, frame, y[None])[0]
        D = p.differential(x[None])[0]
        return _projected_frame(D, N0).T @ u

    def J(y):
        cols = []
        for i in range(2):
            d = np.zeros(2)
            d[i] = step
            cols.append((H(y + d) - H(y - d)) / (2 * step))
        return np.stack(cols, axis=1)

    y = np.zeros(2)
    for _ in range(iters):
        r = H(y)
        if np.linalg.norm(r) < NEWTON_TOL:
            break
        try:
            y = y - np.linalg.solve(J(y), r)
        except np.linalg.LinAlgError:
            return None
        if np.linalg.norm(y) > 0.5:
            return None
    else:
        return None
    x = p.chart(x0, frame, y[None])[0]
    # re-centre the chart at the solution so the orientation sign is local
    frame = p.tangent_frame(x[None])[0]
    x0 = x
    dH = J(np.zeros(2))
    D = p.differential(x[None], frame[None])[0]
    N = _projected_frame(D, N0)
    s = np.sign(np.linalg.det(dH)) * np.sign(np.linalg.det(np.concatenate([D, N], axis=1)))
    return x, int(s)


def _dedupe(p: ParametricImmersion, sols, tol: float = 1e-6) -> list[TangentPoint]:
    kept: list = []
    for x, s in sols:
        if any(np.linalg.norm(_wrap(p, x - y)) < tol for y, _ in kept):
            continue
        kept.append((x, s))
    out = [TangentPoint(tuple(float(v) for v in x), tuple(float(v) for v in p(x[None])[0]), s) for x, s in kept]
    out.sort(key=lambda q: q.param)
    return out


def _wrap(p: ParametricImmersion, d: np.ndarray) -> np.ndarray:
    if p.kind == "torus":
        return d - np.round(d)
    return d


def tangent_direction_points(
    p: ParametricImmersion, u, domain: Optional[SurfaceComplex] = None, samples: int = 4096
) -> list[TangentPoint]:
    """Signed solutions of "u is tangent to the image".

    Curves in R^2: parameters with f' parallel to +u or -u (``sheet`` +1/-1);
    sign is the local degree of the Gauss map.  Surfaces in R^4: isolated
    zeros of the normal component of u, Newton-refined; sign is the index of
    that normal field in oriented coordinates.
    """
    u = unit(u)
    if len(u) != p.ambient:
        raise InputError(f"direction has {len(u)} components, ambient dimension is {p.ambient}")
    if p.kind == "circle" and p.ambient == 2:
        return _curve_tangent_points(p, u, samples)
    if p.source_dim == 2 and p.ambient == 4:
        if domain is None:
            raise InputError("surface tangent directions need a domain mesh")
        return _surface_tangent_points_r4(p, u, domain)
    raise InputError("tangent_direction_points supports curves in R^2 and surfaces in R^4")
