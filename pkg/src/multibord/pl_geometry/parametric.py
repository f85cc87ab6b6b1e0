"""Smooth parametric immersions used alongside their PL meshes.

Sphere and projective plane domains are parametrized by unit vectors in R^3;
evaluators for them extend to all of R^3 (homogeneous polynomials), so the
differential along a tangent vector is a directional derivative in R^3.
Torus domains use [0,1)^2 and curves use [0,1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import GenericityError, InputError
from .domain import SurfaceComplex, circle_params, cube_sphere, disjoint_union, projective_plane, torus_grid
from .shapes import ImmersedPolyCurve, ImmersedTriMesh, from_float

TWO_PI = 2.0 * np.pi
SIGMA_MIN = 1e-6


@dataclass(frozen=True, eq=False)
class ParametricImmersion:
    """``evaluate`` maps an (K, p) array of parameters to (K, m) points.

    ``kind`` is ``"sphere"``, ``"rp2"``, ``"torus"`` or ``"circle"``.
    ``jacobian`` (optional) returns (K, m, p) derivatives of the evaluator in
    its own parameter coordinates; otherwise central differences with step
    ``h`` are used.
    """

    name: str
    kind: str
    ambient: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h: float = 1e-6

    @property
    def source_dim(self) -> int:
        return 1 if self.kind == "circle" else 2

    def __call__(self, P) -> np.ndarray:
        return self.evaluate(np.atleast_2d(np.asarray(P, dtype=float)))

    def raw_jacobian(self, P: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if self.jacobian is not None:
            return self.jacobian(P)
        p = P.shape[1]
        cols = []
        for i in range(p):
            d = np.zeros(p)
            d[i] = self.h
            cols.append((self.evaluate(P + d) - self.evaluate(P - d)) / (2 * self.h))
        return np.stack(cols, axis=-1)

    def tangent_frame(self, P: np.ndarray) -> np.ndarray:
        """(K, n, p) oriented tangent frame in parameter space.

        Spheres: (e1, e2) orthonormal with e1 x e2 = x (outward orientation).
        """
        P = np.atleast_2d(np.asarray(P, dtype=float))
        K = len(P)
        if self.kind in ("sphere", "rp2"):
            x = P / np.linalg.norm(P, axis=1, keepdims=True)
            axis = np.argmin(np.abs(x), axis=1)
            c = np.zeros_like(x)
            c[np.arange(K), axis] = 1.0
            e1 = np.cross(c, x)
            e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
            e2 = np.cross(x, e1)
            return np.stack([e1, e2], axis=1)
        if self.kind == "torus":
            return np.broadcast_to(np.eye(2), (K, 2, 2)).copy()
        if self.kind == "circle":
            return np.ones((K, 1, 1))
        raise InputError(f"unknown parameter domain {self.kind!r}")

    def differential(self, P: np.ndarray, frame: Optional[np.ndarray] = None) -> np.ndarray:
        """(K, m, n) matrix of df in the oriented tangent frame."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        J = self.raw_jacobian(P)
        F = self.tangent_frame(P) if frame is None else frame
        return np.einsum("kmp,knp->kmn", J, F)

    def chart(self, x0: np.ndarray, frame: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Local oriented chart around ``x0``: coordinates ``y`` -> parameter."""
        y = np.atleast_2d(y)
        if self.kind in ("sphere", "rp2"):
            p = x0 + y @ frame
            return p / np.linalg.norm(p, axis=1, keepdims=True)
        return x0 + y @ frame

    def check_immersion(self, P: np.ndarray, sigma_min: float = SIGMA_MIN) -> float:
        """Smallest singular value of df over the sample; raises below threshold."""
        D = self.differential(P)
        s = np.linalg.svd(D, compute_uv=False)[:, -1]
        worst = float(s.min())
        if worst < sigma_min:
            i = int(np.argmin(s))
            raise GenericityError(
                f"{self.name}: differential is singular at sample {i} (sigma={worst:.3g})",
                {"sample": i, "param": np.atleast_2d(P)[i].tolist(), "sigma": worst},
            )
        return worst

    def domain(self, resolution: int) -> SurfaceComplex:
        if self.kind == "sphere":
            return cube_sphere(resolution)
        if self.kind == "rp2":
            return projective_plane(resolution)
        if self.kind == "torus":
            return torus_grid(resolution, resolution)
        raise InputError(f"{self.name} has no surface domain")

    def mesh(self, resolution: int) -> ImmersedTriMesh:
        K = self.domain(resolution)
        return from_float(self(K.vertex_params), K, f"{self.name}@{resolution}")

    def polygon(self, vertices: int) -> ImmersedPolyCurve:
        if self.kind != "circle":
            raise InputError(f"{self.name} is not a curve")
        t = circle_params(vertices)
        return from_float(self(t[:, None]), None, f"{self.name}@{vertices}", t)


# ---------------------------------------------------------------- evaluators


def _apery(P: np.ndarray) -> np.ndarray:
    x, y, z = P[:, 0], P[:, 1], P[:, 2]
    r2 = x * x + y * y + z * z
    s = x + y + z
    X = ((2 * x * x - y * y - z * z) * r2 + 2 * y * z * (y * y - z * z) + z * x * (x * x - z * z) + x * y * (y * y - x * x)) / 2
    Y = np.sqrt(3) / 2 * ((y * y - z * z) * r2 + z * x * (z * z - x * x) + x * y * (y * y - x * x))
    Z = s * (s**3 + 4 * (y - x) * (z - y) * (x - z)) / 8
    return np.stack([X, Y, Z], axis=1)


def _whitney(P: np.ndarray) -> np.ndarray:
    x, y, z = P[:, 0], P[:, 1], P[:, 2]
    return np.stack([x * z, y * z, x, y], axis=1)


def _whitney_jacobian(P: np.ndarray) -> np.ndarray:
    x, y, z = P[:, 0], P[:, 1], P[:, 2]
    o, n = np.ones_like(x), np.zeros_like(x)
    rows = [[z, n, x], [n, z, y], [o, n, n], [n, o, n]]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=1)


def _sphere_r3(P):
    return P.copy()


def _sphere_r4(P):
    return np.concatenate([P, np.zeros((len(P), 1))], axis=1)


def _torus(R: float, r: float):
    def F(P):
        s, t = TWO_PI * P[:, 0], TWO_PI * P[:, 1]
        w = R + r * np.cos(t)
        return np.stack([w * np.cos(s), w * np.sin(s), r * np.sin(t)], axis=1)

    return F


def _circle(P):
    t = TWO_PI * P[:, 0]
    return np.stack([np.cos(t), np.sin(t)], axis=1)


def _figure8(P):
    t = TWO_PI * P[:, 0]
    return np.stack([np.sin(2 * t), np.sin(t)], axis=1)


def _limacon(P):
    t = TWO_PI * P[:, 0]
    r = 1 + 2 * np.cos(t)
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=1)


PARAMETRIC_BUILTINS = ("boy", "whitney", "sphere_r3", "sphere_r4", "torus", "circle", "figure8", "limacon")
MESH_BUILTINS = ("two_tori", "three_pancakes")


def builtin_parametric(name: str, params: Optional[dict] = None) -> ParametricImmersion:
    params = dict(params or {})
    if name == "boy":
        return ParametricImmersion("boy", "rp2", 3, _apery, params)
    if name == "whitney":
        return ParametricImmersion("whitney", "sphere", 4, _whitney, params, _whitney_jacobian)
    if name == "sphere_r3":
        return ParametricImmersion("sphere_r3", "sphere", 3, _sphere_r3, params)
    if name == "sphere_r4":
        return ParametricImmersion("sphere_r4", "sphere", 4, _sphere_r4, params)
    if name == "torus":
        R = float(eval_number(params.get("R", 2)))
        r = float(eval_number(params.get("r", 1)))
        if not 0 < r < R:
            raise InputError("torus needs 0 < r < R")
        return ParametricImmersion("torus", "torus", 3, _torus(R, r), {"R": R, "r": r, **params})
    if name == "circle":
        return ParametricImmersion("circle", "circle", 2, _circle, params)
    if name == "figure8":
        return ParametricImmersion("figure8", "circle", 2, _figure8, params)
    if name == "limacon":
        return ParametricImmersion("limacon", "circle", 2, _limacon, params)
    raise InputError(f"unknown parametric built-in {name!r}; choose from {', '.join(PARAMETRIC_BUILTINS)}")


def eval_number(x) -> float:
    from ..exact_linalg import parse_scalar

    return float(parse_scalar(x)) if isinstance(x, str) else float(x)


def builtin_mesh(name: str, resolution: int = 16) -> ImmersedTriMesh:
    """Mesh-only built-ins for constructed intersection cases.

    ``two_tori``: two standard tori (R=2, r=1), the second rotated into the
    xz-plane and shifted by (1, 0, 0) so the tubes cross transversally in two
    curves.  (A shift of 2 makes the tubes tangent along a whole circle.)
    ``three_pancakes``: three flattened spheres along the coordinate planes;
    near the origin each contributes two sheets, giving 8 triple points.
    """
    if name == "two_tori":
        K = torus_grid(resolution, resolution)
        F = _torus(2.0, 1.0)
        A = F(K.vertex_params)
        B = A[:, [0, 2, 1]] * np.array([1, 1, -1]) + np.array([1.0, 0.0, 0.0])
        U = disjoint_union(K, K)
        return from_float(np.concatenate([A, B]), U, "two_tori")
    if name == "three_pancakes":
        S = cube_sphere(resolution)
        parts, pts = [], []
        for axis in range(3):
            scale = np.full(3, 2.0)
            scale[axis] = 0.5
            # scaling by a positive diagonal matrix keeps the outward orientation
            pts.append(S.vertex_params * scale)
            parts.append(S)
        return from_float(np.concatenate(pts), disjoint_union(*parts), "three_pancakes")
    raise InputError(f"unknown mesh built-in {name!r}; choose from {', '.join(MESH_BUILTINS)}")
