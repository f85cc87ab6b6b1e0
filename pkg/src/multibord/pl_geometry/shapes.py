"""Immersed polygons and triangle meshes with exact rational vertices.

Vertex coordinates are ``grid / denom`` with integer-valued ``grid`` entries
below 2**44 (see :mod:`predicates`).  Floating coordinates enter only through
:func:`from_float`, which snaps them to a dyadic grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import GenericityError, InputError
from ..exact_linalg import format_scalar, parse_scalar
from .domain import SurfaceComplex, circle_params
from .predicates import GRID_BITS, det_sign, snap, snap_scale

MAX_RETRIES = 8


@dataclass(frozen=True)
class IntersectionRecord:
    """One ordered preimage tuple of a k-fold point.

    ``simplices`` are the domain simplex indices (segments or triangles) in
    order; ``params`` the matching local coordinates (segment parameter, or
    barycentric pair on the triangle); ``sign`` is +1/-1, or 0 when unsigned.
    """

    k: int
    simplices: tuple
    params: tuple
    point: tuple
    sign: int

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "simplices": list(self.simplices),
            "params": [[round(float(x), 12) for x in p] for p in self.params],
            "point": [round(float(x), 12) for x in self.point],
            "sign": self.sign if self.sign else "unsigned",
        }


class _Exact:
    grid: np.ndarray
    denom: int

    @property
    def coords(self) -> np.ndarray:
        return self.grid / float(self.denom)

    def rational(self, i: int) -> tuple:
        return tuple(Fraction(int(x), self.denom) for x in self.grid[i])

    @property
    def ambient(self) -> int:
        return self.grid.shape[1]

    def bbox_diagonal(self) -> float:
        c = self.coords
        return float(np.linalg.norm(c.max(axis=0) - c.min(axis=0)))


def dyadic(s: int):
    return 2**s if s >= 0 else Fraction(1, 2 ** (-s))


def _exact_grid(points, name: str):
    """Integer grid for float or rational input; dyadic snapping for floats."""
    if isinstance(points, np.ndarray) and points.dtype.kind == "f":
        s = snap_scale(points)
        return snap(points, s), dyadic(s), True
    rows = [[x if isinstance(x, Fraction) else Fraction(parse_scalar(x) if isinstance(x, str) else x) for x in r] for r in points]
    L = 1
    for r in rows:
        for x in r:
            L = L * x.denominator // math.gcd(L, x.denominator)
    ints = [[int(x * L) for x in r] for r in rows]
    if max((abs(v) for r in ints for v in r), default=0) < 2**GRID_BITS:
        return np.array(ints, dtype=float), L, False
    arr = np.array([[float(x) for x in r] for r in rows])
    s = snap_scale(arr)
    return snap(arr, s), dyadic(s), True


@dataclass(frozen=True, eq=False)
class ImmersedPolyCurve(_Exact):
    """Closed polygon in R^2; vertex i joins segment i = (i, i+1 mod n)."""

    grid: np.ndarray
    denom: int
    params: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", g)
        g.setflags(write=False)
        if g.ndim != 2 or g.shape[1] != 2:
            raise InputError("a curve needs planar vertices")
        if len(g) < 3:
            raise InputError("a curve needs at least 3 vertices")
        if np.any(np.all(g == np.roll(g, -1, axis=0), axis=1)):
            raise InputError("consecutive vertices coincide")

    @property
    def n(self) -> int:
        return len(self.grid)

    def segments(self) -> np.ndarray:
        idx = np.arange(self.n)
        return np.stack([idx, (idx + 1) % self.n], axis=1)

    def with_grid(self, grid, denom) -> "ImmersedPolyCurve":
        return replace(self, grid=grid, denom=denom)

    def to_json(self) -> dict:
        return {"type": "curve", "vertices": [[format_scalar(x) for x in self.rational(i)] for i in range(self.n)]}


@dataclass(frozen=True, eq=False)
class ImmersedTriMesh(_Exact):
    """Triangle mesh map of a closed surface into R^3 or R^4."""

    domain: SurfaceComplex
    grid: np.ndarray
    denom: int
    name: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", g)
        g.setflags(write=False)
        if g.ndim != 2 or g.shape[1] not in (3, 4):
            raise InputError("mesh coordinates must live in R^3 or R^4")
        if len(g) != self.domain.n_vertices:
            raise InputError(f"{len(g)} coordinates for {self.domain.n_vertices} domain vertices")

    @property
    def triangles(self) -> np.ndarray:
        return self.domain.triangles

    def corners(self) -> np.ndarray:
        """(T, 3, m) integer-valued grid coordinates of triangle corners."""
        return self.grid[self.domain.triangles]

    def check_nondegenerate(self):
        """Exact rank-2 test for every mapped triangle."""
        C = self.corners()
        e1, e2 = C[:, 1] - C[:, 0], C[:, 2] - C[:, 0]
        m = self.ambient
        alive = np.zeros(len(C), dtype=bool)
        for i in range(m):
            for j in range(i + 1, m):
                M = np.stack([np.stack([e1[:, i], e1[:, j]], -1), np.stack([e2[:, i], e2[:, j]], -1)], 1)
                alive |= det_sign(M) != 0
        if not np.all(alive):
            t = int(np.flatnonzero(~alive)[0])
            raise GenericityError(f"triangle {t} maps to a degenerate simplex", {"triangle": t})

    def with_grid(self, grid, denom) -> "ImmersedTriMesh":
        return replace(self, grid=grid, denom=denom)

    def reversed(self) -> "ImmersedTriMesh":
        """Same map with the domain orientation reversed."""
        return replace(self, domain=self.domain.reversed(), name=self.name + "-reversed")

    def mirrored(self) -> "ImmersedTriMesh":
        """Compose with the reflection x_0 -> -x_0 of the ambient space."""
        g = self.grid.copy()
        g[:, 0] *= -1
        return replace(self, grid=g, name=self.name + "-mirrored")

    def to_json(self) -> dict:
        doc = {
            "type": "mesh",
            "vertices": [[format_scalar(x) for x in self.rational(i)] for i in range(len(self.grid))],
            "triangles": self.triangles.tolist(),
            "orientable": bool(self.domain.orientable),
        }
        if self.domain.orientable:
            doc["orientation"] = [1] * self.domain.n_triangles
        return doc


def from_float(points: np.ndarray, domain: Optional[SurfaceComplex] = None, name: str = "", params=None):
    grid, denom, _ = _exact_grid(np.asarray(points, dtype=float), name)
    if domain is None:
        return ImmersedPolyCurve(grid, denom, params, name)
    return ImmersedTriMesh(domain, grid, denom, name)


# ---------------------------------------------------------------- file formats


def _mesh_from_lists(vertices, triangles, orientable: bool, orientation=None, name: str = "") -> ImmersedTriMesh:
    tris = np.asarray(triangles, dtype=np.int64)
    if orientation is not None:
        o = np.asarray(orientation)
        if len(o) != len(tris) or not np.all(np.isin(o, (-1, 1))):
            raise InputError("orientation must list +1/-1 per triangle")
        tris = np.where((o < 0)[:, None], tris[:, [0, 2, 1]], tris)
    grid, denom, _ = _exact_grid(vertices, name)
    dom = SurfaceComplex(len(grid), tris, orientable, "abstract", None, None, {}, name)
    return ImmersedTriMesh(dom, grid, denom, name)


def read_off(path, orientable: bool = True) -> ImmersedTriMesh:
    """OFF reader (triangles only); numeric tokens may be written as p/q."""
    tokens = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or not tokens[0].endswith("OFF"):
        raise InputError(f"{path}: missing OFF header")
    head = tokens[0]
    dim = 4 if head.startswith("4") else 3
    pos = 1
    if head.startswith("n") or head.startswith("4n"):
        raise InputError("nOFF is not supported")
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3
        verts = []
        for _ in range(nv):
            verts.append([Fraction(parse_scalar(t)) for t in tokens[pos:pos + dim]])
            pos += dim
        tris = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise InputError("OFF faces must be triangles")
            tris.append([int(t) for t in tokens[pos + 1:pos + 4]])
            pos += 4
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: malformed OFF ({exc})") from None
    return _mesh_from_lists(verts, tris, orientable, None, Path(path).stem)


def write_off(mesh: ImmersedTriMesh, path):
    head = "OFF" if mesh.ambient == 3 else "4OFF"
    lines = [head, f"{len(mesh.grid)} {mesh.domain.n_triangles} 0"]
    for i in range(len(mesh.grid)):
        lines.append(" ".join(format_scalar(x) for x in mesh.rational(i)))
    for t in mesh.triangles.tolist():
        lines.append("3 " + " ".join(str(v) for v in t))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def shape_from_json(doc: dict, name: str = ""):
    if not isinstance(doc, dict) or "vertices" not in doc:
        raise InputError("shape JSON needs a 'vertices' list")
    if "triangles" in doc:
        return _mesh_from_lists(doc["vertices"], doc["triangles"], bool(doc.get("orientable", True)), doc.get("orientation"), name)
    grid, denom, _ = _exact_grid(doc["vertices"], name)
    return ImmersedPolyCurve(grid, denom, None, name)


def read_shape(path):
    path = Path(path)
    if path.suffix.lower() == ".off":
        return read_off(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read shape {path}: {exc}") from None
    return shape_from_json(doc, path.stem)


# ---------------------------------------------------------------- perturbation


def derived_seed(seed: int, *salt: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & (2**64 - 1), *salt])


def perturb_generic(
    shape,
    seed: int,
    magnitude: Union[str, float, Fraction] = "1/10000000",
    certify: Optional[Callable] = None,
    retries: int = MAX_RETRIES,
):
    """Seeded vertex displacement of size <= magnitude * bbox diagonal.

    Coordinates are snapped to a dyadic grid.  ``certify(shape)`` runs the
    general-position predicates (mapped-simplex nondegeneracy by default); on
    :class:`GenericityError` the displacement is redrawn from a derived seed.
    Returns ``(shape, certificate_result, attempt)``.
    """
    mag = Fraction(parse_scalar(magnitude)) if isinstance(magnitude, str) else Fraction(magnitude)
    if mag <= 0:
        raise InputError("perturbation magnitude must be positive")
    if certify is None:
        certify = _default_certificate
    base = shape.coords
    diag = shape.bbox_diagonal()
    amp = float(mag) * diag / math.sqrt(base.shape[1])
    last = None
    for attempt in range(retries):
        rng = np.random.default_rng(derived_seed(seed, attempt))
        moved = base + rng.uniform(-amp, amp, size=base.shape)
        s = snap_scale(moved)
        out = shape.with_grid(snap(moved, s), dyadic(s))
        try:
            return out, certify(out), attempt
        except GenericityError as exc:
            last = exc
    raise GenericityError(
        f"general position not reached after {retries} perturbations",
        {"seed": int(seed), "last": getattr(last, "detail", {}), "message": str(last)},
    )


def _default_certificate(shape):
    if isinstance(shape, ImmersedTriMesh):
        shape.check_nondegenerate()
    return None
