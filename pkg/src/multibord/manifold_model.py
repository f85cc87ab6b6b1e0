"""Closed manifolds (and R^m) as graded rings with Poincare duality.

Homology coordinates in degree ``d`` are taken dual to the cohomology basis
in degree ``d`` under the Kronecker pairing, so ``<c_i, x> = x[i]``.  The cap
product is the left module action fixed by ``<c, a cap x> = <c cup a, x>``;
with it ``cap(a, cap(b, x)) = cap(a cup b, x)`` and duality is
``gamma(a) = a cap [M]``.  ``pd`` is the inverse of ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import DegreeError, InputError
from .exact_linalg import GF2, QQ, ZZ, CoeffSystem, ExactMatrix, format_scalar
from .graded_algebra import (
    Element,
    GradedRing,
    compact_support_euclidean_ring,
    complex_projective_ring,
    exterior_ring,
    projective_plane_ring,
    sphere_ring,
    surface_ring,
    tensor_ring,
    validate_ring,
)

__all__ = ["ManifoldModel", "HomologyElement", "pd", "gamma", "cap", "builtin_manifold", "BUILTIN_NAMES"]


@dataclass(frozen=True)
class HomologyElement:
    manifold: "ManifoldModel" = field(repr=False, compare=False)
    degree: int
    coords: tuple

    def __post_init__(self):
        r = self.manifold.homology_rank(self.degree)
        if len(self.coords) != r:
            raise InputError(f"homology degree {self.degree} needs {r} coordinates, got {len(self.coords)}")

    def __eq__(self, other):
        if not isinstance(other, HomologyElement):
            return NotImplemented
        return self.manifold is other.manifold and self.degree == other.degree and self.coords == other.coords

    def __hash__(self):
        return hash((self.degree, self.coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def to_json(self) -> dict:
        return {"degree": self.degree, "coords": [format_scalar(c) for c in self.coords]}


class ManifoldModel:
    """A closed manifold, or R^m with compactly supported cohomology.

    For closed models ``ring`` is the ordinary cohomology ring and the duality
    matrices come from the cup pairing.  For ``euclidean`` models ``ring`` is
    H_c^* (a single class in the top degree) and homology is H_0 only.
    """

    def __init__(self, dim: int, ring: GradedRing, oriented: bool = True, name: str = "", euclidean: bool = False):
        if ring.top_degree != dim:
            raise InputError(f"ring top degree {ring.top_degree} differs from dimension {dim}")
        self.dim = dim
        self.ring = ring
        self.oriented = oriented
        self.name = name or ring.name
        self.euclidean = euclidean
        self.coeffs = ring.coeffs
        if not oriented and ring.coeffs != GF2:
            raise DegreeError(f"{self.name}: a non-orientable manifold needs F_2 coefficients")
        if euclidean:
            if ring.has_unit or any(ring.rank(d) for d in range(dim)) or ring.rank(dim) != 1:
                raise InputError("a euclidean model needs the compactly supported ring of R^m")
            self._hom_ranks = {0: 1}
            self._gamma = {dim: ExactMatrix.identity(1, self.coeffs)}
            self._pd = {0: ExactMatrix.identity(1, self.coeffs)}
            return
        if ring.rank(dim) != 1:
            raise InputError(f"{self.name}: top degree must have rank one (connected closed manifold)")
        self._hom_ranks = {d: ring.rank(d) for d in range(dim + 1)}
        self._gamma = {}
        self._pd = {}
        for p in range(dim + 1):
            d = dim - p
            rows = []
            for c in ring.basis_elements(d):
                rows.append([_cup_top(c, a) for a in ring.basis_elements(p)])
            G = ExactMatrix(rows, self.coeffs, cols=ring.rank(p)) if rows else ExactMatrix.zeros(0, ring.rank(p), self.coeffs)
            self._gamma[p] = G
            try:
                self._pd[d] = G.inverse()
            except ZeroDivisionError as exc:
                raise InputError(f"{self.name}: cup pairing in degrees ({d},{p}) is not unimodular") from exc
        if pd(self, self.fundamental_class()) != ring.unit():
            raise InputError(f"{self.name}: pd of the fundamental class is not the unit")

    def homology_rank(self, d: int) -> int:
        return self._hom_ranks.get(d, 0)

    def pd_matrix(self, d: int) -> ExactMatrix:
        """Matrix of pd: H_d -> H^{n-d}."""
        if d not in self._pd:
            return ExactMatrix.zeros(self.ring.rank(self.dim - d), self.homology_rank(d), self.coeffs)
        return self._pd[d]

    def gamma_matrix(self, p: int) -> ExactMatrix:
        """Matrix of gamma: H^p -> H_{n-p}."""
        if p not in self._gamma:
            return ExactMatrix.zeros(self.homology_rank(self.dim - p), self.ring.rank(p), self.coeffs)
        return self._gamma[p]

    def fundamental_class(self) -> HomologyElement:
        if self.euclidean:
            raise DegreeError("R^m has no fundamental class in ordinary homology")
        return HomologyElement(self, self.dim, (self.coeffs.one(),))

    def point_class(self) -> HomologyElement:
        return HomologyElement(self, 0, (self.coeffs.one(),))

    def homology(self, d: int, coords: Sequence) -> HomologyElement:
        return HomologyElement(self, d, tuple(self.coeffs(x) for x in coords))

    def homology_zero(self, d: int) -> HomologyElement:
        return HomologyElement(self, d, (self.coeffs.zero(),) * self.homology_rank(d))

    def pairing(self, a: Element, x: HomologyElement) -> object:
        """Kronecker pairing <a, x>."""
        if a.degree != x.degree:
            raise DegreeError(f"cannot pair degree {a.degree} cohomology with degree {x.degree} homology")
        k = self.coeffs
        return k.reduce(sum((s * t for s, t in zip(a.coords, x.coords)), k.zero()))

    def with_coeffs(self, coeffs: CoeffSystem) -> "ManifoldModel":
        if coeffs == self.coeffs:
            return self
        return ManifoldModel(self.dim, self.ring.with_coeffs(coeffs), self.oriented, self.name, self.euclidean)

    def check(self) -> list[str]:
        """Invariant report: ring laws, pd round trips, pairing symmetry."""
        problems = [f"ring: {v.law} {v.degrees} {v.indices}" for v in validate_ring(self.ring)]
        if self.euclidean:
            return problems
        n = self.dim
        for d in range(n + 1):
            P, G = self.pd_matrix(d), self.gamma_matrix(n - d)
            if P @ G != ExactMatrix.identity(self.ring.rank(n - d), self.coeffs):
                problems.append(f"pd o gamma != id in degree {d}")
            sign = 1 if self.coeffs == GF2 else (-1) ** (d * (n - d))
            for i, c in enumerate(self.ring.basis_elements(d)):
                for j, a in enumerate(self.ring.basis_elements(n - d)):
                    if _cup_top(c, a) != self.coeffs.reduce(sign * _cup_top(a, c)):
                        problems.append(f"pairing not graded-symmetric at ({d},{n - d}) [{i},{j}]")
        return problems

    def __repr__(self):
        kind = "euclidean" if self.euclidean else ("oriented" if self.oriented else "unoriented")
        return f"ManifoldModel({self.name}, dim={self.dim}, {kind}, {self.coeffs.name})"


def _cup_top(a: Element, b: Element):
    prod = a.cup(b)
    return prod.coords[0]


def _require_duality(M: ManifoldModel):
    if not M.oriented and M.coeffs != GF2:
        raise DegreeError(f"{M.name} is not oriented; duality needs F_2 coefficients")


def pd(M: ManifoldModel, x: HomologyElement) -> Element:
    """Poincare dual H_d -> H^{n-d}."""
    _require_duality(M)
    if x.manifold is not M and x.manifold.ring != M.ring:
        raise InputError("homology class lives on a different manifold")
    if not 0 <= x.degree <= M.dim:
        raise DegreeError(f"homology degree {x.degree} out of range")
    return Element(M.ring, M.dim - x.degree, M.pd_matrix(x.degree).apply(x.coords))


def gamma(M: ManifoldModel, a: Element) -> HomologyElement:
    """Inverse of ``pd``: a |-> a cap [M]."""
    _require_duality(M)
    if a.beyond_top:
        raise DegreeError(f"degree {a.degree} exceeds dimension {M.dim}")
    return HomologyElement(M, M.dim - a.degree, M.gamma_matrix(a.degree).apply(a.coords))


def cap(a: Element, x: HomologyElement) -> HomologyElement:
    M = x.manifold
    if M.euclidean:
        raise DegreeError("cap products on R^m are not modelled")
    if a.degree > x.degree:
        raise DegreeError(f"cap of degree {a.degree} with degree {x.degree} underflows")
    d = x.degree - a.degree
    k = M.coeffs
    out = []
    for c in M.ring.basis_elements(d):
        ca = c.cup(a)
        out.append(k.reduce(sum((s * t for s, t in zip(ca.coords, x.coords)), k.zero())))
    return HomologyElement(M, d, tuple(out))


BUILTIN_NAMES = (
    "sphere",
    "torus",
    "surface",
    "projective_plane",
    "complex_projective",
    "product",
    "euclidean",
)


def builtin_manifold(name: str, params: Optional[dict] = None, coeffs: CoeffSystem = ZZ) -> ManifoldModel:
    """Standard models: sphere(n), torus(n), surface(genus), projective_plane,
    complex_projective(n), product(a, b), euclidean(m)."""
    params = dict(params or {})
    if name == "sphere":
        n = int(params.get("n", 2))
        return ManifoldModel(n, sphere_ring(n, coeffs), name=f"S^{n}")
    if name == "torus":
        n = int(params.get("n", 2))
        return ManifoldModel(n, exterior_ring(n, coeffs), name=f"T^{n}")
    if name == "surface":
        g = int(params.get("genus", 1))
        return ManifoldModel(2, surface_ring(g, coeffs), name=f"Sigma_{g}")
    if name == "projective_plane":
        if coeffs != GF2:
            raise InputError("projective_plane is only available with F_2 coefficients")
        return ManifoldModel(2, projective_plane_ring(coeffs), oriented=False, name="RP^2")
    if name == "complex_projective":
        n = int(params.get("n", 1))
        return ManifoldModel(2 * n, complex_projective_ring(n, coeffs), name=f"CP^{n}")
    if name == "euclidean":
        m = int(params.get("m", params.get("n", 3)))
        return ManifoldModel(m, compact_support_euclidean_ring(m, coeffs), name=f"R^{m}", euclidean=True)
    if name == "product":
        a, b = params.get("a"), params.get("b")
        A = a if isinstance(a, ManifoldModel) else builtin_manifold(a["name"], a.get("params"), coeffs)
        B = b if isinstance(b, ManifoldModel) else builtin_manifold(b["name"], b.get("params"), coeffs)
        if A.euclidean or B.euclidean:
            raise InputError("products with R^m are not modelled")
        return ManifoldModel(A.dim + B.dim, tensor_ring(A.ring, B.ring), A.oriented and B.oriented, f"{A.name}x{B.name}")
    raise InputError(f"unknown built-in manifold {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
