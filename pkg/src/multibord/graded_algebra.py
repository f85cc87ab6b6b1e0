"""Graded rings given by dense cup-product structure constants.

A ring of top degree ``n`` stores ``rank(d)`` for ``0 <= d <= n`` and, for
every degree pair ``(p, q)`` with ``p + q <= n``, a tensor ``T[i][j][k]``:
the cup of basis element ``i`` of degree ``p`` with basis element ``j`` of
degree ``q`` has coordinate ``T[i][j][k]`` on basis element ``k`` of degree
``p + q``.  Missing tables are zero, except that unit tables are filled in
automatically for rings with a single degree-0 generator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DegreeError, InputError
from .exact_linalg import GF2, ZZ, CoeffSystem, format_scalar

__all__ = [
    "GradedRing",
    "Element",
    "cup",
    "scale_add",
    "validate_ring",
    "Violation",
    "sphere_ring",
    "exterior_ring",
    "surface_ring",
    "projective_plane_ring",
    "complex_projective_ring",
    "compact_support_euclidean_ring",
    "tensor_ring",
]


class GradedRing:
    def __init__(
        self,
        top_degree: int,
        ranks: Sequence[int],
        cup_tables: Optional[Mapping[tuple[int, int], Sequence]] = None,
        coeffs: CoeffSystem = ZZ,
        name: str = "",
        has_unit: bool = True,
        basis_names: Optional[Mapping[int, Sequence[str]]] = None,
    ):
        if len(ranks) != top_degree + 1:
            raise InputError(f"need {top_degree + 1} ranks, got {len(ranks)}")
        if any(r < 0 for r in ranks):
            raise InputError("negative rank")
        if has_unit and ranks[0] < 1:
            raise InputError("a unital ring needs rank(0) >= 1")
        self.top_degree = top_degree
        self.ranks = tuple(int(r) for r in ranks)
        self.coeffs = coeffs
        self.name = name
        self.has_unit = has_unit
        self.basis_names = {int(d): tuple(v) for d, v in (basis_names or {}).items()}
        self._tables: dict[tuple[int, int], tuple] = {}
        zero = coeffs.zero()
        given = dict(cup_tables or {})
        for p in range(top_degree + 1):
            for q in range(top_degree + 1 - p):
                rp, rq, rpq = self.ranks[p], self.ranks[q], self.ranks[p + q]
                if (p, q) in given:
                    t = given.pop((p, q))
                    if len(t) != rp or any(len(t[i]) != rq or any(len(t[i][j]) != rpq for j in range(rq)) for i in range(rp)):
                        raise InputError(f"cup table ({p},{q}) has the wrong shape")
                    tab = tuple(tuple(tuple(coeffs(x) for x in t[i][j]) for j in range(rq)) for i in range(rp))
                elif has_unit and self.ranks[0] == 1 and (p == 0 or q == 0):
                    tab = _unit_table(rp, rq, rpq, p == 0, coeffs)
                else:
                    tab = tuple(tuple((zero,) * rpq for _ in range(rq)) for _ in range(rp))
                self._tables[(p, q)] = tab
        if given:
            raise InputError(f"cup tables out of range: {sorted(given)}")

    def rank(self, d: int) -> int:
        return self.ranks[d] if 0 <= d <= self.top_degree else 0

    def table(self, p: int, q: int) -> tuple:
        return self._tables[(p, q)]

    def zero(self, d: int) -> "Element":
        """Zero of degree ``d``; above the top degree this is the zero-by-dimension class."""
        if d < 0:
            raise DegreeError(f"negative degree {d}")
        return Element(self, d, (self.coeffs.zero(),) * self.rank(d))

    def unit(self) -> "Element":
        if not self.has_unit:
            raise DegreeError(f"ring {self.name or '?'} has no unit (compactly supported cohomology)")
        return self.basis(0, 0)

    def basis(self, d: int, i: int) -> "Element":
        r = self.rank(d)
        if not 0 <= i < r:
            raise DegreeError(f"basis index {i} out of range for degree {d} (rank {r})")
        z, o = self.coeffs.zero(), self.coeffs.one()
        return Element(self, d, tuple(o if j == i else z for j in range(r)))

    def basis_elements(self, d: int) -> list["Element"]:
        return [self.basis(d, i) for i in range(self.rank(d))]

    def element(self, d: int, coords: Sequence) -> "Element":
        return Element(self, d, tuple(self.coeffs(x) for x in coords))

    def top_class(self) -> "Element":
        if self.rank(self.top_degree) != 1:
            raise DegreeError("top degree is not of rank one")
        return self.basis(self.top_degree, 0)

    def with_coeffs(self, coeffs: CoeffSystem) -> "GradedRing":
        """Change coefficients; only Z -> Q, Z -> F_p and identity are allowed."""
        if coeffs == self.coeffs:
            return self
        if self.coeffs != ZZ:
            raise DegreeError(f"cannot change coefficients {self.coeffs.name} -> {coeffs.name}")
        return GradedRing(
            self.top_degree, self.ranks, dict(self._tables), coeffs,
            self.name, self.has_unit, self.basis_names,
        )

    def basis_label(self, d: int, i: int) -> str:
        names = self.basis_names.get(d)
        if names and i < len(names):
            return names[i]
        return f"x{d}_{i}"

    def __eq__(self, other):
        if not isinstance(other, GradedRing):
            return NotImplemented
        return (
            self.top_degree == other.top_degree
            and self.ranks == other.ranks
            and self.coeffs == other.coeffs
            and self.has_unit == other.has_unit
            and self._tables == other._tables
        )

    def __hash__(self):
        return hash((self.top_degree, self.ranks, self.coeffs))

    def __repr__(self):
        return f"GradedRing({self.name or '?'}, ranks={self.ranks}, {self.coeffs.name})"


def _unit_table(rp, rq, rpq, left, coeffs):
    z, o = coeffs.zero(), coeffs.one()
    if left:  # 1 (deg 0) times basis j of degree q
        return (tuple(tuple(o if k == j else z for k in range(rpq)) for j in range(rq)),)
    return tuple((tuple(o if k == i else z for k in range(rpq)),) for i in range(rp))


@dataclass(frozen=True)
class Element:
    ring: GradedRing = field(repr=False, compare=False)
    degree: int
    coords: tuple

    def __post_init__(self):
        if self.degree < 0:
            raise DegreeError(f"negative degree {self.degree}")
        if len(self.coords) != self.ring.rank(self.degree):
            raise InputError(
                f"degree {self.degree} needs {self.ring.rank(self.degree)} coordinates, got {len(self.coords)}"
            )

    @property
    def beyond_top(self) -> bool:
        """True for the zero-by-dimension class of a degree above the top."""
        return self.degree > self.ring.top_degree

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.ring is other.ring and self.degree == other.degree and self.coords == other.coords

    def __hash__(self):
        return hash((self.degree, self.coords))

    def __add__(self, other: "Element") -> "Element":
        return scale_add(1, self, 1, other)

    def __sub__(self, other: "Element") -> "Element":
        return scale_add(1, self, -1, other)

    def __neg__(self) -> "Element":
        return scale_add(-1, self, 0, self)

    def __mul__(self, c) -> "Element":
        return scale_add(c, self, 0, self)

    __rmul__ = __mul__

    def cup(self, other: "Element") -> "Element":
        return cup(self, other)

    def to_json(self) -> dict:
        return {"degree": self.degree, "coords": [format_scalar(c) for c in self.coords]}

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coords):
            if c:
                label = self.ring.basis_label(self.degree, i)
                terms.append(label if c == 1 else f"{format_scalar(c)}*{label}")
        return " + ".join(terms)


def _same_ring(a: Element, b: Element):
    if a.ring is not b.ring and a.ring != b.ring:
        raise InputError("elements live in different rings")


def cup(a: Element, b: Element) -> Element:
    _same_ring(a, b)
    R = a.ring
    d = a.degree + b.degree
    if a.beyond_top or b.beyond_top or d > R.top_degree:
        raise DegreeError(f"cup of degrees {a.degree}+{b.degree} exceeds top degree {R.top_degree}")
    tab = R.table(a.degree, b.degree)
    k = R.coeffs
    out = [k.zero()] * R.rank(d)
    for i, x in enumerate(a.coords):
        if not x:
            continue
        for j, y in enumerate(b.coords):
            if not y:
                continue
            xy = x * y
            for t, c in enumerate(tab[i][j]):
                if c:
                    out[t] += xy * c
    return Element(R, d, tuple(k.reduce(v) for v in out))


def scale_add(c1, a: Element, c2, b: Element) -> Element:
    """Exact linear combination ``c1*a + c2*b`` of same-degree elements."""
    _same_ring(a, b)
    if a.degree != b.degree:
        raise DegreeError(f"cannot add degree {a.degree} to degree {b.degree}")
    k = a.ring.coeffs
    c1, c2 = k(c1), k(c2)
    return Element(a.ring, a.degree, tuple(k.reduce(c1 * x + c2 * y) for x, y in zip(a.coords, b.coords)))


@dataclass(frozen=True)
class Violation:
    law: str
    degrees: tuple
    indices: tuple
    lhs: tuple
    rhs: tuple

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "degrees": list(self.degrees),
            "indices": list(self.indices),
            "lhs": [format_scalar(x) for x in self.lhs],
            "rhs": [format_scalar(x) for x in self.rhs],
        }


def validate_ring(R: GradedRing) -> list[Violation]:
    """Check unit law, graded commutativity and associativity on basis elements.

    Commutativity is reported once per unordered basis pair, associativity
    once per ordered triple.
    """
    out: list[Violation] = []
    n = R.top_degree
    if R.has_unit:
        one = R.unit()
        for d in range(n + 1):
            for i, a in enumerate(R.basis_elements(d)):
                for law, val in (("unit-left", cup(one, a)), ("unit-right", cup(a, one))):
                    if val != a:
                        out.append(Violation(law, (d,), (i,), val.coords, a.coords))
    char2 = R.coeffs.kind == "F" and R.coeffs.p == 2
    for p in range(n + 1):
        for q in range(p, n + 1 - p):
            sign = 1 if char2 else (-1) ** (p * q)
            for i, a in enumerate(R.basis_elements(p)):
                for j, b in enumerate(R.basis_elements(q)):
                    if p == q and j < i:
                        continue
                    ab, ba = cup(a, b), cup(b, a)
                    if ab != ba * sign:
                        out.append(Violation("graded-commutativity", (p, q), (i, j), ab.coords, (ba * sign).coords))
    for p, q, r in itertools.product(range(n + 1), repeat=3):
        if p + q + r > n:
            continue
        for (i, a), (j, b), (k, c) in itertools.product(
            enumerate(R.basis_elements(p)), enumerate(R.basis_elements(q)), enumerate(R.basis_elements(r))
        ):
            left, right = cup(cup(a, b), c), cup(a, cup(b, c))
            if left != right:
                out.append(Violation("associativity", (p, q, r), (i, j, k), left.coords, right.coords))
    return out


# built-in rings ---------------------------------------------------------------


def _tables_from_products(ranks, products, coeffs):
    """``products[(p, i, q, j)] = {k: c}`` -> dense tables."""
    n = len(ranks) - 1
    tables = {}
    given = {(p, q) for (p, _, q, _) in products}
    for p in range(n + 1):
        for q in range(n + 1 - p):
            if (p == 0 or q == 0) and (p, q) not in given:
                continue  # let GradedRing supply the unit action
            t = [[[0] * ranks[p + q] for _ in range(ranks[q])] for _ in range(ranks[p])]
            for i in range(ranks[p]):
                for j in range(ranks[q]):
                    for k, c in products.get((p, i, q, j), {}).items():
                        t[i][j][k] = c
            tables[(p, q)] = t
    return tables


def sphere_ring(n: int, coeffs: CoeffSystem = ZZ) -> GradedRing:
    if n < 1:
        raise InputError("sphere dimension must be positive")
    ranks = [1] + [0] * (n - 1) + [1]
    return GradedRing(n, ranks, None, coeffs, f"S^{n}", basis_names={0: ["1"], n: ["s"]})


def _perm_sign(seq) -> int:
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def exterior_ring(n: int, coeffs: CoeffSystem = ZZ, name: Optional[str] = None) -> GradedRing:
    """Cohomology of the n-torus: exterior algebra on n degree-1 generators."""
    subsets = {d: list(itertools.combinations(range(n), d)) for d in range(n + 1)}
    index = {d: {s: i for i, s in enumerate(subsets[d])} for d in subsets}
    ranks = [len(subsets[d]) for d in range(n + 1)]
    products = {}
    for p in range(n + 1):
        for q in range(n + 1 - p):
            for i, S in enumerate(subsets[p]):
                for j, T in enumerate(subsets[q]):
                    if set(S) & set(T):
                        continue
                    U = tuple(sorted(S + T))
                    products[(p, i, q, j)] = {index[p + q][U]: _perm_sign(S + T)}
    names = {d: ["1" if not s else "".join(f"t{k + 1}" for k in s) for s in subsets[d]] for d in subsets}
    return GradedRing(n, ranks, _tables_from_products(ranks, products, ZZ), coeffs, name or f"T^{n}", basis_names=names)


def surface_ring(genus: int, coeffs: CoeffSystem = ZZ) -> GradedRing:
    """Closed orientable surface: a_i b_i = top = -b_i a_i, all other degree-1 products vanish."""
    if genus < 0:
        raise InputError("genus must be nonnegative")
    if genus == 0:
        return sphere_ring(2, coeffs)
    g = genus
    ranks = [1, 2 * g, 1]
    products = {}
    for i in range(g):
        products[(1, i, 1, g + i)] = {0: 1}
        products[(1, g + i, 1, i)] = {0: -1}
    names = {0: ["1"], 1: [f"a{i + 1}" for i in range(g)] + [f"b{i + 1}" for i in range(g)], 2: ["top"]}
    return GradedRing(2, ranks, _tables_from_products(ranks, products, ZZ), coeffs, f"Sigma_{g}", basis_names=names)


def projective_plane_ring(coeffs: CoeffSystem = GF2) -> GradedRing:
    """H^*(RP^2; F_2) = F_2[a]/(a^3)."""
    if coeffs != GF2:
        raise InputError("RP^2 is only modelled with F_2 coefficients (torsion is not represented over Z)")
    products = {(1, 0, 1, 0): {0: 1}}
    ranks = [1, 1, 1]
    return GradedRing(2, ranks, _tables_from_products(ranks, products, ZZ), coeffs, "RP^2",
                      basis_names={0: ["1"], 1: ["a"], 2: ["a^2"]})


def complex_projective_ring(n: int, coeffs: CoeffSystem = ZZ) -> GradedRing:
    """H^*(CP^n) = Z[h]/(h^{n+1}), h in degree 2."""
    top = 2 * n
    ranks = [1 if d % 2 == 0 else 0 for d in range(top + 1)]
    products = {}
    for p in range(0, top + 1, 2):
        for q in range(0, top + 1 - p, 2):
            products[(p, 0, q, 0)] = {0: 1}
    names = {2 * i: ["1" if i == 0 else ("h" if i == 1 else f"h^{i}")] for i in range(n + 1)}
    return GradedRing(top, ranks, _tables_from_products(ranks, products, ZZ), coeffs, f"CP^{n}", basis_names=names)


def compact_support_euclidean_ring(m: int, coeffs: CoeffSystem = ZZ) -> GradedRing:
    """H_c^*(R^m): a single class in degree m and no unit."""
    ranks = [0] * m + [1]
    return GradedRing(m, ranks, None, coeffs, f"R^{m}_c", has_unit=False, basis_names={m: ["u"]})


def tensor_ring(A: GradedRing, B: GradedRing) -> GradedRing:
    """Kuenneth product ring with the Koszul sign (a x b)(a' x b') = (-1)^{|b||a'|} aa' x bb'."""
    if A.coeffs != B.coeffs:
        raise InputError("tensor of rings over different coefficients")
    n = A.top_degree + B.top_degree
    basis = {d: [] for d in range(n + 1)}
    for p in range(A.top_degree + 1):
        for q in range(B.top_degree + 1):
            for i in range(A.rank(p)):
                for j in range(B.rank(q)):
                    basis[p + q].append((p, i, q, j))
    index = {d: {b: k for k, b in enumerate(basis[d])} for d in basis}
    ranks = [len(basis[d]) for d in range(n + 1)]
    products = {}
    for d1 in range(n + 1):
        for d2 in range(n + 1 - d1):
            for k1, (p1, i1, q1, j1) in enumerate(basis[d1]):
                for k2, (p2, i2, q2, j2) in enumerate(basis[d2]):
                    if p1 + p2 > A.top_degree or q1 + q2 > B.top_degree:
                        continue
                    ta = A.table(p1, p2)[i1][i2]
                    tb = B.table(q1, q2)[j1][j2]
                    sign = -1 if (q1 * p2) % 2 else 1
                    acc = {}
                    for ia, ca in enumerate(ta):
                        if not ca:
                            continue
                        for ib, cb in enumerate(tb):
                            if cb:
                                t = index[d1 + d2][(p1 + p2, ia, q1 + q2, ib)]
                                acc[t] = acc.get(t, 0) + sign * ca * cb
                    if acc:
                        products[(d1, k1, d2, k2)] = acc
    names = {
        d: [f"{A.basis_label(p, i)}x{B.basis_label(q, j)}" for (p, i, q, j) in basis[d]] for d in basis
    }
    tables = _tables_from_products(ranks, products, ZZ)
    return GradedRing(n, ranks, tables, A.coeffs, f"{A.name}x{B.name}", basis_names=names)
