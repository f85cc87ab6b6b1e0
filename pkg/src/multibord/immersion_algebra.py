"""Multiple-point classes of an immersion from cohomological data.

An :class:`ImmersionAlgebraic` packages f^*, f_* and the normal Euler class of
an immersion ``f: V^n -> M^m``.  The Gysin map is derived as
``f_! = pd_M o f_* o gamma_V``.  From these the module computes

* ``phi(a, k) = f^* f_!(a) - k * e cup a``,
* ``(k-1)! v_k = phi_{k-1} o ... o phi_1(1_V)`` and ``k! m_k = f_!((k-1)! v_k)``,
* the recursion ``v_k = f^*(m_{k-1}) - e cup v_{k-1}`` with ``m_k = f_!(v_k) / k``.

Classes whose degree exceeds the source (or target) dimension are returned as
zero-by-dimension elements (``Element.beyond_top``) instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import DegreeError, InputError
from .exact_linalg import GF2, QQ, ZZ, CoeffSystem, ExactMatrix, format_scalar
from .graded_algebra import Element
from .manifold_model import HomologyElement, ManifoldModel, gamma, pd

__all__ = [
    "ImmersionAlgebraic",
    "MultiPointClasses",
    "pullback",
    "pushforward",
    "gysin_shriek",
    "phi",
    "vk_scaled",
    "mk_scaled",
    "herbert_step",
    "herbert_chain",
    "multipoint_classes",
    "rational_consistency",
    "euler_from_double_class",
    "projection_formula_check",
]


class ImmersionAlgebraic:
    def __init__(
        self,
        source: ManifoldModel,
        target: ManifoldModel,
        pullback: Mapping[int, ExactMatrix],
        pushforward: Mapping[int, ExactMatrix],
        euler: Element,
        shriek: Optional[Mapping[int, ExactMatrix]] = None,
        name: str = "",
        unoriented_extension: bool = False,
    ):
        self.source = source
        self.target = target
        self.name = name
        self.n = source.dim
        self.m = target.dim
        self.codim = self.m - self.n
        self.coeffs = source.coeffs
        self.unoriented_extension = unoriented_extension
        if target.coeffs != self.coeffs:
            raise InputError("source and target use different coefficients")
        if self.codim <= 0:
            raise DegreeError(f"codimension must be positive, got {self.codim}")
        if source.euclidean:
            raise InputError("the source of an immersion must be closed")
        if self.coeffs.kind == "F":
            if self.codim % 2 and not unoriented_extension:
                raise DegreeError(
                    "odd codimension over F_p is only accepted as a flagged unoriented extension"
                )
        else:
            if self.codim % 2:
                raise DegreeError(f"Z/Q coefficients need even codimension, got m-n = {self.codim}")
            if not (source.oriented and target.oriented):
                raise DegreeError("Z/Q coefficients need oriented source and target")

        k = self.coeffs
        self.pullback_matrices = {}
        for d in range(self.n + 1):
            shape = (source.ring.rank(d), target.ring.rank(d))
            M = pullback.get(d)
            if M is None and d == 0 and shape == (1, 1):
                M = ExactMatrix.identity(1, k)  # connected: 1_M -> 1_V
            M = ExactMatrix.zeros(*shape, k) if M is None else M.change_ring(k) if M.coeffs != k else M
            if M.shape != shape:
                raise InputError(f"pullback in degree {d} must be {shape[0]}x{shape[1]}, got {M.shape}")
            self.pullback_matrices[d] = M
        self.pushforward_matrices = {}
        for d in range(self.n + 1):
            shape = (target.homology_rank(d), source.homology_rank(d))
            M = pushforward.get(d)
            if M is None and d == 0 and shape == (1, 1):
                M = ExactMatrix.identity(1, k)  # point goes to point
            M = ExactMatrix.zeros(*shape, k) if M is None else M.change_ring(k) if M.coeffs != k else M
            if M.shape != shape:
                raise InputError(f"pushforward in degree {d} must be {shape[0]}x{shape[1]}, got {M.shape}")
            self.pushforward_matrices[d] = M
        self.shriek_override = None
        if shriek is not None:
            self.shriek_override = {}
            for d in range(self.n + 1):
                shape = (target.ring.rank(d + self.codim), source.ring.rank(d))
                M = shriek.get(d)
                M = ExactMatrix.zeros(*shape, k) if M is None else M.change_ring(k) if M.coeffs != k else M
                if M.shape != shape:
                    raise InputError(f"shriek override in degree {d} must be {shape[0]}x{shape[1]}")
                self.shriek_override[d] = M
        if euler.ring is not source.ring and euler.ring != source.ring:
            raise InputError("Euler class must live in the source ring")
        if euler.degree != self.codim:
            raise DegreeError(f"Euler class has degree {euler.degree}, expected {self.codim}")
        self.euler = Element(source.ring, euler.degree, euler.coords)
        self._check_ring_map()

    def _check_ring_map(self):
        S, T = self.source.ring, self.target.ring
        if T.has_unit and pullback(self, T.unit()) != S.unit():
            raise InputError(f"{self.name}: pullback does not send 1_M to 1_V")
        for p in range(self.n + 1):
            for q in range(self.n + 1 - p):
                for a in T.basis_elements(p):
                    for b in T.basis_elements(q):
                        if p + q > T.top_degree:
                            continue
                        lhs = pullback(self, a.cup(b))
                        rhs = pullback(self, a).cup(pullback(self, b))
                        if lhs != rhs:
                            raise InputError(f"{self.name}: pullback is not multiplicative in degrees ({p},{q})")

    @property
    def mode(self) -> str:
        return self.coeffs.name

    def with_coeffs(self, coeffs: CoeffSystem) -> "ImmersionAlgebraic":
        if coeffs == self.coeffs:
            return self
        S, T = self.source.with_coeffs(coeffs), self.target.with_coeffs(coeffs)
        return ImmersionAlgebraic(
            S, T,
            {d: M.change_ring(coeffs) for d, M in self.pullback_matrices.items()},
            {d: M.change_ring(coeffs) for d, M in self.pushforward_matrices.items()},
            S.ring.element(self.euler.degree, self.euler.coords),
            None if self.shriek_override is None else {d: M.change_ring(coeffs) for d, M in self.shriek_override.items()},
            self.name, self.unoriented_extension,
        )

    def __repr__(self):
        return f"ImmersionAlgebraic({self.name or '?'}: {self.source.name} -> {self.target.name}, {self.mode})"


def _source_element(F: ImmersionAlgebraic, a: Element):
    if a.ring is not F.source.ring and a.ring != F.source.ring:
        raise InputError("element does not live on the source manifold")


def pullback(F: ImmersionAlgebraic, b: Element) -> Element:
    """f^*: H^q(M) -> H^q(V); zero by dimension when q > n."""
    if b.degree > F.n:
        return F.source.ring.zero(b.degree)
    return Element(F.source.ring, b.degree, F.pullback_matrices[b.degree].apply(b.coords))


def pushforward(F: ImmersionAlgebraic, x: HomologyElement) -> HomologyElement:
    return HomologyElement(F.target, x.degree, F.pushforward_matrices[x.degree].apply(x.coords))


def _derived_shriek(F: ImmersionAlgebraic, a: Element) -> Element:
    y = pushforward(F, gamma(F.source, a))
    return pd(F.target, y)


def gysin_shriek(F: ImmersionAlgebraic, a: Element) -> Element:
    """f_! = pd_M o f_* o gamma_V, raising degree by m - n."""
    _source_element(F, a)
    if a.beyond_top:
        raise DegreeError(f"degree {a.degree} exceeds source dimension {F.n}")
    if F.shriek_override is not None:
        M = F.shriek_override[a.degree]
        return Element(F.target.ring, a.degree + F.codim, M.apply(a.coords))
    return _derived_shriek(F, a)


def phi(F: ImmersionAlgebraic, a: Element, k: int) -> Element:
    """f^* f_!(a) - k * (e cup a)."""
    _source_element(F, a)
    if a.degree + F.codim > F.n:
        raise DegreeError(f"phi of a degree-{a.degree} class overflows dimension {F.n}")
    return pullback(F, gysin_shriek(F, a)) - F.euler.cup(a) * k


def vk_scaled(F: ImmersionAlgebraic, k: int) -> Element:
    """(k-1)! * v_k, as the composite phi_{k-1} o ... o phi_1 applied to 1_V."""
    if k < 1:
        raise DegreeError("multiplicity must be positive")
    deg = (k - 1) * F.codim
    if deg > F.n:
        return F.source.ring.zero(deg)
    a = F.source.ring.unit()
    for j in range(1, k):
        a = phi(F, a, j)
    return a


def mk_scaled(F: ImmersionAlgebraic, k: int) -> Element:
    """k! * m_k = f_!((k-1)! * v_k), in compactly supported cohomology for R^m."""
    v = vk_scaled(F, k)
    if v.beyond_top:
        return F.target.ring.zero(k * F.codim)
    return gysin_shriek(F, v)


def herbert_step(F: ImmersionAlgebraic, v_prev: Element, m_prev: Element) -> Element:
    """v_k = f^*(m_{k-1}) - e cup v_{k-1}."""
    if m_prev.degree != v_prev.degree + F.codim:
        raise DegreeError(
            f"inconsistent degrees: m_prev has {m_prev.degree}, v_prev has {v_prev.degree}, codim {F.codim}"
        )
    deg = m_prev.degree
    if deg > F.n:
        return F.source.ring.zero(deg)
    return pullback(F, m_prev) - F.euler.cup(v_prev)


@dataclass
class MultiPointClasses:
    k: int
    v_scaled: Element
    m_scaled: Element
    v: Optional[Element] = None
    m: Optional[Element] = None

    def to_json(self) -> dict:
        def enc(x):
            if x is None:
                return None
            out = x.to_json()
            out["zero_by_dimension"] = x.beyond_top
            return out

        return {"k": self.k, "v_scaled": enc(self.v_scaled), "m_scaled": enc(self.m_scaled), "v": enc(self.v), "m": enc(self.m)}


def herbert_chain(F: ImmersionAlgebraic, k_max: int) -> list[tuple[Element, Optional[Element]]]:
    """``[(v_1, m_1), ..., (v_kmax, m_kmax)]`` from the recursion.

    ``m_k = f_!(v_k) / k`` needs ``k`` invertible; over Z the division must be
    exact.  When it is not possible and the target group is nonzero, ``m_k``
    is ``None`` and the chain stops there.
    """
    k_field = F.coeffs
    v = F.source.ring.unit()
    chain = []
    for k in range(1, k_max + 1):
        if k > 1:
            prev_v, prev_m = chain[-1]
            if prev_m is None:
                break
            if prev_v.beyond_top:
                v = F.source.ring.zero(prev_m.degree)
            else:
                v = herbert_step(F, prev_v, prev_m)
        m = _divided_shriek(F, v, k)
        chain.append((v, m))
    return chain


def _divided_shriek(F: ImmersionAlgebraic, v: Element, k: int) -> Optional[Element]:
    deg = v.degree + F.codim
    if v.beyond_top or deg > F.m:
        return F.target.ring.zero(deg)
    fv = gysin_shriek(F, v)
    if F.target.ring.rank(deg) == 0:
        return fv
    kc = F.coeffs
    if kc.kind == "Z":
        if any(c % k for c in fv.coords):
            return None
        return Element(F.target.ring, deg, tuple(c // k for c in fv.coords))
    if not kc.is_unit(kc(k)):
        return None
    return fv * kc.inverse(kc(k))


def multipoint_classes(F: ImmersionAlgebraic, k: int) -> MultiPointClasses:
    """Scaled classes, plus the unscaled ones where the recursion determines them."""
    out = MultiPointClasses(k, vk_scaled(F, k), mk_scaled(F, k))
    chain = herbert_chain(F, k)
    if len(chain) == k:
        out.v, out.m = chain[-1]
    return out


def rational_consistency(F: ImmersionAlgebraic, k_max: int = 4) -> dict:
    """Compare the Herbert recursion with the phi-composite, degree by degree.

    Integral data is tensored with Q.  Over F_p only multiplicities with
    ``(k-1)!`` invertible can be compared; the rest are listed as skipped.
    """
    G = F.with_coeffs(QQ) if F.coeffs == ZZ else F
    kc = G.coeffs
    chain = herbert_chain(G, k_max)
    checked, skipped, violations = [], [], []
    for k in range(1, k_max + 1):
        fact = math.factorial(k - 1)
        if k > len(chain) or not kc.is_unit(kc(fact)):
            skipped.append(k)
            continue
        v_rec, m_rec = chain[k - 1]
        v_comp = vk_scaled(G, k)
        m_comp = mk_scaled(G, k)
        inv = kc.inverse(kc(fact))
        ok_v = v_rec == (v_comp if v_comp.beyond_top else v_comp * inv)
        ok_m = True
        if m_rec is not None and not m_comp.beyond_top and kc.is_unit(kc(fact * k)):
            ok_m = m_rec == m_comp * kc.inverse(kc(fact * k))
        checked.append(k)
        if not (ok_v and ok_m):
            violations.append(
                {
                    "k": k,
                    "degree": v_rec.degree,
                    "herbert_v": v_rec.to_json(),
                    "composite_v": v_comp.to_json(),
                    "v_agrees": ok_v,
                    "m_agrees": ok_m,
                }
            )
    return {
        "immersion": F.name,
        "mode": kc.name,
        "k_max": k_max,
        "checked": checked,
        "skipped": skipped,
        "violations": violations,
        "passed": not violations,
    }


def euler_from_double_class(F: ImmersionAlgebraic, D: HomologyElement) -> Element:
    """Predicted Euler class f^* f_!(1_V) + (-1)^m pd(D).

    ``D`` is the class i_* Sdf^!(M, s_M) in H_{2n-m}(V).
    """
    if D.degree != 2 * F.n - F.m:
        raise DegreeError(f"double class must have degree {2 * F.n - F.m}, got {D.degree}")
    one = F.source.ring.unit()
    sign = -1 if F.m % 2 else 1
    return pullback(F, gysin_shriek(F, one)) + pd(F.source, D) * sign


def projection_formula_check(F: ImmersionAlgebraic) -> dict:
    """f_!(f^*(b) cup a) == b cup f_!(a) for all basis pairs; also compares a
    supplied Gysin override with the derived map."""
    S, T = F.source.ring, F.target.ring
    violations, pairs = [], 0
    for q in range(T.top_degree + 1):
        for d in range(F.n + 1 - q):
            for j, b in enumerate(T.basis_elements(q)):
                fb = pullback(F, b)
                for i, a in enumerate(S.basis_elements(d)):
                    pairs += 1
                    lhs = gysin_shriek(F, fb.cup(a))
                    rhs = b.cup(gysin_shriek(F, a))
                    if lhs != rhs:
                        violations.append(
                            {"law": "projection", "b": [q, j], "a": [d, i], "lhs": lhs.to_json(), "rhs": rhs.to_json()}
                        )
    if F.shriek_override is not None:
        for d in range(F.n + 1):
            for i, a in enumerate(S.basis_elements(d)):
                pairs += 1
                given = gysin_shriek(F, a)
                derived = _derived_shriek(F, a)
                if given != derived:
                    violations.append(
                        {"law": "shriek-override", "a": [d, i], "lhs": given.to_json(), "rhs": derived.to_json()}
                    )
    return {"immersion": F.name, "mode": F.mode, "pairs_checked": pairs, "violations": violations, "passed": not violations}
