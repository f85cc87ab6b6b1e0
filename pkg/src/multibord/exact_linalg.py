"""Exact linear algebra over the integers, the rationals and prime fields.

Scalars are plain Python ``int`` (integers and prime fields, the latter
kept reduced into ``range(p)``) or ``fractions.Fraction`` (rationals).
Nothing here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import InputError

__all__ = [
    "CoeffSystem",
    "ZZ",
    "QQ",
    "GF2",
    "ExactMatrix",
    "smith_normal_form",
    "solve_linear",
    "kernel_basis",
    "rank",
    "parse_scalar",
    "format_scalar",
]


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def parse_scalar(value) -> Fraction | int:
    """Read an int, a Fraction, or a ``"p/q"`` string."""
    if isinstance(value, bool):
        raise InputError(f"boolean is not a scalar: {value!r}")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational literal {value!r}") from exc
        return q.numerator if q.denominator == 1 else q
    raise InputError(f"not an exact scalar: {value!r}")


def format_scalar(x) -> str:
    q = Fraction(x)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class CoeffSystem:
    """Coefficient ring: ``"Z"``, ``"Q"`` or ``"F"`` with characteristic ``p``."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "F"):
            raise InputError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "F" and not _is_prime(self.p):
            raise InputError(f"prime field needs a prime characteristic, got {self.p}")
        if self.kind != "F" and self.p != 0:
            raise InputError("characteristic is only meaningful for prime fields")

    @classmethod
    def parse(cls, text: str) -> "CoeffSystem":
        t = text.strip().upper()
        if t in ("Z", "INTEGERS"):
            return ZZ
        if t in ("Q", "RATIONALS"):
            return QQ
        if t.startswith("F") or t.startswith("GF") or t.startswith("Z/"):
            digits = t.lstrip("GFZ/")
            if digits.isdigit():
                return cls("F", int(digits))
        raise InputError(f"cannot parse coefficient system {text!r}")

    @property
    def name(self) -> str:
        return f"F{self.p}" if self.kind == "F" else self.kind

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    @property
    def characteristic(self) -> int:
        return self.p

    def __call__(self, value):
        """Coerce ``value`` into this system."""
        x = parse_scalar(value)
        if self.kind == "Q":
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator != 1:
                if self.kind == "Z":
                    raise InputError(f"{x} is not an integer")
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            x = x.numerator
        return x % self.p if self.kind == "F" else x

    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def reduce(self, x):
        return x % self.p if self.kind == "F" else x

    def inverse(self, x):
        if x == 0:
            raise ZeroDivisionError("zero has no inverse")
        if self.kind == "Q":
            return 1 / Fraction(x)
        if self.kind == "F":
            return pow(x, -1, self.p)
        if x in (1, -1):
            return x
        raise ZeroDivisionError(f"{x} is not a unit in Z")

    def is_unit(self, x) -> bool:
        if self.kind == "Z":
            return x in (1, -1)
        return self.reduce(x) != 0

    def to_json(self) -> str:
        return self.name


ZZ = CoeffSystem("Z")
QQ = CoeffSystem("Q")
GF2 = CoeffSystem("F", 2)


class ExactMatrix:
    """Dense exact matrix. Immutable; arithmetic returns new matrices."""

    __slots__ = ("rows", "cols", "coeffs", "_data")

    def __init__(self, data: Iterable[Sequence], coeffs: CoeffSystem = ZZ, cols: Optional[int] = None):
        rows = [tuple(coeffs(x) for x in r) for r in data]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise InputError("ragged matrix rows")
        self.rows = len(rows)
        self.cols = cols
        self.coeffs = coeffs
        self._data = tuple(rows)

    @classmethod
    def _raw(cls, data, coeffs, rows, cols) -> "ExactMatrix":
        m = cls.__new__(cls)
        m.rows, m.cols, m.coeffs = rows, cols, coeffs
        m._data = tuple(tuple(r) for r in data)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int, coeffs: CoeffSystem = ZZ) -> "ExactMatrix":
        z = coeffs.zero()
        return cls._raw([[z] * cols for _ in range(rows)], coeffs, rows, cols)

    @classmethod
    def identity(cls, n: int, coeffs: CoeffSystem = ZZ) -> "ExactMatrix":
        z, o = coeffs.zero(), coeffs.one()
        return cls._raw([[o if i == j else z for j in range(n)] for i in range(n)], coeffs, n, n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int, coeffs: CoeffSystem = ZZ) -> "ExactMatrix":
        return cls([[c[i] for c in columns] for i in range(nrows)], coeffs, cols=len(columns))

    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def tolist(self) -> list[list]:
        return [list(r) for r in self._data]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.shape, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_scalar(x) for x in r) for r in self._data)
        return f"ExactMatrix[{self.coeffs.name}]({self.rows}x{self.cols}: {body})"

    def _check_same(self, other: "ExactMatrix"):
        if self.coeffs != other.coeffs:
            raise InputError("coefficient systems differ")

    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            self._check_same(other)
            if self.cols != other.rows:
                raise InputError(f"shape mismatch {self.shape} @ {other.shape}")
            red = self.coeffs.reduce
            ocols = list(zip(*other._data)) if other.rows else [()] * other.cols
            out = [
                [red(sum(a * b for a, b in zip(r, c))) if r else self.coeffs.zero() for c in ocols]
                for r in self._data
            ]
            return ExactMatrix._raw(out, self.coeffs, self.rows, other.cols)
        return self.apply(other)

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.cols:
            raise InputError(f"vector of length {len(vec)} against {self.rows}x{self.cols} matrix")
        red = self.coeffs.reduce
        z = self.coeffs.zero()
        return tuple(red(sum((a * b for a, b in zip(r, vec)), z)) for r in self._data)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same(other)
        if self.shape != other.shape:
            raise InputError("shape mismatch in addition")
        red = self.coeffs.reduce
        return ExactMatrix._raw(
            [[red(a + b) for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
            self.coeffs, self.rows, self.cols,
        )

    def __neg__(self) -> "ExactMatrix":
        red = self.coeffs.reduce
        return ExactMatrix._raw([[red(-a) for a in r] for r in self._data], self.coeffs, self.rows, self.cols)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def scale(self, c) -> "ExactMatrix":
        c = self.coeffs(c)
        red = self.coeffs.reduce
        return ExactMatrix._raw([[red(c * a) for a in r] for r in self._data], self.coeffs, self.rows, self.cols)

    def transpose(self) -> "ExactMatrix":
        data = [[r[j] for r in self._data] for j in range(self.cols)]
        return ExactMatrix._raw(data, self.coeffs, self.cols, self.rows)

    T = property(transpose)

    def change_ring(self, coeffs: CoeffSystem) -> "ExactMatrix":
        return ExactMatrix(self._data, coeffs, cols=self.cols)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def det(self):
        if self.rows != self.cols:
            raise InputError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return self.coeffs.one()
        if self.coeffs.kind == "Z":
            return _bareiss_det([list(r) for r in self._data])
        a = [list(r) for r in self._data]
        k = self.coeffs
        det = k.one()
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                return k.zero()
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = k.reduce(-det)
            det = k.reduce(det * a[c][c])
            inv = k.inverse(a[c][c])
            for r in range(c + 1, n):
                f = k.reduce(a[r][c] * inv)
                if f:
                    a[r] = [k.reduce(x - f * y) for x, y in zip(a[r], a[c])]
        return det

    def inverse(self) -> "ExactMatrix":
        """Inverse over the coefficient system; over Z only for unimodular input."""
        if self.rows != self.cols:
            raise InputError("inverse of a non-square matrix")
        n = self.rows
        if self.coeffs.kind == "Z":
            d = self.det()
            if d not in (1, -1):
                raise ZeroDivisionError("matrix is not invertible over Z")
            inv_q = ExactMatrix(self._data, QQ).inverse()
            return ExactMatrix([[int(x) for x in r] for r in inv_q._data], ZZ, cols=n)
        k = self.coeffs
        a = [list(r) + [k.one() if i == j else k.zero() for j in range(n)] for i, r in enumerate(self._data)]
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            a[c], a[piv] = a[piv], a[c]
            inv = k.inverse(a[c][c])
            a[c] = [k.reduce(x * inv) for x in a[c]]
            for r in range(n):
                if r != c and a[r][c] != 0:
                    f = a[r][c]
                    a[r] = [k.reduce(x - f * y) for x, y in zip(a[r], a[c])]
        return ExactMatrix._raw([r[n:] for r in a], k, n, n)


def _bareiss_det(a: list[list[int]]) -> int:
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(A: ExactMatrix) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Return ``(U, D, V)`` with ``U @ A @ V == D``, ``D`` diagonal and ``d_i | d_{i+1}``.

    Pivots are chosen as the smallest nonzero magnitude, ties broken by the
    lowest (row, column) index, so the output is reproducible.
    """
    if A.coeffs.kind != "Z":
        raise InputError("Smith normal form is computed over Z only")
    m, n = A.shape
    D = [list(r) for r in A._data]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        D[dst] = [x - q * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x - q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for r in D:
            r[dst] -= q * r[src]
        for r in V:
            r[dst] -= q * r[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = D[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // D[t][t])
                    dirty = dirty or D[i][t] != 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // D[t][t])
                    dirty = dirty or D[t][j] != 0
            if dirty:
                cand = [(abs(D[i][t]), i, t) for i in range(t + 1, m) if D[i][t]]
                cand += [(abs(D[t][j]), t, j) for j in range(t + 1, n) if D[t][j]]
                _, i, j = min(cand)
                if abs(D[i][j]) < abs(D[t][t]):
                    if j == t:
                        swap_rows(t, i)
                    else:
                        swap_cols(t, j)
                continue
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]

    return (
        ExactMatrix._raw(U, ZZ, m, m),
        ExactMatrix._raw(D, ZZ, m, n),
        ExactMatrix._raw(V, ZZ, n, n),
    )


def _rref(A: ExactMatrix, extra: Optional[list] = None):
    """Row-reduce over a field. Returns (rows, pivot_columns)."""
    k = A.coeffs
    a = [list(r) + ([extra[i]] if extra is not None else []) for i, r in enumerate(A._data)]
    pivots = []
    r = 0
    for c in range(A.cols):
        piv = next((i for i in range(r, A.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = k.inverse(a[r][c])
        a[r] = [k.reduce(x * inv) for x in a[r]]
        for i in range(A.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [k.reduce(x - f * y) for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == A.rows:
            break
    return a, pivots


def rank(A: ExactMatrix) -> int:
    if A.coeffs.kind == "Z":
        return rank(A.change_ring(QQ))
    return len(_rref(A)[1])


def solve_linear(A: ExactMatrix, b: Sequence) -> Optional[tuple]:
    """Some ``x`` with ``A x = b`` over ``A.coeffs``, or ``None`` if there is none."""
    if len(b) != A.rows:
        raise InputError(f"right-hand side has length {len(b)}, matrix has {A.rows} rows")
    k = A.coeffs
    b = [k(x) for x in b]
    if k.kind == "Z":
        U, D, V = smith_normal_form(A)
        c = U.apply(b)
        y = []
        for i in range(A.cols):
            d = D[i, i] if i < A.rows else 0
            ci = c[i] if i < A.rows else 0
            if d == 0:
                y.append(0)
            elif ci % d:
                return None
            else:
                y.append(ci // d)
        r = sum(1 for i in range(min(A.rows, A.cols)) if D[i, i] != 0)
        if any(c[i] != 0 for i in range(r, A.rows)):
            return None
        return V.apply(y)
    a, pivots = _rref(A, b)
    for i in range(len(pivots), A.rows):
        if a[i][-1] != 0:
            return None
    x = [k.zero()] * A.cols
    for i, c in enumerate(pivots):
        x[c] = a[i][-1]
    return tuple(x)


def kernel_basis(A: ExactMatrix) -> list[tuple]:
    """A basis of ``ker A``; over Z a lattice basis of the integer kernel."""
    k = A.coeffs
    if k.kind == "Z":
        _, D, V = smith_normal_form(A)
        r = sum(1 for i in range(min(A.rows, A.cols)) if D[i, i] != 0)
        return [V.column(j) for j in range(r, A.cols)]
    a, pivots = _rref(A)
    free = [c for c in range(A.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [k.zero()] * A.cols
        v[f] = k.one()
        for i, c in enumerate(pivots):
            v[c] = k.reduce(-a[i][f])
        basis.append(tuple(v))
    return basis
