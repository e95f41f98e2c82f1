"""Exact arithmetic in Z/p^N and linear algebra over Z/p^n.

Scalars carry their own precision so that dividing by p (which loses a digit)
is tracked explicitly instead of silently producing garbage in the top digit.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .errors import NotDivisible, NotFinite, PrecisionExhausted

DEFAULT_PRECISION = 6


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def valuation(x: int, p: int, cap: int | None = None) -> int:
    """p-adic valuation of ``x``; returns ``cap`` for zero when given."""
    if x == 0:
        if cap is None:
            raise ValueError("valuation of zero")
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


@dataclass(frozen=True)
class PAdicScalar:
    """An element of Z/p^precision.

    Arithmetic between scalars of different precision truncates to the
    smaller one. Plain ints are promoted at the other operand's precision.
    """

    residue: int
    precision: int
    p: int

    def __post_init__(self):
        if self.precision < 1:
            raise PrecisionExhausted("precision must be at least 1")
        object.__setattr__(self, "residue", self.residue % self.p ** self.precision)

    @property
    def modulus(self) -> int:
        return self.p ** self.precision

    def _coerce(self, other):
        if isinstance(other, PAdicScalar):
            if other.p != self.p:
                raise ValueError("scalars over different primes")
            return other
        if isinstance(other, int):
            return PAdicScalar(other, self.precision, self.p)
        return NotImplemented

    def _combine(self, other, op):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.precision, other.precision)
        return PAdicScalar(op(self.residue, other.residue), prec, self.p)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return PAdicScalar(-self.residue, self.precision, self.p)

    def __pow__(self, k: int):
        return PAdicScalar(pow(self.residue, k, self.modulus), self.precision, self.p)

    def __eq__(self, other):
        if isinstance(other, int):
            return (self.residue - other) % self.modulus == 0
        if isinstance(other, PAdicScalar):
            if other.p != self.p:
                return False
            prec = min(self.precision, other.precision)
            return (self.residue - other.residue) % self.p ** prec == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.precision, self.p))

    def is_zero(self) -> bool:
        return self.residue == 0

    def valuation(self) -> int:
        """Valuation, equal to the precision for zero."""
        return valuation(self.residue, self.p, self.precision)

    def symmetric(self) -> int:
        """Representative in (-p^n/2, p^n/2]."""
        q = self.modulus
        r = self.residue
        return r - q if r > q // 2 else r

    def exact_divide_by_p(self) -> "PAdicScalar":
        return exact_divide_by_p(self)

    def __repr__(self):
        return f"PAdicScalar({self.residue} mod {self.p}^{self.precision})"


def exact_divide_by_p(a: PAdicScalar) -> PAdicScalar:
    """Divide by p, losing one digit of precision."""
    if a.precision <= 1:
        raise PrecisionExhausted("dividing by p would leave precision 0")
    if a.residue % a.p:
        raise NotDivisible(f"{a.residue} is not divisible by {a.p}")
    return PAdicScalar(a.residue // a.p, a.precision - 1, a.p)


@dataclass(frozen=True)
class ZpNMatrix:
    """A matrix over Z/p^precision, stored as a tuple of row tuples."""

    rows: tuple
    p: int
    precision: int
    ncols: int

    @classmethod
    def from_rows(cls, rows, p: int, precision: int, ncols: int | None = None) -> "ZpNMatrix":
        q = p ** precision
        rows = tuple(tuple(int(x) % q for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for an empty matrix")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(rows, p, precision, ncols)

    @property
    def modulus(self) -> int:
        return self.p ** self.precision

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def howell_form(self) -> "ZpNMatrix":
        return howell_form(self)


def howell_form(m: ZpNMatrix) -> ZpNMatrix:
    """Canonical Howell form of the row span."""
    h = kernels.howell([list(r) for r in m.rows], m.p, m.precision) if m.rows else []
    return ZpNMatrix(tuple(tuple(r) for r in h), m.p, m.precision, m.ncols)


def pivot_column(row) -> int:
    for j, x in enumerate(row):
        if x:
            return j
    return -1


def reduce_by_howell(h_rows, v, p: int, n: int):
    """Reduce ``v`` against Howell rows.

    Returns ``(residual, coefficients)`` where ``v - residual`` equals
    the combination ``sum coefficients[i] * h_rows[i]``. The residual is zero
    exactly when ``v`` lies in the span.
    """
    q = p ** n
    v = [x % q for x in v]
    coeffs = [0] * len(h_rows)
    for i, r in enumerate(h_rows):
        c = pivot_column(r)
        pv = r[c]
        y = v[c]
        if y == 0:
            continue
        f = y // pv
        if f:
            coeffs[i] = f
            for j in range(c, len(v)):
                if r[j]:
                    v[j] = (v[j] - f * r[j]) % q
    return v, coeffs


def in_span(h_rows, v, p: int, n: int) -> bool:
    residual, _ = reduce_by_howell(h_rows, v, p, n)
    return not any(residual)


def solve_membership(m: ZpNMatrix, v) -> list[int] | None:
    """Find c with c * M = v over Z/p^n, or None if v is not in the row span."""
    k = m.ncols
    r = m.nrows
    if len(v) != k:
        raise ValueError("vector length does not match the matrix")
    if r == 0:
        return [] if not any(x % m.modulus for x in v) else None
    aug = [list(row) + [1 if i == j else 0 for j in range(r)] for i, row in enumerate(m.rows)]
    h = kernels.howell(aug, m.p, m.precision)
    q = m.modulus
    w = [x % q for x in v] + [0] * r
    for row in h:
        c = pivot_column(row)
        if c >= k:
            break
        y = w[c]
        if y == 0:
            continue
        pv = row[c]
        if y % pv:
            return None
        f = y // pv
        for j in range(c, k + r):
            if row[j]:
                w[j] = (w[j] - f * row[j]) % q
    if any(w[:k]):
        return None
    return [(-x) % q for x in w[k:]]


def smith_exponents(m: ZpNMatrix) -> list[int]:
    """Exponents a_i of the nonzero Smith invariants p^(a_i), in increasing order."""
    p, n, q = m.p, m.precision, m.modulus
    a = [list(r) for r in m.rows]
    rows, cols = len(a), m.ncols
    out = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x:
                    v = valuation(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        a[t], a[i] = a[i], a[t]
        for r in a:
            r[t], r[j] = r[j], r[t]
        pv = p ** v
        inv = pow(a[t][t] // pv, -1, q)
        a[t] = [(x * inv) % q for x in a[t]]
        for i2 in range(rows):
            if i2 != t and a[i2][t]:
                f = a[i2][t] // pv
                a[i2] = [(x - f * y) % q for x, y in zip(a[i2], a[t])]
        for j2 in range(t + 1, cols):
            if a[t][j2]:
                f = a[t][j2] // pv
                for r in a:
                    r[j2] = (r[j2] - f * r[t]) % q
        out.append(v)
        t += 1
    return sorted(out)


def module_length(m: ZpNMatrix, finite_ring: bool = False) -> int:
    """Length of the cokernel (Z/p^n)^k / rowspan(M).

    A column without a Howell pivot contributes a free summand Z/p^n. By
    default that raises NotFinite; pass ``finite_ring=True`` to count it as
    length n, which is the right answer when the ambient ring is Z/p^n itself.
    """
    h = howell_form(m)
    pivots = {}
    for r in h.rows:
        c = pivot_column(r)
        pivots[c] = valuation(r[c], m.p)
    free = m.ncols - len(pivots)
    if free and not finite_ring:
        raise NotFinite(f"{free} free summand(s) of Z/{m.p}^{m.precision}")
    return sum(pivots.values()) + free * m.precision


def solve_or_residual(m: ZpNMatrix, v):
    """Like ``solve_membership`` but reports failures.

    Returns ``(coefficients, None)`` on success and ``(None, column)`` on
    failure, where ``column`` is the first coordinate at which the residual of
    ``v`` against the span is nonzero.
    """
    k = m.ncols
    r = m.nrows
    q = m.modulus
    if r == 0:
        for j, x in enumerate(v):
            if x % q:
                return None, j
        return [], None
    aug = [list(row) + [1 if i == j else 0 for j in range(r)] for i, row in enumerate(m.rows)]
    h = kernels.howell(aug, m.p, m.precision)
    w = [x % q for x in v] + [0] * r
    for row in h:
        c = pivot_column(row)
        if c >= k:
            break
        y = w[c]
        if y == 0:
            continue
        pv = row[c]
        if y % pv:
            return None, c
        f = y // pv
        for j in range(c, k + r):
            if row[j]:
                w[j] = (w[j] - f * row[j]) % q
    for j in range(k):
        if w[j]:
            return None, j
    return [(-x) % q for x in w[k:]], None
