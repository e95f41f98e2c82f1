"""Truncated polynomials with exponents in (1/p^h)Z and a ramified uniformizer.

A ``FracPoly`` lives at a level h. Each term is keyed by ``(nums, eps)`` where
``nums[j] / p^h`` is the exponent of variable j and ``eps / p^h`` (in [0, 1)) is
the exponent of the uniformizer u = p^(1/p^h). Since u^(p^h) = p, overflow in
the slot is folded into the coefficient. Terms of total variable degree above
the cap are discarded and the result is flagged.

``CharPPoly`` is the characteristic-p analogue, where the slot becomes an
honest variable t whose exponent is bounded by the ring's ``t_limit``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .errors import RamifiedInput
from .exactnum import DEFAULT_PRECISION, PAdicScalar, valuation


class CapOverflowWarning(UserWarning):
    """Terms beyond the truncation degree were discarded."""


class FracExponent(NamedTuple):
    nums: tuple
    slot: int
    level: int

    def as_fractions(self, p: int):
        d = p ** self.level
        return tuple(Fraction(a, d) for a in self.nums), Fraction(self.slot, d)

    def degree(self, p: int) -> Fraction:
        return Fraction(sum(self.nums), p ** self.level)


def _format_exp(num: int, den: int) -> str:
    e = Fraction(num, den)
    if e == 1:
        return ""
    if e.denominator == 1:
        return f"^{e.numerator}"
    return f"^({e.numerator}/{e.denominator})"


def render_monomial(nums, slot, level, p, names, slot_name="p") -> str:
    """Canonical text of a monomial: slot first, then variables by index."""
    d = p ** level
    parts = []
    if slot:
        parts.append(slot_name + _format_exp(slot, d))
    for name, a in zip(names, nums):
        if a:
            parts.append(name + _format_exp(a, d))
    return " * ".join(parts) if parts else "1"


def _order_key(key):
    nums, slot = key
    return (sum(nums), nums, slot)


def render_terms(terms, level, p, names, modulus, slot_name="p", p_symbol=False) -> str:
    """Render a term map with symmetric coefficients in graded-lex descending order.

    With ``p_symbol`` the p-power in each coefficient is written as a power of
    the symbol p (merged with the slot), e.g. ``p * x`` instead of ``2 * x``.
    """
    if not terms:
        return "0"
    out = []
    for key in sorted(terms, key=_order_key, reverse=True):
        c = terms[key] % modulus
        slot = key[1]
        if p_symbol and c:
            while c % p == 0:
                c //= p
                slot += p ** level
        if c > modulus // 2:
            c -= modulus
        mono = render_monomial(key[0], slot, level, p, names, slot_name)
        a = abs(c)
        if mono == "1":
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a} * {mono}"
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


class FracRing:
    """Ambient ring Z/p^N[x_1..x_d] with fractional exponents, truncated at degree ``cap``."""

    def __init__(self, p: int, names, cap: int, precision: int = DEFAULT_PRECISION):
        self.p = p
        self.names = tuple(names)
        self.cap = cap
        self.precision = precision
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def __eq__(self, other):
        return (
            isinstance(other, FracRing)
            and (self.p, self.names, self.cap) == (other.p, other.names, other.cap)
        )

    def __hash__(self):
        return hash((self.p, self.names, self.cap))

    def __repr__(self):
        return f"FracRing(p={self.p}, vars={list(self.names)}, cap={self.cap}, N={self.precision})"

    def index(self, name) -> int:
        if isinstance(name, int):
            return name
        return self.names.index(name)

    def zero(self, level: int = 0, precision: int | None = None) -> "FracPoly":
        return FracPoly(self, level, precision or self.precision, {})

    def const(self, c: int, level: int = 0, precision: int | None = None) -> "FracPoly":
        return FracPoly(self, level, precision or self.precision, {(self._zero_nums(), 0): c})

    def one(self, level: int = 0) -> "FracPoly":
        return self.const(1, level)

    def _zero_nums(self):
        return (0,) * self.nvars

    def monomial(self, nums, eps: int = 0, level: int = 0, coeff: int = 1,
                 precision: int | None = None) -> "FracPoly":
        return FracPoly(self, level, precision or self.precision, {(tuple(nums), eps): coeff})

    def var(self, name, level: int = 0) -> "FracPoly":
        """The variable x_j itself, expressed at ``level``."""
        nums = [0] * self.nvars
        nums[self.index(name)] = self.p ** level
        return self.monomial(nums, level=level)

    def root_var(self, name, level: int) -> "FracPoly":
        """x_j^(1/p^level)."""
        nums = [0] * self.nvars
        nums[self.index(name)] = 1
        return self.monomial(nums, level=level)

    def uniformizer(self, level: int) -> "FracPoly":
        """p^(1/p^level)."""
        return self.monomial(self._zero_nums(), eps=1, level=level)

    def gens(self):
        return [self.var(n) for n in self.names]


class FracPoly:
    """An element of the truncated ramified ring at a fixed level.

    Precision is uniform over the element; ``cap_overflow`` records whether
    any term was discarded by truncation while producing it.
    """

    __slots__ = ("ring", "level", "precision", "terms", "cap_overflow")

    def __init__(self, ring: FracRing, level: int, precision: int, terms, cap_overflow: bool = False):
        if precision < 1:
            raise ValueError("precision must be at least 1")
        self.ring = ring
        self.level = level
        self.precision = precision
        p = ring.p
        q = p ** precision
        P = p ** level
        limit = ring.cap * P
        clean = {}
        for (nums, eps), c in terms.items():
            nums = tuple(nums)
            if eps >= P:
                k, eps = divmod(eps, P)
                c = c * p ** k
            c %= q
            if not c:
                continue
            if sum(nums) > limit:
                cap_overflow = True
                continue
            key = (nums, eps)
            clean[key] = (clean.get(key, 0) + c) % q
            if not clean[key]:
                del clean[key]
        self.terms = clean
        self.cap_overflow = cap_overflow

    # --- basic structure -------------------------------------------------
    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def modulus(self) -> int:
        return self.ring.p ** self.precision

    def is_zero(self) -> bool:
        return not self.terms

    def is_ramified(self) -> bool:
        return any(eps for (_, eps) in self.terms)

    def degree(self) -> Fraction:
        if not self.terms:
            return Fraction(-1)
        return max(Fraction(sum(n), self.p ** self.level) for (n, _) in self.terms)

    def exponents(self):
        return [FracExponent(n, e, self.level) for (n, e) in self.terms]

    def coefficient(self, nums, eps: int = 0) -> PAdicScalar:
        return PAdicScalar(self.terms.get((tuple(nums), eps), 0), self.precision, self.p)

    def copy_with(self, terms=None, level=None, precision=None, cap_overflow=None) -> "FracPoly":
        return FracPoly(
            self.ring,
            self.level if level is None else level,
            self.precision if precision is None else precision,
            self.terms if terms is None else terms,
            self.cap_overflow if cap_overflow is None else cap_overflow,
        )

    def lift(self, level: int) -> "FracPoly":
        """The same element expressed at a higher level."""
        if level < self.level:
            raise ValueError("cannot lift to a lower level")
        if level == self.level:
            return self
        s = self.p ** (level - self.level)
        terms = {(tuple(a * s for a in n), e * s): c for (n, e), c in self.terms.items()}
        return FracPoly(self.ring, level, self.precision, terms, self.cap_overflow)

    def normalized(self) -> "FracPoly":
        """Re-express at the smallest level that holds all exponents."""
        f = self
        p = self.p
        while f.level > 0 and all(
            e % p == 0 and all(a % p == 0 for a in n) for (n, e) in f.terms
        ):
            terms = {(tuple(a // p for a in n), e // p): c for (n, e), c in f.terms.items()}
            f = FracPoly(f.ring, f.level - 1, f.precision, terms, f.cap_overflow)
        return f

    def with_precision(self, precision: int) -> "FracPoly":
        return FracPoly(self.ring, self.level, precision, self.terms, self.cap_overflow)

    # --- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, FracPoly):
            if other.ring != self.ring:
                raise ValueError("polynomials over different rings")
            return other
        if isinstance(other, int):
            return self.ring.const(other, self.level, self.precision)
        if isinstance(other, PAdicScalar):
            return self.ring.const(other.residue, self.level, other.precision)
        return NotImplemented

    def _unify(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        h = max(self.level, other.level)
        return self.lift(h), other.lift(h)

    def __add__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        terms = dict(a.terms)
        for k, c in b.terms.items():
            terms[k] = terms.get(k, 0) + c
        return FracPoly(self.ring, a.level, min(a.precision, b.precision), terms,
                        a.cap_overflow or b.cap_overflow)

    __radd__ = __add__

    def __neg__(self):
        return FracPoly(self.ring, self.level, self.precision,
                        {k: -c for k, c in self.terms.items()}, self.cap_overflow)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        p = self.p
        P = p ** a.level
        limit = self.ring.cap * P
        prec = min(a.precision, b.precision)
        q = p ** prec
        out = {}
        overflow = a.cap_overflow or b.cap_overflow
        for (n1, e1), c1 in a.terms.items():
            d1 = sum(n1)
            for (n2, e2), c2 in b.terms.items():
                if d1 + sum(n2) > limit:
                    overflow = True
                    continue
                e = e1 + e2
                c = c1 * c2
                if e >= P:
                    e -= P
                    c *= p
                key = (tuple(x + y for x, y in zip(n1, n2)), e)
                out[key] = (out.get(key, 0) + c) % q
        return FracPoly(self.ring, a.level, prec, out, overflow)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.ring.const(1, self.level, self.precision)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.const(other, self.level, self.precision)
        if not isinstance(other, FracPoly):
            return NotImplemented
        if other.ring != self.ring:
            return False
        a, b = self._unify(other)
        q = self.p ** min(a.precision, b.precision)
        keys = set(a.terms) | set(b.terms)
        return all((a.terms.get(k, 0) - b.terms.get(k, 0)) % q == 0 for k in keys)

    __hash__ = None

    # --- maps ------------------------------------------------------------
    def frobenius(self) -> "FracPoly":
        return frobenius_substitute(self)

    def divide_by_p(self) -> "FracPoly":
        """Exact division of every coefficient by p, losing one digit."""
        from .errors import NotDivisible, PrecisionExhausted
        if self.precision < 2:
            raise PrecisionExhausted("dividing by p would leave precision 0")
        p = self.p
        terms = {}
        for k, c in self.terms.items():
            if c % p:
                raise NotDivisible(f"coefficient {c} not divisible by {p}")
            terms[k] = c // p
        return FracPoly(self.ring, self.level, self.precision - 1, terms, self.cap_overflow)

    def reduce_mod_p(self, mode: str = "plain") -> "CharPPoly":
        return reduce_mod_p(self, mode)

    def render(self, p_symbol: bool = False) -> str:
        return render_terms(self.terms, self.level, self.p, self.ring.names, self.modulus,
                            p_symbol=p_symbol)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"FracPoly[{self.level}]({self.render()} mod {self.p}^{self.precision})"

    def p_adic_valuation(self) -> int:
        """Minimum coefficient valuation, counting the slot (in units of 1/p^h)."""
        if not self.terms:
            return None
        P = self.p ** self.level
        return min(e + P * valuation(c, self.p) for (_, e), c in self.terms.items())


def frobenius_substitute(f: FracPoly) -> FracPoly:
    """x^e -> x^(pe) on every variable, coefficients fixed."""
    if f.is_ramified():
        raise RamifiedInput("Frobenius substitution is only defined without the ramification slot")
    if f.level >= 1:
        return FracPoly(f.ring, f.level - 1, f.precision, dict(f.terms), f.cap_overflow)
    p = f.p
    terms = {(tuple(a * p for a in n), 0): c for (n, _), c in f.terms.items()}
    return FracPoly(f.ring, 0, f.precision, terms, f.cap_overflow)


class CharPRing:
    """F_p[x_1..x_d] with fractional exponents, optionally with a variable t.

    ``t_limit`` bounds the t exponent: ``None`` means no t at all; with
    ``t_strict`` the power t^t_limit and above vanish, otherwise they survive
    up to and including t_limit.
    """

    def __init__(self, p: int, names, cap: int, t_limit=None, t_strict: bool = False):
        self.p = p
        self.names = tuple(names)
        self.cap = cap
        self.t_limit = None if t_limit is None else Fraction(t_limit)
        self.t_strict = t_strict
        self._tmax = {}

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def has_t(self) -> bool:
        return self.t_limit is not None

    def __eq__(self, other):
        return isinstance(other, CharPRing) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.p, self.names, self.cap, self.t_limit, self.t_strict)

    def __repr__(self):
        t = "" if self.t_limit is None else f", t<{'' if self.t_strict else '='}{self.t_limit}"
        return f"CharPRing(p={self.p}, vars={list(self.names)}, cap={self.cap}{t})"

    def t_max_num(self, level: int):
        """Largest allowed t numerator at ``level`` (numerators over p^level)."""
        top = self._tmax.get(level)
        if top is None:
            if self.t_limit is None:
                top = 0
            else:
                bound = self.t_limit * self.p ** level
                top = int(bound)
                if self.t_strict and top == bound:
                    top -= 1
            self._tmax[level] = top
        return top

    def index(self, name) -> int:
        if isinstance(name, int):
            return name
        return self.names.index(name)

    def zero(self, level: int = 0) -> "CharPPoly":
        return CharPPoly(self, level, {})

    def const(self, c: int, level: int = 0) -> "CharPPoly":
        return CharPPoly(self, level, {((0,) * self.nvars, 0): c})

    def monomial(self, nums, tnum: int = 0, level: int = 0, coeff: int = 1) -> "CharPPoly":
        return CharPPoly(self, level, {(tuple(nums), tnum): coeff})

    def var(self, name, level: int = 0) -> "CharPPoly":
        nums = [0] * self.nvars
        nums[self.index(name)] = self.p ** level
        return self.monomial(nums, level=level)

    def root_var(self, name, level: int) -> "CharPPoly":
        nums = [0] * self.nvars
        nums[self.index(name)] = 1
        return self.monomial(nums, level=level)

    def t_root(self, level: int) -> "CharPPoly":
        """t^(1/p^level)."""
        if not self.has_t:
            raise ValueError("ring has no t variable")
        return self.monomial((0,) * self.nvars, 1, level)


class CharPPoly:
    """An element of a truncated F_p ring at a fixed level."""

    __slots__ = ("ring", "level", "terms", "cap_overflow")

    def __init__(self, ring: CharPRing, level: int, terms, cap_overflow: bool = False):
        self.ring = ring
        self.level = level
        p = ring.p
        limit = ring.cap * p ** level
        tmax = ring.t_max_num(level)
        clean = {}
        for (nums, tn), c in terms.items():
            c %= p
            if not c:
                continue
            if tn > tmax:
                continue
            if sum(nums) > limit:
                cap_overflow = True
                continue
            key = (tuple(nums), tn)
            clean[key] = (clean.get(key, 0) + c) % p
            if not clean[key]:
                del clean[key]
        self.terms = clean
        self.cap_overflow = cap_overflow

    @property
    def p(self) -> int:
        return self.ring.p

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> Fraction:
        if not self.terms:
            return Fraction(-1)
        return max(Fraction(sum(n), self.p ** self.level) for (n, _) in self.terms)

    def lift(self, level: int) -> "CharPPoly":
        if level < self.level:
            raise ValueError("cannot lift to a lower level")
        if level == self.level:
            return self
        s = self.p ** (level - self.level)
        return CharPPoly(self.ring, level,
                         {(tuple(a * s for a in n), t * s): c for (n, t), c in self.terms.items()},
                         self.cap_overflow)

    def normalized(self) -> "CharPPoly":
        f = self
        p = self.p
        while f.level > 0 and all(t % p == 0 and all(a % p == 0 for a in n) for (n, t) in f.terms):
            f = CharPPoly(f.ring, f.level - 1,
                          {(tuple(a // p for a in n), t // p): c for (n, t), c in f.terms.items()},
                          f.cap_overflow)
        return f

    def at_level(self, level: int) -> "CharPPoly":
        """Re-express at ``level``; raises ValueError if an exponent does not fit."""
        if level >= self.level:
            return self.lift(level)
        f = self.normalized()
        if f.level > level:
            raise ValueError(f"element does not live at level {level}")
        return f.lift(level)

    def _coerce(self, other):
        if isinstance(other, CharPPoly):
            if other.ring != self.ring:
                raise ValueError("polynomials over different rings")
            return other
        if isinstance(other, int):
            return self.ring.const(other, self.level)
        return NotImplemented

    def _unify(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        h = max(self.level, other.level)
        return self.lift(h), other.lift(h)

    def __add__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        terms = dict(a.terms)
        for k, c in b.terms.items():
            terms[k] = terms.get(k, 0) + c
        return CharPPoly(self.ring, a.level, terms, a.cap_overflow or b.cap_overflow)

    __radd__ = __add__

    def __neg__(self):
        return CharPPoly(self.ring, self.level, {k: -c for k, c in self.terms.items()},
                         self.cap_overflow)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        p = self.p
        limit = self.ring.cap * p ** a.level
        tmax = self.ring.t_max_num(a.level)
        out = {}
        overflow = a.cap_overflow or b.cap_overflow
        for (n1, t1), c1 in a.terms.items():
            d1 = sum(n1)
            for (n2, t2), c2 in b.terms.items():
                if t1 + t2 > tmax:
                    continue
                if d1 + sum(n2) > limit:
                    overflow = True
                    continue
                key = (tuple(x + y for x, y in zip(n1, n2)), t1 + t2)
                out[key] = (out.get(key, 0) + c1 * c2) % p
        return CharPPoly(self.ring, a.level, out, overflow)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = self.ring.const(1, self.level)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.const(other, self.level)
        if not isinstance(other, CharPPoly):
            return NotImplemented
        if other.ring != self.ring:
            return False
        a, b = self._unify(other)
        return a.terms == b.terms

    __hash__ = None

    def frobenius(self) -> "CharPPoly":
        """The p-th power map: every exponent (t included) multiplied by p."""
        if self.level >= 1:
            return CharPPoly(self.ring, self.level - 1, dict(self.terms), self.cap_overflow)
        p = self.p
        return CharPPoly(self.ring, 0,
                         {(tuple(a * p for a in n), t * p): c for (n, t), c in self.terms.items()},
                         self.cap_overflow)

    def render(self) -> str:
        return render_terms(self.terms, self.level, self.p, self.ring.names, self.p, "t")

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"CharPPoly[{self.level}]({self.render()} over F_{self.p})"


def pth_root_monomialwise(f: CharPPoly) -> CharPPoly:
    """Divide every exponent by p by raising the level; inverse of Frobenius."""
    return CharPPoly(f.ring, f.level + 1, dict(f.terms), f.cap_overflow)


def char_p_ring_for(ring: FracRing, mode: str = "plain") -> CharPRing:
    """The F_p ring receiving ``reduce_mod_p`` in the given mode.

    ``plain`` drops the slot; ``layer`` keeps it as t with t = 0 (the mod-p
    reduction of the ramified layer); ``tilt`` keeps it as t with t-degree
    up to p.
    """
    if mode == "plain":
        return CharPRing(ring.p, ring.names, ring.cap)
    if mode == "layer":
        return CharPRing(ring.p, ring.names, ring.cap, t_limit=1, t_strict=True)
    if mode == "tilt":
        return CharPRing(ring.p, ring.names, ring.cap, t_limit=ring.p)
    raise ValueError(f"unknown reduction mode {mode!r}")


def reduce_mod_p(f: FracPoly, mode: str = "plain") -> CharPPoly:
    """Reduce coefficients mod p. Slot terms vanish in plain mode and become t^eps otherwise."""
    target = char_p_ring_for(f.ring, mode)
    p = f.p
    terms = {}
    for (n, e), c in f.terms.items():
        if e and mode == "plain":
            continue
        terms[(n, e)] = c % p
    return CharPPoly(target, f.level, terms)


def random_poly(ring: FracRing, rng, nterms: int = 4, max_degree: int | None = None,
                precision: int | None = None) -> FracPoly:
    """A seeded random level-0 polynomial with ``nterms`` terms of degree at most ``max_degree``."""
    n = ring.precision if precision is None else precision
    top = ring.cap if max_degree is None else max_degree
    terms = {}
    for _ in range(nterms):
        deg = rng.randint(0, top)
        nums = [0] * ring.nvars
        for _ in range(deg):
            nums[rng.randrange(ring.nvars)] += 1
        key = (tuple(nums), 0)
        terms[key] = (terms.get(key, 0) + rng.randrange(ring.p ** n)) % ring.p ** n
    return FracPoly(ring, 0, n, terms)
