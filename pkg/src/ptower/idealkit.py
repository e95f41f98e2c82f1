"""Ideal operations: phi-powers, phi-stability, sums, products, intersections,
monomial radicals and prime decompositions, and p-torsion of monomial layers.

Monomial questions are decided exactly by exponent arithmetic. Everything
else goes through graded membership on the truncation and is qualified by
the degree window where it is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from . import kernels
from .errors import Mismatch, NotMonomial, NotSquarefree
from .exactnum import valuation
from .fracpoly import FracPoly, FracRing
from .graded import GradedQuotient, induced_kernel

MONOMIAL = "Monomial"
SQUAREFREE = "SquarefreeMonomial"
BINOMIAL = "Binomial"
GENERAL = "General"

_KIND_ORDER = (BINOMIAL, MONOMIAL, GENERAL)


def generator_kind(f: FracPoly) -> str:
    """Monomial, Binomial (p^k (M1 - M2) up to a unit) or General."""
    n = len(f.terms)
    if n <= 1:
        return MONOMIAL
    if n == 2:
        (_, a), (_, b) = f.terms.items()
        if (a + b) % f.modulus == 0:
            return BINOMIAL
    return GENERAL


def p_part(key, coeff, level, p, precision) -> int:
    """Exponent of p in a monomial term, in units of 1/p^level (slot included)."""
    return key[1] + p ** level * valuation(coeff, p, precision)


def _monomial_data(f: FracPoly, level: int):
    """(x numerators, p-part) of a monomial generator at ``level``."""
    g = f.lift(level)
    ((nums, eps), c), = g.terms.items()
    return tuple(nums), p_part((nums, eps), c, level, g.p, g.precision)


def _is_squarefree(f: FracPoly, level: int) -> bool:
    nums, u = _monomial_data(f, level)
    return all(a in (0, 1) for a in nums) and u in (0, 1)


class IdealPresentation:
    """An ideal given by generators, all expressed at a common level."""

    def __init__(self, generators, ring: FracRing | None = None, level: int | None = None):
        gens = [g for g in generators if not g.is_zero()]
        if ring is None:
            if not generators:
                raise ValueError("ring is required for the zero ideal")
            ring = generators[0].ring
        self.ring = ring
        if level is None:
            level = max([g.level for g in gens], default=0)
        self.level = level
        self.generators = tuple(g.lift(level) for g in gens)
        self.kinds = tuple(generator_kind(g) for g in self.generators)
        self.cls = self._classify()

    def _classify(self) -> str:
        kinds = set(self.kinds)
        if kinds <= {MONOMIAL}:
            if all(_is_squarefree(g, self.level) for g in self.generators):
                return SQUAREFREE
            return MONOMIAL
        if kinds <= {MONOMIAL, BINOMIAL}:
            return BINOMIAL
        return GENERAL

    @property
    def p(self) -> int:
        return self.ring.p

    def is_monomial(self) -> bool:
        return self.cls in (MONOMIAL, SQUAREFREE)

    def describe(self) -> str:
        """Per-generator kinds, e.g. ``Binomial+Monomial``."""
        kinds = [k for k in _KIND_ORDER if k in self.kinds]
        return "+".join(kinds) if kinds else MONOMIAL

    def render(self) -> str:
        return "(" + ", ".join(g.render() for g in self.generators) + ")" if self.generators else "(0)"

    def __repr__(self):
        return f"IdealPresentation[{self.level}, {self.cls}]{self.render()}"

    def quotient(self, cap=None, precision=None, extra_lattice=()) -> GradedQuotient:
        cap = self.ring.cap if cap is None else cap
        n = self.ring.precision if precision is None else precision
        if any(g.is_ramified() for g in self.generators):
            return GradedQuotient(self.p, self.ring.nvars, self.level, cap, n,
                                  [dict(g.terms) for g in self.generators], slot="ramified",
                                  extra_lattice=extra_lattice)
        return GradedQuotient(self.p, self.ring.nvars, self.level, cap, n,
                              [dict(g.terms) for g in self.generators], extra_lattice=extra_lattice)

    def contains(self, f: FracPoly, cap=None) -> bool:
        """Membership on the truncation (exact for monomial ideals and homogeneous f)."""
        return self.quotient(cap).contains(f.lift(self.level).terms)


def phi_power(I: IdealPresentation) -> IdealPresentation:
    """The ideal generated by phi of the generators."""
    from .deltaring import phi
    return IdealPresentation([phi(g) for g in I.generators], ring=I.ring)


@dataclass
class Stable:
    window: int | None = None
    exact: bool = True


@dataclass
class NotStable:
    generator: FracPoly
    image: FracPoly
    normal_form: FracPoly
    window: int | None = None


@dataclass
class UnknownBeyond:
    degree: int
    generator: FracPoly | None = None


def _monomial_divides(a, b) -> bool:
    """Does monomial data a = (nums, u) divide b?"""
    return a[1] <= b[1] and all(x <= y for x, y in zip(a[0], b[0]))


def is_phi_stable(I: IdealPresentation, cap=None):
    """Decide phi(I) in I: exactly for monomial ideals, on the window otherwise."""
    from .deltaring import phi
    cap = I.ring.cap if cap is None else cap
    if I.is_monomial():
        data = [_monomial_data(g, I.level) for g in I.generators]
        for g, (nums, u) in zip(I.generators, data):
            img_data = (tuple(I.p * a for a in nums), u)
            if not any(_monomial_divides(d, img_data) for d in data):
                img = phi(g)
                return NotStable(g, img, img, None)
        return Stable(None, True)
    G = I.quotient(cap)
    unknown = None
    for g in I.generators:
        img = phi(g).lift(I.level)
        if img.degree() > cap or img.cap_overflow:
            unknown = unknown or UnknownBeyond(cap, g)
            continue
        if not G.contains(img.terms):
            nf = FracPoly(I.ring, I.level, I.ring.precision, G.normal_form(img.terms))
            return NotStable(g, img, nf, cap)
    if unknown is not None:
        return unknown
    if not G.homogeneous:
        return UnknownBeyond(cap)
    return Stable(cap, False)


def _unify(I: IdealPresentation, J: IdealPresentation):
    if I.ring != J.ring:
        raise ValueError("ideals over different rings")
    h = max(I.level, J.level)
    return h, [g.lift(h) for g in I.generators], [g.lift(h) for g in J.generators]


def _minimalize_monomials(gens, level):
    data = []
    for g in gens:
        d = _monomial_data(g, level)
        if d not in [x[0] for x in data]:
            data.append((d, g))
    keep = []
    for i, (d, g) in enumerate(data):
        if any(j != i and _monomial_divides(e, d) and (e != d) for j, (e, _) in enumerate(data)):
            continue
        keep.append((d, g))
    keep.sort(key=lambda x: (sum(x[0][0]) + x[0][1], tuple(-a for a in x[0][0]), x[0][1]))
    return [g for _, g in keep]


def _monomial_from_data(ring, nums, u, level):
    return ring.monomial(nums, eps=u, level=level)


def ideal_sum(I: IdealPresentation, J: IdealPresentation) -> IdealPresentation:
    h, a, b = _unify(I, J)
    gens = a + b
    if all(generator_kind(g) == MONOMIAL for g in gens):
        gens = _minimalize_monomials(gens, h)
    return IdealPresentation(gens, ring=I.ring, level=h)


def ideal_product(I: IdealPresentation, J: IdealPresentation) -> IdealPresentation:
    h, a, b = _unify(I, J)
    gens = [f * g for f in a for g in b]
    gens = [g for g in gens if not g.is_zero()]
    if all(generator_kind(g) == MONOMIAL for g in gens):
        gens = _minimalize_monomials(gens, h)
    return IdealPresentation(gens, ring=I.ring, level=h)


class TruncatedIdeal(IdealPresentation):
    """An ideal known only up to a degree window."""

    def __init__(self, generators, ring, level, window):
        super().__init__(generators, ring=ring, level=level)
        self.window = window


def ideal_intersection(I: IdealPresentation, J: IdealPresentation, cap=None) -> IdealPresentation:
    """Exact for monomial ideals (pairwise lcm); window-truncated otherwise."""
    h, a, b = _unify(I, J)
    ring = I.ring
    if I.is_monomial() and J.is_monomial():
        gens = []
        for f in a:
            df = _monomial_data(f, h)
            for g in b:
                dg = _monomial_data(g, h)
                nums = tuple(max(x, y) for x, y in zip(df[0], dg[0]))
                u = max(df[1], dg[1])
                gens.append(_monomial_from_data(ring, nums, u, h))
        gens = [g for g in gens if not g.is_zero()]
        return IdealPresentation(_minimalize_monomials(gens, h), ring=ring, level=h)
    cap = ring.cap if cap is None else cap
    Ih = IdealPresentation(a, ring=ring, level=h)
    Jh = IdealPresentation(b, ring=ring, level=h)
    GI = Ih.quotient(cap)
    GJ = Jh.quotient(cap, extra_lattice=GI.lattice_vectors())
    GI = Ih.quotient(cap, extra_lattice=GJ.lattice_vectors())
    gens = []
    p, n = ring.p, ring.precision
    for key in GI.all_keys():
        pa, pb = GI.piece(key), GJ.piece(key)
        if not pa.rows or not pb.rows:
            continue
        m = pa.dim
        rows = [list(r) + list(r) for r in pa.rows] + [list(r) + [0] * m for r in pb.rows]
        for r in kernels.howell(rows, p, n):
            if not any(r[:m]):
                vec = r[m:]
                gens.append(FracPoly(ring, h, n, {GI.termkey(pa.basis[i]): c
                                                 for i, c in enumerate(vec) if c}))
    return TruncatedIdeal(gens, ring, h, cap)


def radical_monomial(I: IdealPresentation) -> IdealPresentation:
    """Replace each generator by the product of its support (p included)."""
    if not I.is_monomial():
        raise NotMonomial(f"radical_monomial needs a monomial ideal, got {I.cls}")
    gens = []
    for g in I.generators:
        nums, u = _monomial_data(g, I.level)
        gens.append(_monomial_from_data(I.ring, tuple(1 if x else 0 for x in nums), 1 if u else 0, I.level))
    return IdealPresentation(_minimalize_monomials(gens, I.level), ring=I.ring, level=I.level)


@dataclass
class PrimeDecomposition:
    """Minimal monomial primes, each a tuple of parameter names (``p`` first)."""

    primes: list

    def render(self) -> str:
        return " ∩ ".join("(" + ", ".join(P) + ")" for P in self.primes) if self.primes else "(1)"

    def ideals(self, ring: FracRing, level: int = 0):
        out = []
        for P in self.primes:
            gens = []
            for name in P:
                if name == "p":
                    gens.append(ring.uniformizer(level))
                else:
                    gens.append(ring.root_var(name, level))
            out.append(IdealPresentation(gens, ring=ring, level=level))
        return out


def _support_sets(I: IdealPresentation):
    sets = []
    for g in I.generators:
        nums, u = _monomial_data(g, I.level)
        s = set()
        if u:
            s.add(0)
        s.update(j + 1 for j, a in enumerate(nums) if a)
        sets.append(frozenset(s))
    return sets


def _minimal_sets(sets):
    sets = set(sets)
    return {s for s in sets if not any(t < s for t in sets)}


def _decompose(gens):
    gens = _minimal_sets(gens)
    if frozenset() in gens:
        return []
    composite = sorted((g for g in gens if len(g) >= 2), key=lambda g: sorted(g))
    if not composite:
        return [frozenset().union(*gens) if gens else frozenset()]
    g = composite[0]
    a = min(g)
    rest = g - {a}
    return _decompose(gens | {frozenset([a])}) + _decompose(gens | {rest})


def prime_decomposition(I: IdealPresentation) -> PrimeDecomposition:
    """Split I = (I, a) + (I, g/a) recursively, then keep only minimal primes."""
    if I.cls != SQUAREFREE:
        raise NotSquarefree(f"prime_decomposition needs a squarefree monomial ideal, got {I.cls}")
    primes = _minimal_sets(_decompose(set(_support_sets(I))))
    names = ("p",) + I.ring.names
    ordered = sorted(primes, key=lambda s: sorted(s))
    return PrimeDecomposition([tuple(names[i] for i in sorted(P)) for P in ordered])


# --- p-torsion ---------------------------------------------------------------

@dataclass
class PTorsion:
    symbolic: IdealPresentation
    numeric_agrees: bool
    annihilated_by_p: bool
    window: int


def torsion_generators(generators, ring, level):
    """y_j = g_j / p^(1/p^level) for the generators carrying the p-slot."""
    out = []
    for g in generators:
        nums, u = _monomial_data(g, level)
        if u == 1:
            out.append(ring.monomial(nums, 0, level))
    return out


def numeric_p_torsion_matches(G: GradedQuotient, expected: GradedQuotient, keys=None):
    """Compare ker(p) on each piece of G with the pieces of ``expected``.

    ``expected`` must be G's presentation with the candidate torsion
    generators and the constant p^(n-1) added. Returns the first disagreeing
    key or None.
    """
    p, n = G.p, G.precision
    for key in (G.all_keys() if keys is None else keys):
        pc = G.piece(key)
        if not pc.dim:
            continue
        images = [{G.termkey(b): p} for b in pc.basis]
        kern = induced_kernel(pc, images, G)
        got = kernels.howell(kern, p, n) if kern else []
        want = expected.piece(key).rows
        if got != want:
            return key
    return None


def p_torsion(layer, cap=None) -> PTorsion:
    """Symbolic p-torsion of a torsion-case layer, checked against ker(p)."""
    ring = layer.ring
    cap = ring.cap if cap is None else cap
    level = layer.level
    p, n = ring.p, ring.precision
    if layer.mode == "TorsionFree":
        sym = IdealPresentation([], ring=ring, level=level)
        extra = []
    else:
        sym = IdealPresentation(torsion_generators(layer.generators, ring, level), ring=ring, level=level)
        extra = list(sym.generators)
    gens = [dict(g.terms) for g in layer.generators]
    slot = "ramified" if level > 0 else "none"
    G = GradedQuotient(p, ring.nvars, level, cap, n, gens, slot=slot)
    top = {((0,) * ring.nvars, 0): p ** (n - 1)}
    E = GradedQuotient(p, ring.nvars, level, cap, n, gens + [dict(g.terms) for g in extra] + [top],
                       slot=slot, extra_lattice=G.lattice_vectors())
    bad = numeric_p_torsion_matches(G, E)
    if bad is not None:
        raise Mismatch(f"symbolic and numeric p-torsion differ in the piece of {bad}")
    annihilated = True
    if extra:
        Gi = GradedQuotient(p, ring.nvars, level, cap, n, gens, slot=slot)
        for y in extra:
            if not Gi.contains((p * y).terms):
                annihilated = False
    if n >= 3:
        # elements killed by p^2 are already killed by p (up to the p^(n-2) artefact)
        top2 = {((0,) * ring.nvars, 0): p ** (n - 2)}
        E2 = GradedQuotient(p, ring.nvars, level, cap, n,
                            gens + [dict(g.terms) for g in extra] + [top2], slot=slot,
                            extra_lattice=G.lattice_vectors())
        for key in G.all_keys():
            pc = G.piece(key)
            if not pc.dim:
                continue
            images = [{G.termkey(b): p * p} for b in pc.basis]
            kern = induced_kernel(pc, images, G)
            got = kernels.howell(kern, p, n) if kern else []
            if got != E2.piece(key).rows:
                annihilated = False
                break
    return PTorsion(sym, True, annihilated, cap)
