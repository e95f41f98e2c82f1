"""Koszul homology lengths and minimal generator counts over F_p, and the
lim Cohen-Macaulay diagnostic for tower layers.

The residue field is F_p, so every length below is an F_p-dimension. A module
M_n is a mod-p layer at level n, viewed over the level-0 ring through the
transition maps; its internal degree is the x-degree, measured in numerators
over p^n.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import kernels
from .errors import DimensionMismatch, WindowTooSmall
from .fracpoly import CharPPoly, reduce_mod_p
from .graded import GradedQuotient

CONSISTENT = "ConsistentWithLimCM"
INCONSISTENT = "Inconsistent"
EXPLORATORY = "Exploratory"

MAX_SOP_ATTEMPTS = 5


class _Degrees:
    """Monomial bases of a homogeneous F_p quotient, degree by degree."""

    def __init__(self, G: GradedQuotient):
        if G.precision != 1:
            raise ValueError("Koszul computations run over F_p")
        if not G.homogeneous:
            raise ValueError("the quotient must be graded by x-degree")
        self.G = G
        self._basis = {}

    def basis(self, s):
        b = self._basis.get(s)
        if b is None:
            b = []
            for key in self.G.keys_of_degree(s):
                pc = self.G.piece(key)
                for j in pc.free_columns():
                    b.append(self.G.termkey(pc.basis[j]))
            b.sort(reverse=True)
            b = (b, {t: i for i, t in enumerate(b)})
            self._basis[s] = b
        return b

    def dim(self, s):
        return len(self.basis(s)[0]) if s >= 0 else 0

    def coords(self, terms, s):
        """Coordinates in degree ``s`` of the class of a homogeneous term dict."""
        _, idx = self.basis(s)
        vec = [0] * len(idx)
        for tk, c in self.G.normal_form(terms).items():
            vec[idx[tk]] = c
        return vec


def _times(elem, tk, p):
    """Term dict of elem * (monomial tk); elem terms are ((nums, 0), c)."""
    nums, t = tk
    out = {}
    for (a, _), c in elem.items():
        key = (tuple(x + y for x, y in zip(a, nums)), t)
        out[key] = (out.get(key, 0) + c) % p
    return {k: c for k, c in out.items() if c}


@dataclass
class KoszulInput:
    """M = a homogeneous mod-p layer; sop = level-0 homogeneous elements of the base."""

    module: GradedQuotient
    sop: list
    cap: int

    def __post_init__(self):
        for x in self.sop:
            if x.level != 0:
                x2 = x.normalized()
                if x2.level != 0:
                    raise ValueError("parameters must live at level 0")
            degs = {sum(n) for (n, _) in x.terms}
            if len(degs) != 1 or 0 in degs:
                raise ValueError("parameters must be homogeneous of positive degree")

    @property
    def level(self):
        return self.module.level

    def degrees(self):
        return [sum(next(iter(x.normalized().terms))[0]) for x in self.sop]


@dataclass
class KoszulLengths:
    lengths: list
    by_degree: dict
    trusted_window: Fraction
    cap: int
    trusted: bool = True

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * v for i, v in enumerate(self.lengths))


def _koszul_by_degree(inp: KoszulInput, cap: int):
    G = inp.module
    if G.cap_num < cap * G.p ** G.level:
        raise ValueError("module truncated below the requested cap")
    p = G.p
    h = G.level
    q = p ** h
    D = _Degrees(G)
    c = len(inp.sop)
    degs = [d * q for d in inp.degrees()]
    elems = [{(tuple(a * q for a in n), 0): cc % p for (n, _), cc in x.normalized().terms.items()}
             for x in inp.sop]
    top = cap * q - c * max(degs, default=0)
    subsets = {i: list(combinations(range(c), i)) for i in range(c + 1)}

    def kdim(i, s):
        return sum(D.dim(s - sum(degs[j] for j in S)) for S in subsets[i])

    def drank(i, s):
        """Rank of d_i: K_i -> K_{i-1} in internal degree s."""
        if i == 0 or i > c:
            return 0
        tgt = subsets[i - 1]
        offs, w = {}, 0
        for T in tgt:
            offs[T] = w
            w += D.dim(s - sum(degs[j] for j in T))
        if not w:
            return 0
        rows = []
        for S in subsets[i]:
            s0 = s - sum(degs[j] for j in S)
            if s0 < 0:
                continue
            for tk in D.basis(s0)[0]:
                row = [0] * w
                for k, j in enumerate(S):
                    T = S[:k] + S[k + 1:]
                    s1 = s0 + degs[j]
                    vec = D.coords(_times(elems[j], tk, p), s1)
                    sign = 1 if k % 2 == 0 else p - 1
                    o = offs[T]
                    for a, v in enumerate(vec):
                        if v:
                            row[o + a] = (row[o + a] + sign * v) % p
                if any(row):
                    rows.append(row)
        return kernels.rank_mod_p(rows, w, p) if rows else 0

    by_degree = {}
    for s in range(max(top, -1) + 1):
        ranks = [drank(i, s) for i in range(c + 2)]
        hs = [kdim(i, s) - ranks[i] - ranks[i + 1] for i in range(c + 1)]
        if any(hs):
            by_degree[s] = hs
    return by_degree, top


def koszul_homology_lengths(inp: KoszulInput) -> KoszulLengths:
    """Lengths of H_i(x; M) summed over the trusted degrees.

    Degrees up to D - c * max deg(x_j) are trusted. A nonzero H_i in the top
    trusted band triggers a recomputation at D + p; if it is still there the
    parameters do not cut out a finite-length module.
    """
    G = inp.module
    p = G.p
    q = p ** G.level
    c = len(inp.sop)
    cap = inp.cap
    by_degree, top = _koszul_by_degree(inp, cap)

    def tail(bd, t):
        return any(s > t - q and any(v) for s, v in bd.items())

    if tail(by_degree, top):
        cap2 = cap + p
        G2 = GradedQuotient(p, G.nvars, G.level, cap2, 1, G.generators, slot=G.slot, t_max=G.t_max)
        by2, top2 = _koszul_by_degree(KoszulInput(G2, inp.sop, cap2), cap2)
        if tail(by2, top2):
            raise DimensionMismatch(
                f"Koszul homology does not vanish near degree {Fraction(top2, q)}; "
                "the elements are not a system of parameters")
        by_degree, top, cap = by2, top2, cap2
    lengths = [0] * (c + 1)
    for hs in by_degree.values():
        for i, v in enumerate(hs):
            lengths[i] += v
    return KoszulLengths(lengths, by_degree, Fraction(top, q), cap)


def nu_minimal_generators(M: GradedQuotient, cap=None) -> int:
    """dim_F_p of M / m M, m = (x_1..x_d) of the level-0 ring."""
    p, h = M.p, M.level
    q = p ** h
    cap_num = M.cap_num if cap is None else cap * q
    D = _Degrees(M)
    d = M.nvars
    total = 0
    top_hit = False
    for s in range(cap_num + 1):
        n = D.dim(s)
        if not n:
            continue
        rows = []
        if s >= q:
            for tk in D.basis(s - q)[0]:
                for j in range(d):
                    e = [0] * d
                    e[j] = q
                    rows.append(D.coords(_times({(tuple(e), 0): 1}, tk, p), s))
        r = kernels.rank_mod_p(rows, n, p) if rows else 0
        if n - r:
            total += n - r
            if s > cap_num - q:
                top_hit = True
    if top_hit:
        raise WindowTooSmall("minimal generators reach the top of the truncation; raise the cap")
    return total


# --- dimension and parameters ------------------------------------------------

def monomial_dimension(nvars: int, supports) -> int:
    """Krull dimension of F[x]/I for a monomial ideal with the given generator supports."""
    supports = [frozenset(s) for s in supports]
    if any(not s for s in supports):
        return -1
    best = 0
    for k in range(nvars, -1, -1):
        for U in combinations(range(nvars), k):
            U = set(U)
            if all(not s <= U for s in supports):
                return k
    return best


def _supports(G: GradedQuotient):
    out = []
    for g in G.generators:
        if len(g) != 1:
            return None
        (nums, t), = g.keys()
        if t:
            return None
        out.append({j for j, a in enumerate(nums) if a})
    return out


def generic_sop(nvars, count, p, rng):
    """``count`` random F_p-linear forms in the variables (not all zero)."""
    out = []
    for _ in range(count):
        while True:
            coeffs = [rng.randrange(p) for _ in range(nvars)]
            if any(coeffs):
                break
        out.append(coeffs)
    return out


def _linear_forms(ring, rows):
    out = []
    d = ring.nvars
    for coeffs in rows:
        terms = {}
        for j, c in enumerate(coeffs):
            if c:
                e = [0] * d
                e[j] = 1
                terms[(tuple(e), 0)] = c
        out.append(CharPPoly(ring, 0, terms))
    return out


def facets(nvars: int, supports):
    """Maximal variable sets containing no generator support."""
    supports = [frozenset(s) for s in supports]
    free = [frozenset(U) for k in range(nvars + 1) for U in combinations(range(nvars), k)
            if all(not s <= set(U) for s in supports)]
    return [U for U in free if not any(U < V for V in free)]


def _facet_rank_ok(rows, facet_list, p):
    for F in facet_list:
        cols = sorted(F)
        sub = [[r[j] for j in cols] for r in rows]
        if kernels.rank_mod_p(sub, len(cols), p) < len(cols):
            return False
    return True


SOP_CANDIDATE_DRAWS = 1000


def choose_sop(base: GradedQuotient, ring, dim: int, cap: int, seed: int = 0, supports=None):
    """Seeded generic linear parameters cutting the base down to finite length.

    For monomial bases a draw is only tried once its restriction to every
    facet has full rank, the linear-parameter criterion for face rings.
    """
    rng = random.Random(seed)
    fl = facets(base.nvars, supports) if supports is not None else None
    last = None
    for _ in range(MAX_SOP_ATTEMPTS):
        rows = generic_sop(base.nvars, dim, base.p, rng)
        if fl is not None:
            for _ in range(SOP_CANDIDATE_DRAWS):
                if _facet_rank_ok(rows, fl, base.p):
                    break
                rows = generic_sop(base.nvars, dim, base.p, rng)
        sop = _linear_forms(ring, rows)
        try:
            koszul_homology_lengths(KoszulInput(base, sop, cap))
            return sop
        except DimensionMismatch as exc:
            last = exc
    raise DimensionMismatch(f"no system of parameters found in {MAX_SOP_ATTEMPTS} seeded draws: {last}")


# --- Gorenstein check -----------------------------------------------------------

def _socle_dimension(base: GradedQuotient, sop, top_num: int) -> int:
    """dim of the socle of base/(sop) over degrees <= top_num."""
    p = base.p
    D = _Degrees(base)
    d = base.nvars
    degs = [sum(next(iter(x.terms))[0]) for x in sop]
    elems = [dict(x.terms) for x in sop]

    def ideal_rows(s):
        rows = []
        for j, x in enumerate(elems):
            s0 = s - degs[j]
            if s0 >= 0:
                for tk in D.basis(s0)[0]:
                    rows.append(D.coords(_times(x, tk, p), s))
        return rows

    total = 0
    for s in range(top_num + 1):
        n = D.dim(s)
        if not n:
            continue
        U = ideal_rows(s)
        Ud = kernels.rank_mod_p(U, n, p) if U else 0
        if Ud == n:
            continue
        n1 = D.dim(s + 1)
        U1 = ideal_rows(s + 1)
        w = d * n1
        rows = []
        for a, tk in enumerate(D.basis(s)[0]):
            row = []
            for j in range(d):
                e = [0] * d
                e[j] = 1
                row.extend(D.coords(_times({(tuple(e), 0): 1}, tk, p), s + 1))
            rows.append(row + [1 if b == a else 0 for b in range(n)])
        for j in range(d):
            for r in U1:
                rows.append([0] * (j * n1) + r + [0] * ((d - 1 - j) * n1) + [0] * n)
        h = kernels.howell(rows, p, 1) if rows else []
        pre = [r[w:] for r in h if not any(r[:w])]
        dim_pre = kernels.rank_mod_p(pre + U, n, p) if pre or U else 0
        total += dim_pre - Ud
    return total


def is_gorenstein_mod_p(R, cap=None, seed: int = 0):
    """True/False if R/pR is decided Gorenstein or not; None when undecided.

    Decided for homogeneous monomial presentations: Cohen-Macaulay means H_1
    vanishes on a system of parameters, and then Gorenstein means the socle
    of R/pR/(sop) is one-dimensional.
    """
    cap = R.cap if cap is None else cap
    base = R.quotient(cap, mod_p=True)
    if not base.homogeneous:
        return None
    sup = _supports(base)
    if sup is None:
        return None
    dim = monomial_dimension(base.nvars, sup)
    if dim < 0:
        return None
    from .fracpoly import CharPRing
    ring = CharPRing(R.p, R.ring.names, cap)
    try:
        sop = choose_sop(base, ring, dim, cap, seed, sup)
        kl = koszul_homology_lengths(KoszulInput(base, sop, cap))
    except DimensionMismatch:
        return None
    if any(kl.lengths[1:]):
        return False
    top = int(kl.trusted_window) - 1
    if top < 0:
        return None
    return _socle_dimension(base, sop, top) == 1


# --- diagnostic ------------------------------------------------------------------

@dataclass
class LimCMRow:
    level: int
    nu: int
    lengths: list
    trusted: bool
    ratios: list
    euler: int


@dataclass
class LimCMTable:
    rows: list
    verdict: str
    sop: list
    dimension: int
    euler_scaling_holds: bool
    notes: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "i", "length", "nu", "ratio"])
        for r in self.rows:
            for i in range(1, len(r.lengths)):
                w.writerow([r.level, i, r.lengths[i], r.nu, str(r.ratios[i - 1])])
        return buf.getvalue()

    def render(self) -> str:
        lines = [f"sop: {', '.join(x.render() for x in self.sop)}  (dimension {self.dimension})"]
        for r in self.rows:
            ls = " ".join(f"l{i}={v}" for i, v in enumerate(r.lengths))
            rs = " ".join(f"{x}" for x in r.ratios)
            lines.append(f"n={r.level} nu={r.nu} {ls} ratios=[{rs}] chi={r.euler}")
        lines.append(f"euler scaling: {'holds' if self.euler_scaling_holds else 'fails'}")
        lines.extend(self.notes)
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _verdict(rows):
    c = len(rows[0].lengths) - 1
    for i in range(c):
        seq = [r.ratios[i] for r in rows]
        if all(x == 0 for x in seq):
            continue
        if not all(a > b for a, b in zip(seq, seq[1:])):
            return INCONSISTENT
    return CONSISTENT


def layer_module(spec, n: int, cap: int) -> GradedQuotient:
    """The mod-p module M_n of the diagnostic."""
    from .tower import TORSION_FREE, build_layer
    layer = build_layer(spec, n)
    if spec.mode == TORSION_FREE:
        gens = []
        for g in layer.generators:
            r = reduce_mod_p(g, "plain")
            if not r.is_zero():
                gens.append(dict(r.terms))
        return GradedQuotient(spec.p, spec.ring.nvars, n, cap, 1, gens)
    return layer.modp_quotient(cap)


def limcm_diagnostic(spec, n_max: int, sop=None, seed: int = 0, cap=None, dim=None) -> LimCMTable:
    """nu_n and Koszul lengths on the mod-p layers for n = 0..n_max."""
    from .fracpoly import CharPRing
    from .tower import TORSION_FREE
    cap = spec.cap if cap is None else cap
    p = spec.p
    ring = CharPRing(p, spec.ring.names, cap)
    base_gens = []
    for g in spec.presentation.generators:
        r = reduce_mod_p(g, "plain")
        if not r.is_zero():
            base_gens.append(dict(r.terms))
    base = GradedQuotient(p, spec.ring.nvars, 0, cap, 1, base_gens)
    notes = []
    if dim is None:
        sup = _supports(base)
        if sup is None:
            if sop is None:
                raise ValueError("dimension of a non-monomial quotient must be supplied")
            dim = len(sop)
            notes.append("dimension taken from the number of supplied parameters")
        else:
            dim = monomial_dimension(base.nvars, sup)
    if sop is None:
        sop = choose_sop(base, ring, dim, cap, seed, _supports(base))
    else:
        sop = [CharPPoly(ring, x.level, dict(x.terms)) for x in sop]
        if len(sop) != dim:
            raise DimensionMismatch(f"{len(sop)} parameters for a ring of dimension {dim}")
    rows = []
    for n in range(n_max + 1):
        M = layer_module(spec, n, cap)
        kl = koszul_homology_lengths(KoszulInput(M, sop, cap))
        nu = nu_minimal_generators(M)
        ratios = [Fraction(v, nu) for v in kl.lengths[1:]]
        rows.append(LimCMRow(n, nu, kl.lengths, kl.trusted, ratios, kl.euler_characteristic()))
    chi0 = rows[0].euler
    scaling = all(r.euler == p ** (r.level * dim) * chi0 for r in rows)
    if spec.mode != TORSION_FREE:
        verdict = EXPLORATORY
        notes.append("torsion layers: the lim Cohen-Macaulay property of this sequence is not known")
    else:
        verdict = _verdict(rows)
        if not scaling:
            notes.append("Euler characteristics do not scale by p^(n dim)")
            verdict = INCONSISTENT
    return LimCMTable(rows, verdict, sop, dim, scaling, notes)
