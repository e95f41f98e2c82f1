"""The delta layer: Frobenius lift phi(x_i) = x_i^p, the p-derivation delta, and
window-qualified injectivity, splitting and existence checks.

All verdicts are about degree-truncated models. A map that multiplies degrees
by p is only fully visible on inputs of degree at most floor(D / p), so that is
the window every phi-related verdict is qualified by.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernels
from .errors import RamifiedInput
from .exactnum import ZpNMatrix, in_span, solve_or_residual
from .fracpoly import FracPoly, FracRing, frobenius_substitute, render_monomial, render_terms
from .graded import GradedQuotient, compositions, induced_kernel

HYPOTHESIS_UNVERIFIED = "HypothesisUnverified"


class HypothesisUnverified(UserWarning):
    """A hypothesis of the underlying statement could not be confirmed."""


@dataclass
class RingPresentation:
    """R = (Z/p^N)[x_1..x_d] / (f_1..f_r), truncated at the ring's cap.

    The two flags are claims; the checks below verify them on the truncation.
    """

    ring: FracRing
    generators: tuple
    p_torsion_free: bool | None = None
    reduced_mod_p: bool | None = None

    def __post_init__(self):
        self.generators = tuple(self.generators)
        for g in self.generators:
            if g.ring != self.ring:
                raise ValueError("generator over a different ring")
            if g.level != 0 and g.normalized().level != 0:
                raise ValueError("generators must live at level 0")
            if g.is_ramified():
                raise RamifiedInput("generators must not involve the ramification slot")
            if g.is_zero():
                raise ValueError("zero generator")
        self.generators = tuple(g.normalized() for g in self.generators)

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def precision(self) -> int:
        return self.ring.precision

    @property
    def cap(self) -> int:
        return self.ring.cap

    @property
    def variables(self):
        return self.ring.names

    def quotient(self, cap=None, precision=None, mod_p=False) -> GradedQuotient:
        """Graded model of R (or R/pR) truncated at ``cap``."""
        cap = self.cap if cap is None else cap
        n = 1 if mod_p else (self.precision if precision is None else precision)
        gens = [dict(g.terms) for g in self.generators]
        return GradedQuotient(self.p, self.ring.nvars, 0, cap, n, gens)

    def is_homogeneous(self) -> bool:
        return self.quotient().homogeneous

    def render(self) -> str:
        gens = ", ".join(g.render() for g in self.generators) or "0"
        return f"Z/{self.p}^{self.precision}[{', '.join(self.variables)}]/({gens})"


def phi(f: FracPoly) -> FracPoly:
    """Frobenius lift with delta(x_i) = 0: coefficients fixed, x^e -> x^(pe)."""
    return frobenius_substitute(f)


def delta(f: FracPoly) -> FracPoly:
    """delta(f) = (phi(f) - f^p) / p, one digit less precise than f."""
    return (phi(f) - f ** f.p).divide_by_p()


@dataclass
class Verdict:
    holds: bool
    residuals: dict = field(default_factory=dict)


def check_delta_axioms(f: FracPoly, g: FracPoly) -> Verdict:
    """Check the sum and product identities for delta on (f, g) at precision n - 1."""
    p = f.p
    df, dg = delta(f), delta(g)
    sum_cross = (f ** p + g ** p - (f + g) ** p).divide_by_p()
    res_sum = delta(f + g) - df - dg - sum_cross
    res_prod = delta(f * g) - (f ** p) * dg - (g ** p) * df - p * df * dg
    residuals = {}
    if not res_sum.is_zero():
        residuals["sum"] = res_sum
    if not res_prod.is_zero():
        residuals["product"] = res_prod
    return Verdict(not residuals, residuals)


# --- injectivity -----------------------------------------------------------

@dataclass
class InjectiveUpTo:
    window: int
    warnings: tuple = ()


@dataclass
class KernelWitness:
    element: FracPoly
    window: int
    warnings: tuple = ()


def _frobenius_kernel(src: GradedQuotient, tgt: GradedQuotient, p: int):
    """First kernel element of x^v -> x^(pv) from src pieces into tgt, or None."""
    for key in src.all_keys():
        pc = src.piece(key)
        if not pc.dim:
            continue
        images = [{(tuple(p * a for a in v), 0): 1} for (v, _) in pc.basis]
        for row in induced_kernel(pc, images, tgt):
            if not in_span(pc.rows, row, pc.p, pc.n):
                return {src.termkey(pc.basis[i]): c for i, c in enumerate(pc.reduce(row)) if c}
    return None


def frobenius_kernel_witness(R: RingPresentation, cap=None, mod_p=False):
    """Nonzero element of the window killed by phi (or by Frobenius on R/pR), or None."""
    cap = R.cap if cap is None else cap
    w = cap // R.p
    src = R.quotient(w, mod_p=mod_p)
    tgt = R.quotient(R.p * w, mod_p=mod_p)
    return _frobenius_kernel(src, tgt, R.p)


def is_reduced_mod_p(R: RingPresentation, cap=None):
    """(True, None) if Frobenius on R/pR is injective on the window, else (False, witness)."""
    wit = frobenius_kernel_witness(R, cap, mod_p=True)
    if wit is None:
        return True, None
    return False, FracPoly(R.ring, 0, 1, wit)


def is_p_torsion_free(R: RingPresentation, cap=None):
    """Compare ker(p) on R/p^N with p^(N-1) R/p^N piece by piece.

    Returns (True, None) or (False, witness); flatness over Z/p^N is what
    p-torsion-freeness of R means on this model.
    """
    G = R.quotient(cap)
    n = R.precision
    p = R.p
    top = p ** (n - 1)
    for key in G.all_keys():
        pc = G.piece(key)
        if not pc.dim:
            continue
        images = [{G.termkey(b): p} for b in pc.basis]
        expected = [[top if i == j else 0 for j in range(pc.dim)] for i in range(pc.dim)]
        expected = kernels.howell(expected + [list(r) for r in pc.rows], p, n)
        for row in induced_kernel(pc, images, G):
            if not in_span(expected, row, p, n):
                wit = {G.termkey(pc.basis[i]): c for i, c in enumerate(pc.reduce(row)) if c}
                return False, FracPoly(R.ring, 0, n, wit)
    return True, None


def check_phi_injective(R: RingPresentation, cap=None):
    """Kernel of phi on R up to degree floor(D/p)."""
    cap = R.cap if cap is None else cap
    w = cap // R.p
    warnings = []
    reduced, wit = is_reduced_mod_p(R, cap)
    if not reduced:
        warnings.append(f"{HYPOTHESIS_UNVERIFIED}: R/pR is not reduced (Frobenius kills {wit.render()})")
    kern = frobenius_kernel_witness(R, cap)
    if kern is None:
        return InjectiveUpTo(w, tuple(warnings))
    return KernelWitness(FracPoly(R.ring, 0, R.precision, kern), w, tuple(warnings))


# --- splitting ---------------------------------------------------------------

@dataclass
class SplitsUpTo:
    window: int
    retraction: dict
    warnings: tuple = ()

    def render_table(self, names, p):
        out = {}
        for nums, val in sorted(self.retraction.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            out[render_monomial(nums, 0, 0, p, names)] = val.render()
        return out


@dataclass
class NoSplittingUpTo:
    window: int
    certificate: str
    warnings: tuple = ()


def _solve_splitting(p, nvars, gens, cap, precision):
    """Solve for a phi-retraction on the truncation.

    Returns ``(table, None)`` with table: source exponent -> term dict of
    sigma(x^v), or ``(None, label)`` naming an unsatisfiable equation.
    """
    G = GradedQuotient(p, nvars, 0, cap, precision, gens)
    if not G.homogeneous:
        raise ValueError("the splitting check needs a homogeneous ideal")
    w_cap = cap // p
    q = p ** precision
    lat = G.lattice

    # targets of sigma(x^v): monomials w of degree deg(v)/p with [p w] = [v]
    by_image = {}
    for s in range(w_cap + 1):
        for w in compositions(s, nvars):
            by_image.setdefault(lat.key(tuple(p * a for a in w)), []).append(w)

    unknowns = []
    uindex = {}
    sources = []
    for s in range(cap + 1):
        for v in compositions(s, nvars):
            sources.append(v)
            if s % p:
                continue
            for w in by_image.get(lat.key(v), []):
                if sum(w) * p != s:
                    continue
                uindex[(v, w)] = len(unknowns)
                unknowns.append((v, w))
    targets_of = {}
    for (v, w) in unknowns:
        targets_of.setdefault(v, []).append(w)

    # equations: list of (label, {(unknown index): term dict}, constant term dict)
    equations = []
    zero = (0,) * nvars
    equations.append(("sigma(1) = 1", {uindex[(zero, w)]: {(w, 0): 1} for w in targets_of.get(zero, [])},
                      {(zero, 0): -1}))
    for v in sources:
        if sum(v) + p > cap:
            continue
        for j in range(nvars):
            vj = tuple(a + (p if i == j else 0) for i, a in enumerate(v))
            lin = {}
            for w in targets_of.get(vj, []):
                lin[uindex[(vj, w)]] = {(w, 0): 1}
            for w in targets_of.get(v, []):
                wj = tuple(a + (1 if i == j else 0) for i, a in enumerate(w))
                lin[uindex[(v, w)]] = {(wj, 0): -1}
            if lin:
                label = f"linearity at {render_monomial(v, 0, 0, p, [f'x{i + 1}' for i in range(nvars)])}, var {j + 1}"
                equations.append((label, lin, {}))
    for s in range(cap + 1):
        for key in G.keys_of_degree(s):
            pc = G.piece(key)
            for r in pc.rows:
                lin = {}
                for i, c in enumerate(r):
                    if not c:
                        continue
                    v = pc.basis[i][0]
                    for w in targets_of.get(v, []):
                        u = uindex[(v, w)]
                        d = lin.setdefault(u, {})
                        d[(w, 0)] = (d.get((w, 0), 0) + c) % q
                if lin:
                    equations.append(("vanishing on the ideal", lin, {}))

    # assemble columns per (equation, target piece)
    R = GradedQuotient(p, nvars, 0, w_cap, precision, gens)
    columns = []  # (equation index, piece key, offset)
    col_of = {}
    width = 0
    for ei, (_, lin, const) in enumerate(equations):
        keys = set()
        for td in lin.values():
            keys.update(R.key_of(tk) for tk in td)
        keys.update(R.key_of(tk) for tk in const)
        for k in sorted(keys):
            col_of[(ei, k)] = width
            columns.append((ei, k, width))
            width += R.piece(k).dim
    nun = len(unknowns)
    rows = [[0] * width for _ in range(nun)]
    rhs = [0] * width
    for ei, (_, lin, const) in enumerate(equations):
        for u, td in lin.items():
            for k, vec in R.split(td).items():
                o = col_of[(ei, k)]
                for i, c in enumerate(vec):
                    rows[u][o + i] = (rows[u][o + i] + c) % q
        for k, vec in R.split(const).items():
            o = col_of[(ei, k)]
            for i, c in enumerate(vec):
                rhs[o + i] = (rhs[o + i] - c) % q
    for (ei, k, o) in columns:
        for r in R.piece(k).rows:
            row = [0] * width
            row[o:o + len(r)] = r
            rows.append(row)
    if width == 0:
        return {}, None
    coeffs, bad = solve_or_residual(ZpNMatrix(tuple(tuple(r) for r in rows), p, precision, width), rhs)
    if coeffs is None:
        for (ei, k, o) in columns:
            if o <= bad < o + R.piece(k).dim:
                return None, equations[ei][0]
        return None, "unsatisfiable system"
    table = {}
    for v in sources:
        terms = {}
        for w in targets_of.get(v, []):
            c = coeffs[uindex[(v, w)]]
            if c:
                terms[(w, 0)] = c
        table[v] = R.normal_form(terms)
    return table, None


def verify_retraction(R: RingPresentation, table, cap=None, precision=None) -> bool:
    """Independent check that sigma(x^(p w)) = x^w in R for every w of degree <= floor(D/p)."""
    cap = R.cap if cap is None else cap
    n = R.precision if precision is None else precision
    p = R.p
    G = R.quotient(cap, precision=n) if n > 1 else R.quotient(cap, mod_p=True)
    for s in range(cap // p + 1):
        for w in compositions(s, R.ring.nvars):
            pw = tuple(p * a for a in w)
            val = dict(table.get(pw, {}))
            val[(w, 0)] = (val.get((w, 0), 0) - 1) % (p ** n)
            if not G.contains(val):
                return False
    return True


def check_phi_splits(R: RingPresentation, cap=None):
    """Look for an R-linear retraction sigma of phi on the truncation.

    Hypothesis checks (F-split and Gorenstein mod p) only generate warnings.
    """
    from .limcm import is_gorenstein_mod_p

    cap = R.cap if cap is None else cap
    p = R.p
    gens = [dict(g.terms) for g in R.generators]
    warnings = []
    gens_mod_p = [{k: c % p for k, c in g.items() if c % p} for g in gens]
    fsplit, _ = _solve_splitting(p, R.ring.nvars, [g for g in gens_mod_p if g], cap, 1)
    if fsplit is None:
        warnings.append(f"{HYPOTHESIS_UNVERIFIED}: R/pR is not F-split on the window")
    gor = is_gorenstein_mod_p(R)
    if gor is None:
        warnings.append(f"{HYPOTHESIS_UNVERIFIED}: Gorenstein property of R/pR not decided")
    elif not gor:
        warnings.append(f"{HYPOTHESIS_UNVERIFIED}: R/pR is not Gorenstein")
    table, bad = _solve_splitting(p, R.ring.nvars, gens, cap, R.precision)
    w = cap // p
    if table is None:
        return NoSplittingUpTo(w, bad, tuple(warnings))
    if not verify_retraction(R, table, cap):
        raise AssertionError("solved retraction failed re-verification")
    retraction = {v: FracPoly(R.ring, 0, R.precision, t) for v, t in table.items()}
    return SplitsUpTo(w, retraction, tuple(warnings))


# --- existence of a delta-structure on R ------------------------------------

@dataclass
class ConsistentUpTo:
    window: int
    delta_values: dict
    note: str = ""


@dataclass
class Obstruction:
    witness: FracPoly
    statement: str
    window: int


@dataclass
class Inconclusive:
    window: int
    reason: str


def _partial(f: FracPoly, j: int) -> FracPoly:
    p = f.p
    P = p ** f.level
    terms = {}
    for (n, e), c in f.terms.items():
        a = n[j] // P
        if a:
            m = list(n)
            m[j] -= P
            terms[(tuple(m), e)] = c * a
    return FracPoly(f.ring, f.level, f.precision, terms)


def admits_delta_on_quotient(R: RingPresentation):
    """Search for a delta-structure on R compatible with delta on Z_p.

    Stage one tries the ambient delta (delta(x_i) = 0): it descends exactly when
    delta(f_j) lies in I. Otherwise delta(f_j) = 0 mod (p, I) with unknown
    s_i = delta(x_i) is linear in the s_i modulo p:
        delta_0(f_j) + sum_i (d f_j / d x_i)(x^p) s_i = 0 in R/pR,
    and an inconsistent system is an obstruction to any delta-structure. A
    consistent system without an exact lift is reported as inconclusive.
    """
    from .idealkit import IdealPresentation, is_phi_stable

    p, n, cap = R.p, R.precision, R.cap
    ring = R.ring
    stable = is_phi_stable(IdealPresentation(list(R.generators), ring=R.ring), cap)
    if n < 2:
        return Inconclusive(cap, "precision too small for delta")
    if any(g.degree() * p > cap for g in R.generators):
        return Inconclusive(cap, "cap below p times the generator degree")

    G1 = R.quotient(cap, precision=n - 1)
    if all(G1.contains(delta(g).terms) for g in R.generators):
        dv = {name: "0" for name in ring.names}
        dv["p"] = render_terms({((0,) * ring.nvars, 0): 1 - p ** (p - 1)}, 0, p, ring.names, p ** (n - 1))
        return ConsistentUpTo(cap, dv, f"delta(x_i) = 0 descends; phi-stability: {type(stable).__name__}")

    Gp = R.quotient(cap, mod_p=True)
    d = ring.nvars
    homog = Gp.homogeneous
    if homog:
        unknown_monos = list(compositions(p, d))
    else:
        unknown_monos = [m for s in range(cap + 1) for m in compositions(s, d)]
    unknowns = [(i, m) for i in range(d) for m in unknown_monos]
    failures = []
    eq_blocks = []
    for gj in R.generators:
        const = {k: c % p for k, c in delta(gj).terms.items() if c % p}
        lin = []
        for i in range(d):
            dg = phi(_partial(gj, i))
            lin.append({k: c % p for k, c in dg.terms.items() if c % p})
        eq_blocks.append((gj, const, lin))

    def solve(blocks):
        cols = []
        colidx = {}
        rows_u = [dict() for _ in unknowns]
        rhs = {}
        for bi, (gj, const, lin) in enumerate(blocks):
            for ui, (i, m) in enumerate(unknowns):
                prod = {}
                for (nums, e), c in lin[i].items():
                    v = tuple(a + b for a, b in zip(nums, m))
                    if sum(v) <= cap:
                        prod[(v, 0)] = (prod.get((v, 0), 0) + c) % p
                for k, vec in Gp.split(prod).items():
                    for t, c in enumerate(vec):
                        if c:
                            rows_u[ui][(bi, k, t)] = c
            for k, vec in Gp.split(const).items():
                for t, c in enumerate(vec):
                    if c:
                        rhs[(bi, k, t)] = (-c) % p
        keys = set(rhs)
        for r in rows_u:
            keys.update(r)
        pieces = sorted({(bi, k) for (bi, k, _) in keys})
        width = 0
        for bk in pieces:
            colidx[bk] = width
            width += Gp.piece(bk[1]).dim
        if width == 0:
            return True
        mat = []
        for r in rows_u:
            row = [0] * width
            for (bi, k, t), c in r.items():
                row[colidx[(bi, k)] + t] = c
            mat.append(row)
        for (bi, k) in pieces:
            for r in Gp.piece(k).rows:
                row = [0] * width
                o = colidx[(bi, k)]
                row[o:o + len(r)] = r
                mat.append(row)
        vec = [0] * width
        for (bi, k, t), c in rhs.items():
            vec[colidx[(bi, k)] + t] = c
        coeffs, _ = solve_or_residual(ZpNMatrix(tuple(tuple(r) for r in mat), p, 1, width), vec)
        return coeffs is not None

    for blk in eq_blocks:
        if not solve([blk]):
            failures.append(blk)
    if failures or not solve(eq_blocks):
        gj, const, lin = failures[0] if failures else eq_blocks[0]
        wit_terms = Gp.normal_form(const)
        witness = FracPoly(ring, 0, 1, wit_terms)
        gens = ", ".join(["p"] + [g.render(p_symbol=True) for g in R.generators])
        stmt = f"{witness.render()} ∈ ({gens})"
        if any(lin_i for lin_i in lin):
            stmt += " (modulo the span of the linear terms in delta(x_i))"
        return Obstruction(witness, stmt, cap)
    return Inconclusive(cap, "mod-p system solvable but no exact lift was constructed")
