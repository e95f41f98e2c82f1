"""Fine-graded linear algebra on truncated quotients.

A truncated quotient T/I, with T spanned by monomials of degree at most the
cap, splits as a direct sum over cosets of the lattice L spanned by exponent
differences inside each generator: multiplying a generator by a monomial
keeps all its terms in one coset. Every membership, kernel and length question
is therefore a small Howell-form computation per coset ("piece").

Three coordinate conventions are supported:

* ``none``: coefficients in Z/p^n, no ramification slot.
* ``ramified``: coefficients in Z/p^n, the slot exponent eps in [0, p^h) is a
  coordinate inside each piece (u^(p^h) = p couples different eps).
* ``t``: coefficients in F_p, the t exponent is an extra graded coordinate,
  bounded by ``t_max`` (numerators at the working level).
"""

from __future__ import annotations

from functools import lru_cache

from . import kernels
from .exactnum import in_span, pivot_column, valuation


@lru_cache(maxsize=None)
def compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total`` (lex descending)."""
    if parts == 0:
        return ((),) if total == 0 else ()
    if parts == 1:
        return ((total,),)
    out = []
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


class Lattice:
    """Integer lattice in Z^dim in echelon form, with canonical coset keys."""

    def __init__(self, vectors, dim: int):
        self.dim = dim
        rows = [list(v) for v in vectors if any(v)]
        out = []
        for c in range(dim):
            active = [r for r in rows if r[c] != 0]
            rest = [r for r in rows if r[c] == 0]
            while len(active) > 1:
                active.sort(key=lambda r: abs(r[c]))
                piv = active[0]
                nxt = [piv]
                for r in active[1:]:
                    f = r[c] // piv[c]
                    r2 = [a - f * b for a, b in zip(r, piv)]
                    if r2[c] != 0:
                        nxt.append(r2)
                    elif any(r2):
                        rest.append(r2)
                active = nxt
            if active:
                piv = active[0]
                if piv[c] < 0:
                    piv = [-a for a in piv]
                out.append((c, tuple(piv)))
            rows = rest
        self.rows = out

    @property
    def rank(self) -> int:
        return len(self.rows)

    def key(self, v) -> tuple:
        v = list(v)
        for c, row in self.rows:
            f = v[c] // row[c]
            if f:
                for j in range(c, self.dim):
                    if row[j]:
                        v[j] -= f * row[j]
        return tuple(v)

    def annihilated_by(self, weights) -> bool:
        return all(sum(w * a for w, a in zip(weights, row)) == 0 for _, row in self.rows)


class Piece:
    """One coset of the truncated quotient with the Howell form of its ideal part."""

    __slots__ = ("key", "basis", "index", "rows", "p", "n")

    def __init__(self, key, basis, rows, p, n):
        self.key = key
        self.basis = basis
        self.index = {b: i for i, b in enumerate(basis)}
        self.rows = rows
        self.p = p
        self.n = n

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, vec):
        q = self.p ** self.n
        v = [x % q for x in vec]
        for r in self.rows:
            c = pivot_column(r)
            y = v[c]
            if y:
                f = y // r[c]
                if f:
                    for j in range(c, len(v)):
                        if r[j]:
                            v[j] = (v[j] - f * r[j]) % q
        return v

    def contains(self, vec) -> bool:
        return in_span(self.rows, vec, self.p, self.n)

    def pivots(self) -> dict:
        return {pivot_column(r): r[pivot_column(r)] for r in self.rows}

    def free_columns(self) -> list:
        """Columns without a pivot; a basis of the quotient piece over a field."""
        piv = self.pivots()
        return [j for j in range(self.dim) if j not in piv]

    def quotient_length(self) -> int:
        piv = self.pivots()
        total = 0
        for j in range(self.dim):
            if j in piv:
                total += valuation(piv[j], self.p)
            else:
                total += self.n
        return total


class GradedQuotient:
    """A truncated quotient split into fine-graded pieces.

    ``generators`` are term maps ``{(nums, slot): coeff}`` at ``level``. The
    cap bounds the variable degree; numerators may therefore reach
    ``cap * p^level``.
    """

    def __init__(self, p: int, nvars: int, level: int, cap, precision: int, generators,
                 slot: str = "none", t_max: int = 0, extra_lattice=()):
        if slot not in ("none", "ramified", "t"):
            raise ValueError(slot)
        self.p = p
        self.nvars = nvars
        self.level = level
        self.precision = precision
        self.q = p ** precision
        self.slot = slot
        self.t_max = t_max if slot == "t" else 0
        self.cap_num = int(cap * p ** level)
        self.E = p ** level if slot == "ramified" else 1
        self.generators = [self._clean(g) for g in generators]
        self.generators = [g for g in self.generators if g]
        self.gdim = nvars + (1 if slot == "t" else 0)
        diffs = []
        for g in self.generators:
            vs = [self._vec(k) for k in g]
            for v in vs[1:]:
                diffs.append(tuple(a - b for a, b in zip(v, vs[0])))
        diffs.extend(tuple(v) for v in extra_lattice)
        self.lattice = Lattice(diffs, self.gdim)
        weights = [1] * nvars + ([0] if slot == "t" else [])
        self.homogeneous = self.lattice.annihilated_by(weights)
        self._buckets = {}
        self._pieces = {}

    # --- term plumbing ---------------------------------------------------
    def _clean(self, g):
        out = {}
        for (nums, s), c in g.items():
            c %= self.q
            if not c:
                continue
            if self.slot == "none" and s:
                raise ValueError("slot term in an unramified quotient")
            if self.slot == "ramified" and s >= self.E:
                raise ValueError("slot exponent not normalized")
            if self.slot == "t" and s > self.t_max:
                continue
            out[(tuple(nums), s)] = c
        return out

    def _vec(self, termkey):
        nums, s = termkey
        if self.slot == "t":
            return tuple(nums) + (s,)
        return tuple(nums)

    def _basis_entry(self, termkey):
        nums, s = termkey
        if self.slot == "t":
            return (tuple(nums) + (s,), 0)
        return (tuple(nums), s)

    def termkey(self, entry):
        v, e = entry
        if self.slot == "t":
            return (v[: self.nvars], v[self.nvars])
        return (v, e)

    def xdeg(self, v) -> int:
        return sum(v[: self.nvars])

    # --- enumeration -----------------------------------------------------
    def _vectors_of_degree(self, s):
        base = compositions(s, self.nvars)
        if self.slot == "t":
            return [b + (t,) for b in base for t in range(self.t_max + 1)]
        return list(base)

    def _bucket(self, s):
        """Coset key -> member vectors, for x-degree ``s`` (or all degrees if inhomogeneous)."""
        if not self.homogeneous:
            s = None
        b = self._buckets.get(s)
        if b is None:
            b = {}
            degrees = range(self.cap_num + 1) if s is None else [s]
            for d in degrees:
                for v in self._vectors_of_degree(d):
                    b.setdefault(self.lattice.key(v), []).append(v)
            self._buckets[s] = b
        return b

    def members(self, key):
        if self.homogeneous:
            s = self.xdeg(key)
            if s < 0 or s > self.cap_num:
                return []
        else:
            s = None
        return self._bucket(s).get(key, [])

    def keys_of_degree(self, s):
        """Coset keys whose members have x-degree ``s`` (homogeneous case)."""
        if not self.homogeneous:
            raise ValueError("degree pieces need a homogeneous ideal")
        if s < 0 or s > self.cap_num:
            return []
        return list(self._bucket(s).keys())

    def all_keys(self):
        if self.homogeneous:
            out = []
            for s in range(self.cap_num + 1):
                out.extend(self._bucket(s).keys())
            return out
        return list(self._bucket(None).keys())

    def lattice_vectors(self):
        """Exponent differences inside generators (they span the grading lattice)."""
        out = []
        for g in self.generators:
            vs = [self._vec(k) for k in g]
            out.extend(tuple(a - b for a, b in zip(v, vs[0])) for v in vs[1:])
        return out

    def key_of(self, termkey):
        return self.lattice.key(self._vec(termkey))

    # --- pieces ----------------------------------------------------------
    def piece(self, key) -> Piece:
        pc = self._pieces.get(key)
        if pc is None:
            pc = self._build_piece(key)
            self._pieces[key] = pc
        return pc

    def _generator_items(self):
        items = self.__dict__.get("_gitems")
        if items is None:
            items = []
            for g in self.generators:
                its = [(self._vec(k), k[1], c) for k, c in g.items()]
                items.append((its, its[0][0]))
            self._gitems = items
        return items

    def _build_piece(self, key) -> Piece:
        members = sorted(self.members(key), reverse=True)
        basis = [(v, e) for v in members for e in range(self.E)]
        index = {b: i for i, b in enumerate(basis)}
        rows = []
        p, q, E = self.p, self.q, self.E
        nv, cap, tmax = self.nvars, self.cap_num, self.t_max
        slot = self.slot
        for items, a0 in self._generator_items():
            mkey = self.lattice.key(tuple(a - b for a, b in zip(key, a0)))
            for b in self.members(mkey):
                for e in range(E):
                    row = [0] * len(basis)
                    nz = False
                    for a, s, c in items:
                        v = tuple(x + y for x, y in zip(a, b))
                        if sum(v[:nv]) > cap:
                            continue
                        if slot == "t":
                            if v[nv] > tmax:
                                continue
                            ent = (v, 0)
                            cc = c
                        elif slot == "ramified":
                            ee = s + e
                            cc = c
                            if ee >= E:
                                ee -= E
                                cc = c * p
                            ent = (v, ee)
                        else:
                            ent = (v, 0)
                            cc = c
                        i = index[ent]
                        row[i] = (row[i] + cc) % q
                        nz = True
                    if nz and any(row):
                        rows.append(row)
        h = kernels.howell(rows, p, self.precision) if rows else []
        return Piece(key, basis, h, p, self.precision)

    # --- elements --------------------------------------------------------
    def split(self, terms):
        """Map a term dict to {coset key: coordinate vector}."""
        out = {}
        for tk, c in terms.items():
            c %= self.q
            if not c:
                continue
            nums, s = tk
            if self.slot == "t" and s > self.t_max:
                continue
            if sum(nums) > self.cap_num:
                raise ValueError("term beyond the truncation")
            key = self.key_of(tk)
            pc = self.piece(key)
            vec = out.get(key)
            if vec is None:
                vec = out[key] = [0] * pc.dim
            i = pc.index[self._basis_entry(tk)]
            vec[i] = (vec[i] + c) % self.q
        return out

    def contains(self, terms) -> bool:
        for key, vec in self.split(terms).items():
            if not self.piece(key).contains(vec):
                return False
        return True

    def normal_form(self, terms):
        out = {}
        for key, vec in self.split(terms).items():
            pc = self.piece(key)
            r = pc.reduce(vec)
            for i, c in enumerate(r):
                if c:
                    out[self.termkey(pc.basis[i])] = c
        return out

    def quotient_length(self, keys=None) -> int:
        keys = self.all_keys() if keys is None else keys
        return sum(self.piece(k).quotient_length() for k in keys)


def same_span(rows_a, rows_b, p, n) -> bool:
    ha = kernels.howell(rows_a, p, n) if rows_a else []
    hb = kernels.howell(rows_b, p, n) if rows_b else []
    return ha == hb


def induced_kernel(src: Piece, images, target: GradedQuotient):
    """Kernel of a linear map from a source piece into a target quotient.

    ``images[i]`` is the term dict of the image of basis element i. Returns
    rows (in source coordinates) spanning {v : image(v) in the target ideal};
    the source ideal rows are included so the result is a submodule containing
    the ideal part whenever the map is well defined.
    """
    split = [target.split(img) for img in images]
    keys = sorted({k for s in split for k in s})
    offsets = {}
    width = 0
    for k in keys:
        offsets[k] = width
        width += target.piece(k).dim
    m = src.dim
    rows = []
    for i, s in enumerate(split):
        row = [0] * (width + m)
        for k, vec in s.items():
            o = offsets[k]
            row[o:o + len(vec)] = vec
        row[width + i] = 1
        rows.append(row)
    for k in keys:
        o = offsets[k]
        for r in target.piece(k).rows:
            row = [0] * (width + m)
            row[o:o + len(r)] = r
            rows.append(row)
    h = kernels.howell(rows, target.p, target.precision) if rows else []
    out = [r[width:] for r in h if not any(r[:width])]
    out.extend(list(r) for r in src.rows)
    return out
