"""Pure-Python elimination kernels over Z/p^n and F_p.

These mirror the compiled kernels in ``_kernels.pyx`` exactly, including
tie-breaking, so both backends return identical normal forms.
"""


def _val(x, p):
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def howell(rows, p, n):
    """Howell normal form of the row span of ``rows`` over Z/p^n.

    Returns a list of nonzero rows with strictly increasing pivot columns.
    The pivot of each row is a power p^v (0 <= v < n), entries above a pivot
    lie in [0, p^v), and for each pivot row r with v > 0 the row p^(n - v) r
    is in the span of the rows below. This makes the form unique per span.
    """
    q = p ** n
    pool = [[x % q for x in r] for r in rows]
    pool = [r for r in pool if any(r)]
    if not pool:
        return []
    k = len(pool[0])
    out = []
    pivcols = []
    pivvals = []
    for c in range(k):
        best = -1
        bestv = n
        for idx, r in enumerate(pool):
            x = r[c]
            if x:
                v = _val(x, p)
                if v < bestv:
                    bestv = v
                    best = idx
                    if v == 0:
                        break
        if best < 0:
            continue
        r = pool[best]
        last = pool.pop()
        if best < len(pool):
            pool[best] = last
        pv = p ** bestv
        u = r[c] // pv
        inv = pow(u, -1, q)
        if inv != 1:
            r = [(x * inv) % q for x in r]
        for s in pool:
            y = s[c]
            if y:
                f = y // pv
                for j in range(c, k):
                    if r[j]:
                        s[j] = (s[j] - f * r[j]) % q
        if bestv > 0:
            m = p ** (n - bestv)
            extra = [(x * m) % q for x in r]
            if any(extra):
                pool.append(extra)
        pool = [s for s in pool if any(s)]
        out.append(r)
        pivcols.append(c)
        pivvals.append(pv)
    # back-reduce entries above each pivot
    for a in range(len(out)):
        c = pivcols[a]
        pv = pivvals[a]
        ra = out[a]
        for b in range(a):
            rb = out[b]
            y = rb[c]
            if y >= pv:
                f = y // pv
                for j in range(c, k):
                    if ra[j]:
                        rb[j] = (rb[j] - f * ra[j]) % q
    return out


def rank_mod_p(rows, ncols, p):
    """Rank of a matrix over F_p."""
    mat = [[x % p for x in r] for r in rows]
    mat = [r for r in mat if any(r)]
    rank = 0
    for c in range(ncols):
        piv = -1
        for i in range(rank, len(mat)):
            if mat[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        r = mat[rank]
        inv = pow(r[c], -1, p)
        if inv != 1:
            r = [(x * inv) % p for x in r]
            mat[rank] = r
        for i in range(rank + 1, len(mat)):
            s = mat[i]
            f = s[c]
            if f:
                for j in range(c, ncols):
                    if r[j]:
                        s[j] = (s[j] - f * r[j]) % p
        rank += 1
        if rank == len(mat):
            break
    return rank
