# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernels. Same algorithm and tie-breaking as _pykernels."""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

ctypedef long long i64

# moduli must satisfy q * q < 2**63
MAX_MODULUS = 3037000499


cdef inline i64 _mod(i64 a, i64 q) nogil:
    a %= q
    if a < 0:
        a += q
    return a


cdef i64 _inv(i64 a, i64 m) nogil:
    cdef i64 t = 0, nt = 1, r = m, nr = a, qq, tmp
    while nr != 0:
        qq = r // nr
        tmp = t - qq * nt
        t = nt
        nt = tmp
        tmp = r - qq * nr
        r = nr
        nr = tmp
    if t < 0:
        t += m
    return t


cdef inline int _val(i64 x, i64 p) nogil:
    cdef int v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


cdef inline bint _nonzero(i64* row, int k) nogil:
    cdef int j
    for j in range(k):
        if row[j] != 0:
            return True
    return False


def howell(rows, long long p, int n):
    # compare as Python ints so large p^n cannot wrap around
    if (<object>p) ** n > MAX_MODULUS:
        from . import _pykernels
        return _pykernels.howell(rows, p, n)
    cdef i64 q = p ** n
    cdef int i
    rows = list(rows)
    cdef int m = len(rows)
    if m == 0:
        return []
    cdef int k = len(rows[0])
    if k == 0:
        return []
    cdef int cap = m + k + 1
    cdef i64* buf = <i64*> malloc(cap * k * sizeof(i64))
    cdef int* pool = <int*> malloc(cap * sizeof(int))
    cdef int* outrows = <int*> malloc((k + 1) * sizeof(int))
    cdef int* pivcols = <int*> malloc((k + 1) * sizeof(int))
    cdef i64* pivvals = <i64*> malloc((k + 1) * sizeof(i64))
    if buf == NULL or pool == NULL or outrows == NULL or pivcols == NULL or pivvals == NULL:
        free(buf); free(pool); free(outrows); free(pivcols); free(pivvals)
        raise MemoryError()
    cdef int npool = 0, nslots = 0, nout = 0
    cdef int c, j, idx, best, bestv, v, a, b, s
    cdef i64 x, y, f, pv, u, inv, mult
    cdef i64* r
    cdef i64* sr
    try:
        for i in range(m):
            row = rows[i]
            r = buf + nslots * k
            for j in range(k):
                r[j] = <i64> (row[j] % q)
            if _nonzero(r, k):
                pool[npool] = nslots
                npool += 1
                nslots += 1
        with nogil:
            for c in range(k):
                best = -1
                bestv = n
                for idx in range(npool):
                    x = buf[pool[idx] * k + c]
                    if x != 0:
                        v = _val(x, p)
                        if v < bestv:
                            bestv = v
                            best = idx
                            if v == 0:
                                break
                if best < 0:
                    continue
                a = pool[best]
                npool -= 1
                if best < npool:
                    pool[best] = pool[npool]
                r = buf + a * k
                pv = 1
                for i in range(bestv):
                    pv *= p
                u = r[c] // pv
                inv = _inv(_mod(u, q), q)
                if inv != 1:
                    for j in range(c, k):
                        r[j] = (r[j] * inv) % q
                for idx in range(npool):
                    sr = buf + pool[idx] * k
                    y = sr[c]
                    if y != 0:
                        f = y // pv
                        for j in range(c, k):
                            if r[j] != 0:
                                sr[j] = _mod(sr[j] - (f * r[j]) % q, q)
                if bestv > 0:
                    mult = q // pv
                    sr = buf + nslots * k
                    for j in range(k):
                        sr[j] = (r[j] * mult) % q
                    if _nonzero(sr, k):
                        pool[npool] = nslots
                        npool += 1
                        nslots += 1
                # drop zero rows from the pool
                s = 0
                for idx in range(npool):
                    if _nonzero(buf + pool[idx] * k, k):
                        pool[s] = pool[idx]
                        s += 1
                npool = s
                outrows[nout] = a
                pivcols[nout] = c
                pivvals[nout] = pv
                nout += 1
            for a in range(nout):
                c = pivcols[a]
                pv = pivvals[a]
                r = buf + outrows[a] * k
                for b in range(a):
                    sr = buf + outrows[b] * k
                    y = sr[c]
                    if y >= pv:
                        f = y // pv
                        for j in range(c, k):
                            if r[j] != 0:
                                sr[j] = _mod(sr[j] - (f * r[j]) % q, q)
        result = []
        for a in range(nout):
            r = buf + outrows[a] * k
            result.append([r[j] for j in range(k)])
        return result
    finally:
        free(buf); free(pool); free(outrows); free(pivcols); free(pivvals)


def rank_mod_p(rows, int ncols, long long p):
    if p > MAX_MODULUS:
        from . import _pykernels
        return _pykernels.rank_mod_p(rows, ncols, p)
    rows = list(rows)
    cdef int m = len(rows)
    if m == 0 or ncols == 0:
        return 0
    cdef i64* buf = <i64*> malloc(m * ncols * sizeof(i64))
    if buf == NULL:
        raise MemoryError()
    cdef int i, j, c, piv, rank = 0
    cdef i64 inv, f
    cdef i64* r
    cdef i64* sr
    cdef i64* tmp = <i64*> malloc(ncols * sizeof(i64))
    try:
        for i in range(m):
            row = rows[i]
            for j in range(ncols):
                buf[i * ncols + j] = <i64> (row[j] % p)
        with nogil:
            for c in range(ncols):
                piv = -1
                for i in range(rank, m):
                    if buf[i * ncols + c] != 0:
                        piv = i
                        break
                if piv < 0:
                    continue
                if piv != rank:
                    memcpy(tmp, buf + piv * ncols, ncols * sizeof(i64))
                    memcpy(buf + piv * ncols, buf + rank * ncols, ncols * sizeof(i64))
                    memcpy(buf + rank * ncols, tmp, ncols * sizeof(i64))
                r = buf + rank * ncols
                inv = _inv(r[c], p)
                if inv != 1:
                    for j in range(c, ncols):
                        r[j] = (r[j] * inv) % p
                for i in range(rank + 1, m):
                    sr = buf + i * ncols
                    f = sr[c]
                    if f != 0:
                        for j in range(c, ncols):
                            if r[j] != 0:
                                sr[j] = _mod(sr[j] - f * r[j], p)
                rank += 1
                if rank == m:
                    break
        return rank
    finally:
        free(buf); free(tmp)
