# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernels.  Same interface as ``_kernels_py``."""

import numpy as np

# mod-p inputs up to this many entries are reduced densely; the RREF is unique
# so the result matches the sparse path exactly
DENSE_LIMIT = 4_000_000


def _sparse_modp_via_dense(rows, Py_ssize_t ncols, long long p):
    rows = [r for r in rows if r]
    A = np.zeros((len(rows), ncols), dtype=np.int64)
    cdef long long[:, ::1] Av = A
    cdef Py_ssize_t i, j, k
    for i, r in enumerate(rows):
        for j, v in r.items():
            Av[i, j] = v % p
    pivots = rref_dense_modp(Av, p)
    out = []
    for k in range(len(pivots)):
        out.append({int(j): int(Av[k, j]) for j in np.flatnonzero(A[k])})
    return out, pivots


def rref_sparse(rows, Py_ssize_t ncols, long long p=0):
    if p and len(rows) * ncols <= DENSE_LIMIT:
        return _sparse_modp_via_dense(rows, ncols, p)
    cdef dict piv = {}
    cdef dict row, orow, prow
    cdef Py_ssize_t c
    for src in rows:
        if not src:
            continue
        row = dict(src)
        for c in [c for c in row if c in piv]:
            a = row[c]
            prow = piv[c]
            for j, v in prow.items():
                x = row.get(j, 0) - a * v
                if p:
                    x %= p
                if x:
                    row[j] = x
                else:
                    del row[j]
        if not row:
            continue
        c = min(row)
        a = row[c]
        if p:
            inv = pow(a, -1, p)
            row = {j: v * inv % p for j, v in row.items()}
        else:
            row = {j: v / a for j, v in row.items()}
        for orow in piv.values():
            a = orow.get(c)
            if a:
                for j, v in row.items():
                    x = orow.get(j, 0) - a * v
                    if p:
                        x %= p
                    if x:
                        orow[j] = x
                    else:
                        del orow[j]
        piv[c] = row
    cols = sorted(piv)
    return [piv[k] for k in cols], cols


cdef long long _inv(long long a, long long p):
    cdef long long t = 0, newt = 1, r = p, newr = a % p, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_dense_modp(long long[:, ::1] A, long long p):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t r = 0, i, j, c, piv
    cdef long long inv, f, tmp
    pivots = []
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if A[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, n):
                tmp = A[r, j]
                A[r, j] = A[piv, j]
                A[piv, j] = tmp
        inv = _inv(A[r, c], p)
        for j in range(c, n):
            A[r, j] = A[r, j] * inv % p
        for i in range(m):
            if i != r and A[i, c] != 0:
                f = A[i, c]
                for j in range(c, n):
                    if A[r, j] != 0:
                        A[i, j] = (A[i, j] - f * A[r, j]) % p
                        if A[i, j] < 0:
                            A[i, j] += p
        pivots.append(c)
        r += 1
    return pivots
