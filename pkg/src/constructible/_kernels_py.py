"""Pure-Python elimination kernels (fallback for the compiled ``_kernels``).

Both modules expose the same two functions; ``constructible.kernels``
picks one at import time.
"""
from __future__ import annotations

import numpy as np


def rref_sparse(rows, ncols, p=0):
    """Fully reduce a list of sparse rows ``{col: value}``.

    ``p == 0`` means exact rationals (values are mpq), otherwise values
    are ints mod ``p``.  Returns ``(pivot_rows, pivot_cols)`` where
    ``pivot_rows[k]`` has a 1 in column ``pivot_cols[k]`` and zeros in every
    other pivot column.  Pivot columns come out sorted.
    """
    piv = {}
    for src in rows:
        if not src:
            continue
        row = dict(src)
        for c in [c for c in row if c in piv]:
            a = row[c]
            for j, v in piv[c].items():
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
    return [piv[c] for c in cols], cols


def rref_dense_modp(A, p):
    """In-place reduced row echelon form of an int64 array mod ``p``.

    Returns the list of pivot columns; the first ``len(pivots)`` rows of
    ``A`` hold the reduced pivot rows.
    """
    m, n = A.shape
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = A[r, c:] * inv % p
        col = A[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            A[rows, c:] = (A[rows, c:] - np.outer(col[rows], A[r, c:])) % p
        pivots.append(c)
        r += 1
    return pivots
