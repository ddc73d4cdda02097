"""Sparse exact matrices over the active field.

A :class:`Matrix` stores one ``{col: value}`` dict per row with zeros
omitted.  Instances are treated as immutable; the row echelon form is
computed once and cached.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .field import Field, FieldError, active_field

# dense mod-p elimination pays off only below this many entries
_DENSE_LIMIT = 6_000_000


class Matrix:
    __slots__ = ("nrows", "ncols", "rows", "field", "_ech")

    def __init__(self, nrows: int, ncols: int, rows=None, field: Field | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative matrix shape")
        self.nrows = nrows
        self.ncols = ncols
        self.field = field if field is not None else active_field()
        self.rows = rows if rows is not None else [{} for _ in range(nrows)]
        if len(self.rows) != nrows:
            raise ValueError("row count does not match shape")
        self._ech = None

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, nrows, ncols, field=None):
        return cls(nrows, ncols, None, field)

    @classmethod
    def identity(cls, n, field=None):
        f = field if field is not None else active_field()
        return cls(n, n, [{i: f.one} for i in range(n)], f)

    @classmethod
    def from_lists(cls, data, ncols=None, field=None):
        """Build from a dense list of rows; entries go through the field."""
        f = field if field is not None else active_field()
        data = [list(r) for r in data]
        if ncols is None:
            ncols = len(data[0]) if data else 0
        rows = []
        for r in data:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
            row = {}
            for j, x in enumerate(r):
                v = f(x)
                if v:
                    row[j] = v
            rows.append(row)
        return cls(len(rows), ncols, rows, f)

    @classmethod
    def from_columns(cls, cols, nrows, field=None):
        """Build from a list of sparse column dicts ``{row: value}``."""
        f = field if field is not None else active_field()
        rows = [{} for _ in range(nrows)]
        for j, col in enumerate(cols):
            for i, v in col.items():
                if v:
                    rows[i][j] = v
        return cls(nrows, len(cols), rows, f)

    @classmethod
    def scalar(cls, c, n, field=None):
        f = field if field is not None else active_field()
        c = f(c)
        if not c:
            return cls.zeros(n, n, f)
        return cls(n, n, [{i: c} for i in range(n)], f)

    # access ---------------------------------------------------------------
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i].get(j, self.field.zero)

    def to_lists(self):
        z = self.field.zero
        return [[r.get(j, z) for j in range(self.ncols)] for r in self.rows]

    def columns(self):
        cols = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def is_zero(self) -> bool:
        return not any(self.rows)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def _check(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if other.field != self.field:
            raise FieldError(f"mixing fields {self.field} and {other.field}")
        return True

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.shape == other.shape and self.field == other.field
                and self.rows == other.rows)

    __hash__ = None

    def __repr__(self):
        f = self.field
        body = "; ".join(" ".join(f.fmt(x) for x in r) for r in self.to_lists())
        return f"Matrix({self.nrows}x{self.ncols} over {f}: [{body}])"

    # arithmetic -----------------------------------------------------------
    def __matmul__(self, other):
        self._check(other)
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        p = self.field.p
        orows = other.rows
        out = []
        for r in self.rows:
            acc = {}
            for k, a in r.items():
                for j, b in orows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            if p:
                acc = {j: v % p for j, v in acc.items() if v % p}
            else:
                acc = {j: v for j, v in acc.items() if v}
            out.append(acc)
        return Matrix(self.nrows, other.ncols, out, self.field)

    def _combine(self, other, sign):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        p = self.field.p
        out = []
        for r, s in zip(self.rows, other.rows):
            acc = dict(r)
            for j, v in s.items():
                x = acc.get(j, 0) + sign * v
                if p:
                    x %= p
                if x:
                    acc[j] = x
                else:
                    acc.pop(j, None)
            out.append(acc)
        return Matrix(self.nrows, self.ncols, out, self.field)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        f = self.field
        c = f(c)
        if not c:
            return Matrix.zeros(self.nrows, self.ncols, f)
        return Matrix(self.nrows, self.ncols,
                      [{j: f.norm(v * c) for j, v in r.items()} for r in self.rows], f)

    @property
    def T(self):
        out = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                out[j][i] = v
        return Matrix(self.ncols, self.nrows, out, self.field)

    def select_rows(self, idx):
        return Matrix(len(idx), self.ncols, [dict(self.rows[i]) for i in idx], self.field)

    def select_cols(self, idx):
        pos = {j: k for k, j in enumerate(idx)}
        out = [{pos[j]: v for j, v in r.items() if j in pos} for r in self.rows]
        return Matrix(self.nrows, len(idx), out, self.field)

    # echelon form -----------------------------------------------------------
    def echelon(self):
        """Fully reduced pivot rows and their pivot columns (cached)."""
        if self._ech is None:
            self._ech = _echelon(self.rows, self.ncols, self.field)
        return self._ech

    def rank(self) -> int:
        return len(self.echelon()[1])

    def nullspace(self) -> Matrix:
        """Columns spanning ``{x : self @ x = 0}``."""
        prow, pcols = self.echelon()
        pset = set(pcols)
        free = [j for j in range(self.ncols) if j not in pset]
        fpos = {j: k for k, j in enumerate(free)}
        f = self.field
        out = [{} for _ in range(self.ncols)]
        for j in free:
            out[j][fpos[j]] = f.one
        for c, r in zip(pcols, prow):
            for j, v in r.items():
                if j in fpos:
                    out[c][fpos[j]] = f.norm(-v)
        return Matrix(self.ncols, len(free), out, f)

    def colspace(self) -> Matrix:
        """An independent set of columns of ``self`` spanning its image."""
        return self.select_cols(self.echelon()[1])

    def solve(self, B: Matrix):
        """Some ``X`` with ``self @ X == B``, or None when inconsistent."""
        self._check(B)
        if B.nrows != self.nrows:
            raise ValueError("right-hand side has wrong row count")
        n = self.ncols
        aug = [dict(r) for r in self.rows]
        for a, b in zip(aug, B.rows):
            for j, v in b.items():
                a[n + j] = v
        prow, pcols = _echelon(aug, n + B.ncols, self.field)
        if pcols and pcols[-1] >= n:
            return None
        out = [{} for _ in range(n)]
        for c, r in zip(pcols, prow):
            out[c] = {j - n: v for j, v in r.items() if j >= n}
        return Matrix(n, B.ncols, out, self.field)

    def inverse(self) -> Matrix:
        if self.nrows != self.ncols or self.rank() != self.nrows:
            raise ValueError("matrix is not invertible")
        return self.solve(Matrix.identity(self.nrows, self.field))

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows


def _echelon(rows, ncols, field):
    p = field.p
    m = len(rows)
    if p and kernels.BACKEND == "cython" and 0 < m * ncols <= _DENSE_LIMIT:
        A = np.zeros((m, ncols), dtype=np.int64)
        for i, r in enumerate(rows):
            for j, v in r.items():
                A[i, j] = v
        pcols = list(kernels.rref_dense_modp(A, p))
        prow = []
        for k in range(len(pcols)):
            nz = np.nonzero(A[k])[0]
            prow.append({int(j): int(A[k, j]) for j in nz})
        return prow, pcols
    return kernels.rref_sparse(rows, ncols, p or 0)


# helpers -------------------------------------------------------------------

def hstack(mats, nrows=None, field=None):
    mats = list(mats)
    f = field if field is not None else (mats[0].field if mats else active_field())
    if not mats:
        return Matrix.zeros(nrows or 0, 0, f)
    m = mats[0].nrows
    out = [{} for _ in range(m)]
    off = 0
    for M in mats:
        if M.nrows != m:
            raise ValueError("hstack row mismatch")
        for i, r in enumerate(M.rows):
            for j, v in r.items():
                out[i][off + j] = v
        off += M.ncols
    return Matrix(m, off, out, f)


def vstack(mats, ncols=None, field=None):
    mats = list(mats)
    f = field if field is not None else (mats[0].field if mats else active_field())
    if not mats:
        return Matrix.zeros(0, ncols or 0, f)
    n = mats[0].ncols
    out = []
    for M in mats:
        if M.ncols != n:
            raise ValueError("vstack column mismatch")
        out.extend(dict(r) for r in M.rows)
    return Matrix(len(out), n, out, f)


def block(grid, row_sizes, col_sizes, field=None):
    """Assemble a block matrix; ``None`` entries are zero blocks."""
    f = field if field is not None else active_field()
    roff = np.cumsum([0] + list(row_sizes)).tolist()
    coff = np.cumsum([0] + list(col_sizes)).tolist()
    out = [{} for _ in range(roff[-1])]
    for bi, brow in enumerate(grid):
        for bj, M in enumerate(brow):
            if M is None:
                continue
            if M.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block ({bi},{bj}) has shape {M.shape}, "
                                 f"expected {(row_sizes[bi], col_sizes[bj])}")
            for i, r in enumerate(M.rows):
                tgt = out[roff[bi] + i]
                for j, v in r.items():
                    tgt[coff[bj] + j] = v
    return Matrix(roff[-1], coff[-1], out, f)


def block_diag(mats, field=None):
    mats = list(mats)
    f = field if field is not None else (mats[0].field if mats else active_field())
    grid = [[M if i == j else None for j in range(len(mats))] for i, M in enumerate(mats)]
    return block(grid, [M.nrows for M in mats], [M.ncols for M in mats], f)


def complement_basis(S: Matrix) -> Matrix:
    """Standard basis columns completing the independent columns of ``S``."""
    _, pcols = S.T.echelon()
    taken = set(pcols)
    idx = [i for i in range(S.nrows) if i not in taken]
    f = S.field
    return Matrix.from_columns([{i: f.one} for i in idx], S.nrows, f)


def quotient_map(S: Matrix):
    """For independent columns ``S`` of k^m return ``(Q, E)``.

    ``Q`` is the projection k^m -> k^m / span(S) in the coordinates given by
    the complement ``E``; ``Q @ S == 0`` and ``Q @ E == I``.
    """
    S = S.colspace() if S.ncols else S
    E = complement_basis(S)
    M = hstack([S, E], S.nrows, S.field)
    Minv = M.inverse()
    Q = Minv.select_rows(list(range(S.ncols, S.nrows)))
    return Q, E


def kron(A: Matrix, B: Matrix) -> Matrix:
    """Kronecker product with row-major index ``(i, j) -> i * B.ncols + j``."""
    A._check(B)
    p = A.field.p
    out = [{} for _ in range(A.nrows * B.nrows)]
    for a, ra in enumerate(A.rows):
        for i, x in ra.items():
            for b, rb in enumerate(B.rows):
                tgt = out[a * B.nrows + b]
                for j, y in rb.items():
                    v = x * y
                    tgt[i * B.ncols + j] = v % p if p else v
    return Matrix(A.nrows * B.nrows, A.ncols * B.ncols, out, A.field)


def vec(M: Matrix) -> dict:
    """Row-major vectorisation as a sparse dict."""
    out = {}
    for i, r in enumerate(M.rows):
        for j, v in r.items():
            out[i * M.ncols + j] = v
    return out


def unvec(x: dict, nrows: int, ncols: int, field) -> Matrix:
    rows = [{} for _ in range(nrows)]
    for k, v in x.items():
        if v:
            rows[k // ncols][k % ncols] = v
    return Matrix(nrows, ncols, rows, field)


def solve_block_system(shapes, equations, field=None):
    """Solve ``sum L @ X[u] @ R == C`` for unknown matrices ``X[u]``.

    ``shapes[u] = (rows, cols)``; each equation is ``(terms, C)`` with
    ``terms`` a list of ``(u, L, R)`` (``None`` meaning identity).  Returns
    the list of unknowns or None if the system is inconsistent.
    """
    f = field if field is not None else active_field()
    p = f.p
    offs = []
    n = 0
    for r, c in shapes:
        offs.append(n)
        n += r * c
    sys_rows = []
    rhs = []
    for terms, C in equations:
        m_rows, m_cols = C.shape
        block_rows = [{} for _ in range(m_rows * m_cols)]
        for u, L, R in terms:
            r, c = shapes[u]
            if L is None:
                L = Matrix.identity(r, f)
            if R is None:
                R = Matrix.identity(c, f)
            if L.shape != (m_rows, r) or R.shape != (c, m_cols):
                raise ValueError("term shape mismatch in block system")
            Rrows = R.rows
            base = offs[u]
            for a, la in enumerate(L.rows):
                for i, x in la.items():
                    for j, rj in enumerate(Rrows):
                        for b, y in rj.items():
                            row = block_rows[a * m_cols + b]
                            k = base + i * c + j
                            v = row.get(k, 0) + x * y
                            if p:
                                v %= p
                            if v:
                                row[k] = v
                            else:
                                row.pop(k, None)
        sys_rows.extend(block_rows)
        cv = vec(C)
        rhs.extend(cv.get(k, f.zero) for k in range(m_rows * m_cols))
    if not sys_rows:
        return [Matrix.zeros(r, c, f) for r, c in shapes]
    A = Matrix(len(sys_rows), n, sys_rows, f)
    b = Matrix(len(rhs), 1, [{0: v} if v else {} for v in rhs], f)
    x = A.solve(b)
    if x is None:
        return None
    flat = {i: r[0] for i, r in enumerate(x.rows) if r}
    out = []
    for (r, c), o in zip(shapes, offs):
        part = {k - o: v for k, v in flat.items() if o <= k < o + r * c}
        out.append(unvec(part, r, c, f))
    return out
