"""Cell sites, stratifications and complexes of cellular sheaves.

A site is a finite poset of cells with signed covering incidences.  Open
sets are up-closed, closed sets down-closed.  A site may be non-compact
(for instance an open cone), in which case it is an up-set of some compact
regular cell complex and only the cells present are recorded.

Two finite models of derived sections are used:

* the cellular complex ``(+)_tau F(tau)^q`` in degree ``q + dim tau``; over a
  compact closed set it computes hypercohomology, over an up-set it
  computes cohomology with compact supports;
* the order complex: one copy of ``F(tau_n)`` per chain
  ``tau_0 < ... < tau_n``, which computes the derived limit over any
  locally closed cell set.
"""
from __future__ import annotations

from dataclasses import dataclass

from .complexes import (ChainMap, CochainComplex, ComplexError, cone, cone_map,
                        direct_sum, shift)
from .field import FieldError, active_field
from .linalg import Matrix, block_diag, hstack, solve_block_system, vstack


class SiteError(ValueError):
    """Invalid site, stratification or sheaf data."""


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


# sites -------------------------------------------------------------------------

class CellSite:
    """Cells with real dimensions and signed incidences ``[tau : sigma]``."""

    def __init__(self, names, dims, faces, compact: bool = True, complex_model: bool = False,
                 name: str = ""):
        self.name = name
        self.names = list(names)
        if len(set(self.names)) != len(self.names):
            raise SiteError("duplicate cell names")
        self.dims = [int(d) for d in dims]
        if len(self.dims) != len(self.names):
            raise SiteError("one dimension per cell is required")
        self.index = {c: i for i, c in enumerate(self.names)}
        self.compact = bool(compact)
        self.complex_model = bool(complex_model)
        n = len(self.names)
        self.faces = [dict() for _ in range(n)]
        self.cofaces = [dict() for _ in range(n)]
        for tau, fs in faces.items():
            t = self._idx(tau)
            for sigma, sign in fs.items():
                s = self._idx(sigma)
                if sign not in (1, -1):
                    raise SiteError(f"incidence [{tau}:{sigma}] must be +1 or -1")
                if self.dims[s] != self.dims[t] - 1:
                    raise SiteError(f"{sigma} is not a codimension-one face of {tau}")
                self.faces[t][s] = sign
                self.cofaces[s][t] = sign
        self._order()
        self._check_incidence()

    def _idx(self, c):
        if isinstance(c, int) and not isinstance(c, bool) and 0 <= c < len(self.names):
            return c
        try:
            return self.index[c]
        except KeyError:
            raise SiteError(f"unknown cell {c!r}") from None

    def _order(self):
        n = len(self.names)
        by_dim = sorted(range(n), key=lambda i: self.dims[i])
        self.down = [None] * n
        for i in by_dim:
            s = {i}
            for j in self.faces[i]:
                s |= self.down[j]
            self.down[i] = frozenset(s)
        self.up = [set() for _ in range(n)]
        for i in range(n):
            for j in self.down[i]:
                self.up[j].add(i)
        self.up = [frozenset(s) for s in self.up]

    def _check_incidence(self):
        for t in range(len(self.names)):
            acc = {}
            for s, a in self.faces[t].items():
                for r, b in self.faces[s].items():
                    acc[r] = acc.get(r, 0) + a * b
            bad = [r for r, v in acc.items() if v]
            if bad:
                raise SiteError(f"incidence signs fail d^2 = 0 on the pair "
                                f"({self.names[t]}, {self.names[bad[0]]})")
            if self.compact and self.dims[t] >= 1 and not self.faces[t]:
                raise SiteError(f"cell {self.names[t]} has empty boundary in a compact site")
            if self.compact and self.dims[t] == 1:
                signs = sorted(self.faces[t].values())
                if signs != [-1, 1]:
                    raise SiteError(f"edge {self.names[t]} needs two endpoints of opposite sign")

    def __len__(self):
        return len(self.names)

    @property
    def cells(self):
        return range(len(self.names))

    @property
    def dim(self) -> int:
        return max(self.dims) if self.dims else -1

    def leq(self, a, b) -> bool:
        return self._idx(a) in self.down[self._idx(b)]

    def star(self, c) -> frozenset:
        return self.up[self._idx(c)]

    def closure_of(self, c) -> frozenset:
        return self.down[self._idx(c)]

    def cellset(self, cells) -> frozenset:
        return frozenset(self._idx(c) for c in cells)

    def up_closure(self, S) -> frozenset:
        out = set()
        for i in S:
            out |= self.up[i]
        return frozenset(out)

    def down_closure(self, S) -> frozenset:
        out = set()
        for i in S:
            out |= self.down[i]
        return frozenset(out)

    def is_open(self, S) -> bool:
        return self.up_closure(S) == frozenset(S)

    def is_closed(self, S) -> bool:
        return self.down_closure(S) == frozenset(S)

    def is_locally_closed(self, S) -> bool:
        S = frozenset(S)
        return self.down_closure(S) & self.up_closure(S) == S

    def minimal(self, S):
        S = frozenset(S)
        return sorted(i for i in S if not (self.down[i] - {i}) & S)

    def all_cells(self) -> frozenset:
        return frozenset(self.cells)

    def chains(self, S):
        """All strictly increasing chains in ``S``, in a fixed order."""
        S = frozenset(S)
        ups = {i: sorted((self.up[i] - {i}) & S, key=self._key) for i in S}
        out = []

        def grow(ch):
            out.append(tuple(ch))
            for j in ups[ch[-1]]:
                ch.append(j)
                grow(ch)
                ch.pop()

        for i in sorted(S, key=self._key):
            grow([i])
        return out

    def _key(self, i):
        return (self.dims[i], i)

    def sorted_cells(self, S=None):
        S = self.cells if S is None else S
        return sorted(S, key=self._key)


@dataclass
class Stratification:
    """Cells grouped into strata, each with a declared complex dimension."""

    site: CellSite
    strata: dict  # name -> (frozenset of cell indices, complex dimension)

    def __post_init__(self):
        self.cell_stratum = [None] * len(self.site)
        for name, (cells, cdim) in self.strata.items():
            if cdim < 0:
                raise SiteError(f"stratum {name} has negative dimension")
            for c in cells:
                if self.cell_stratum[c] is not None:
                    raise SiteError(f"cell {self.site.names[c]} lies in two strata")
                self.cell_stratum[c] = name
                if self.site.dims[c] > 2 * cdim:
                    raise SiteError(f"cell {self.site.names[c]} too large for stratum {name}")
        missing = [self.site.names[i] for i, s in enumerate(self.cell_stratum) if s is None]
        if missing:
            raise SiteError(f"cells outside every stratum: {missing}")
        # frontier condition: the closure of a stratum is a union of strata
        for name, (cells, _) in self.strata.items():
            clo = self.site.down_closure(cells)
            for other, (ocells, _) in self.strata.items():
                inter = clo & ocells
                if inter and inter != ocells:
                    raise SiteError(f"frontier condition fails between {name} and {other}")

    @classmethod
    def build(cls, site, strata):
        return cls(site, {n: (site.cellset(cells), int(d)) for n, (cells, d) in strata.items()})

    @property
    def dim(self) -> int:
        return max((d for _, d in self.strata.values()), default=-1)

    def cdim(self, cell) -> int:
        return self.strata[self.cell_stratum[cell]][1]

    def names(self):
        return sorted(self.strata, key=lambda s: (-self.strata[s][1], s))

    def cells_of_dim(self, d):
        out = set()
        for cells, cd in self.strata.values():
            if cd == d:
                out |= cells
        return frozenset(out)

    def set_dim(self, S) -> float:
        """Largest complex dimension of a stratum meeting ``S`` (``-inf`` if empty)."""
        best = float("-inf")
        for c in S:
            best = max(best, self.cdim(c))
        return best


# sheaves -----------------------------------------------------------------------

class CellularSheafComplex:
    """A complex ``F(sigma)`` per cell with restriction chain maps along covers."""

    def __init__(self, site: CellSite, stalks, restrictions=None, field=None, check=True):
        self.site = site
        self.field = field if field is not None else active_field()
        if len(stalks) != len(site):
            raise SiteError("one complex per cell is required")
        self.stalks = list(stalks)
        for C in self.stalks:
            if C.field != self.field:
                raise FieldError("stalk complexes over different fields")
        self.restr = {}
        for (s, t), m in (restrictions or {}).items():
            s, t = site._idx(s), site._idx(t)
            if t not in site.faces[s] and s not in site.faces[t]:
                raise SiteError(f"{site.names[s]} < {site.names[t]} is not a covering pair")
            if s not in site.faces[t]:
                raise SiteError("restriction maps go from a face to a coface")
            if not isinstance(m, ChainMap):
                raise SiteError("restrictions must be chain maps")
            if check:
                ChainMap(self.stalks[s], self.stalks[t], m.comps)
            self.restr[(s, t)] = m
        self._rho = {}
        if check:
            self._check_diamonds()

    def _cover(self, s, t):
        m = self.restr.get((s, t))
        if m is None:
            return ChainMap.zero(self.stalks[s], self.stalks[t])
        return m

    def _check_diamonds(self):
        site = self.site
        for u in site.cells:
            # every codimension-two pair: all paths agree
            below2 = {}
            for t in site.faces[u]:
                for s in site.faces[t]:
                    below2.setdefault(s, []).append(t)
            for s, mids in below2.items():
                first = self._cover(mids[0], u) @ self._cover(s, mids[0])
                for t in mids[1:]:
                    other = self._cover(t, u) @ self._cover(s, t)
                    if not other == first:
                        raise SiteError(f"restrictions do not commute on "
                                        f"{site.names[s]} < {site.names[u]}")

    def rho(self, s, t) -> ChainMap:
        """Restriction ``F(s) -> F(t)`` for ``s <= t``."""
        if s == t:
            return ChainMap.identity(self.stalks[s])
        key = (s, t)
        m = self._rho.get(key)
        if m is not None:
            return m
        site = self.site
        if s not in site.down[t]:
            raise SiteError(f"{site.names[s]} is not a face of {site.names[t]}")
        mid = next(m_ for m_ in site.faces[t] if s in site.down[m_])
        m = self._cover(mid, t) @ self.rho(s, mid)
        self._rho[key] = m
        return m

    # constructors -----------------------------------------------------------
    @classmethod
    def constant(cls, site, degree=0, rank=1, cells=None, field=None):
        """Rank-``rank`` constant sheaf in ``degree`` on a locally closed set."""
        fld = field if field is not None else active_field()
        S = site.all_cells() if cells is None else site.cellset(cells)
        if not site.is_locally_closed(S):
            raise PreconditionError("support of a constant sheaf must be locally closed")
        stalks = [CochainComplex({degree: rank} if i in S else {}, {}, fld) for i in site.cells]
        restr = {}
        for t in site.cells:
            for s in site.faces[t]:
                if s in S and t in S:
                    restr[(s, t)] = ChainMap(stalks[s], stalks[t],
                                             {degree: Matrix.identity(rank, fld)}, check=False)
        return cls(site, stalks, restr, fld, check=False)

    @classmethod
    def local_system(cls, site, rank, twists, degree=0, field=None):
        """Constant rank except for the covering restrictions listed in ``twists``."""
        fld = field if field is not None else active_field()
        F = cls.constant(site, degree, rank, None, fld)
        restr = dict(F.restr)
        for (s, t), M in twists.items():
            s, t = site._idx(s), site._idx(t)
            restr[(s, t)] = ChainMap(F.stalks[s], F.stalks[t], {degree: M}, check=False)
        return cls(site, F.stalks, restr, fld)

    @classmethod
    def skyscraper(cls, site, cell, complex_: CochainComplex):
        c = site._idx(cell)
        fld = complex_.field
        stalks = [complex_ if i == c else CochainComplex.zero(fld) for i in site.cells]
        return cls(site, stalks, {}, fld, check=False)

    def shift(self, n: int) -> "CellularSheafComplex":
        from .complexes import shift_map
        return CellularSheafComplex(self.site, [shift(C, n) for C in self.stalks],
                                    {k: shift_map(m, n) for k, m in self.restr.items()},
                                    self.field, check=False)

    def restrict_extend(self, cells) -> "CellularSheafComplex":
        """``F_Z``: F on the locally closed set Z, zero elsewhere."""
        site = self.site
        Z = site.cellset(cells)
        if not site.is_locally_closed(Z):
            raise PreconditionError("Z must be locally closed")
        fld = self.field
        stalks = [C if i in Z else CochainComplex.zero(fld) for i, C in enumerate(self.stalks)]
        restr = {k: m for k, m in self.restr.items() if k[0] in Z and k[1] in Z}
        return CellularSheafComplex(site, stalks, restr, fld, check=False)

    def stalk_betti(self):
        return [C.betti() for C in self.stalks]

    def is_zero(self) -> bool:
        return all(C.is_zero() for C in self.stalks)

    def degree_range(self):
        lo = [C.lo for C in self.stalks if C.dims]
        hi = [C.hi for C in self.stalks if C.dims]
        return (min(lo), max(hi)) if lo else (0, -1)


def sheaf_direct_sum(*Fs: CellularSheafComplex) -> CellularSheafComplex:
    site = Fs[0].site
    fld = Fs[0].field
    from .complexes import direct_sum_maps
    stalks = [direct_sum(*[F.stalks[i] for F in Fs]) for i in site.cells]
    restr = {}
    for t in site.cells:
        for s in site.faces[t]:
            m = direct_sum_maps(*[F._cover(s, t) for F in Fs])
            restr[(s, t)] = ChainMap(stalks[s], stalks[t], m.comps, check=False)
    return CellularSheafComplex(site, stalks, restr, fld, check=False)


class SheafMap:
    """Cellwise chain maps commuting with restrictions."""

    def __init__(self, source: CellularSheafComplex, target: CellularSheafComplex, comps,
                 check=True):
        if source.site is not target.site:
            raise SiteError("sheaf map between different sites")
        self.source = source
        self.target = target
        self.comps = [c if isinstance(c, ChainMap) else ChainMap(source.stalks[i],
                                                                  target.stalks[i], c,
                                                                  check=check)
                      for i, c in enumerate(comps)]
        if check:
            site = source.site
            for t in site.cells:
                for s in site.faces[t]:
                    lhs = target._cover(s, t) @ self.comps[s]
                    rhs = self.comps[t] @ source._cover(s, t)
                    if not lhs == rhs:
                        raise SiteError(f"sheaf map is not natural on "
                                        f"{site.names[s]} < {site.names[t]}")

    @property
    def site(self):
        return self.source.site

    @classmethod
    def identity(cls, F):
        return cls(F, F, [ChainMap.identity(C) for C in F.stalks], check=False)

    @classmethod
    def zero(cls, F, G):
        return cls(F, G, [ChainMap.zero(a, b) for a, b in zip(F.stalks, G.stalks)], check=False)

    def __matmul__(self, other):
        return SheafMap(other.source, self.target,
                        [a @ b for a, b in zip(self.comps, other.comps)], check=False)

    def __sub__(self, other):
        return SheafMap(self.source, self.target,
                        [a - b for a, b in zip(self.comps, other.comps)], check=False)

    def is_quasi_iso(self) -> bool:
        return all(c.is_quasi_iso() for c in self.comps)

    def induces_zero(self) -> bool:
        """Zero on every cohomology sheaf (checked at every stalk)."""
        return all(c.induces_zero() for c in self.comps)


def sheaf_homotopic(f: SheafMap, g: SheafMap):
    """Cellwise homotopies compatible with restrictions, or None."""
    F, G = f.source, f.target
    site = F.site
    fld = F.field
    idx = {}
    shapes = []
    for i in site.cells:
        A, B = F.stalks[i], G.stalks[i]
        for k in sorted(A.dims):
            if B.dim(k - 1):
                idx[(i, k)] = len(shapes)
                shapes.append((B.dim(k - 1), A.dim(k)))
    eqs = []
    for i in site.cells:
        A, B = F.stalks[i], G.stalks[i]
        for k in sorted(set(A.dims) & set(B.dims)):
            terms = []
            if (i, k) in idx:
                terms.append((idx[(i, k)], B.diff(k - 1), None))
            if (i, k + 1) in idx:
                terms.append((idx[(i, k + 1)], None, A.diff(k)))
            eqs.append((terms, f.comps[i].comp(k) - g.comps[i].comp(k)))
    for t in site.cells:
        for s in site.faces[t]:
            rF, rG = F._cover(s, t), G._cover(s, t)
            for k in set(F.stalks[s].dims) | set(F.stalks[t].dims):
                terms = []
                if (s, k) in idx:
                    terms.append((idx[(s, k)], rG.comp(k - 1), None))
                if (t, k) in idx:
                    terms.append((idx[(t, k)], None, -rF.comp(k)))
                if terms:
                    C = Matrix.zeros(G.stalks[t].dim(k - 1), F.stalks[s].dim(k), fld)
                    eqs.append((terms, C))
    sol = solve_block_system(shapes, eqs, fld)
    if sol is None:
        return None
    return {key: sol[u] for key, u in idx.items()}


# total complexes -----------------------------------------------------------------

class _Total:
    """Bookkeeping for a total complex assembled from blocks ``(key, q)``."""

    def __init__(self, field):
        self.field = field
        self.blocks = {}  # degree -> list of (key, q, size)
        self.where = {}   # (key, q) -> (degree, offset, size)

    def add(self, key, q, degree, size):
        if size:
            self.blocks.setdefault(degree, []).append((key, q, size))

    def finish(self):
        for deg, bl in self.blocks.items():
            off = 0
            for key, q, size in bl:
                self.where[(key, q)] = (deg, off, size)
                off += size
        self.dims = {deg: sum(b[2] for b in bl) for deg, bl in self.blocks.items()}

    def assemble(self, contributions) -> CochainComplex:
        """``contributions`` yields ``(src_block, tgt_block, Matrix)``."""
        rows = {deg: [{} for _ in range(n)] for deg, n in self.dims.items()}
        for src, tgt, M in contributions:
            if src not in self.where or tgt not in self.where or M.is_zero():
                continue
            d0, o0, _ = self.where[src]
            d1, o1, _ = self.where[tgt]
            if d1 != d0 + 1:
                raise ComplexError("total complex contribution of the wrong degree")
            out = rows[d1]
            for i, r in enumerate(M.rows):
                tr = out[o1 + i]
                for j, v in r.items():
                    c = o0 + j
                    x = tr.get(c, 0) + v
                    if self.field.p:
                        x %= self.field.p
                    if x:
                        tr[c] = x
                    else:
                        tr.pop(c, None)
        d = {}
        for deg in self.dims:
            if deg + 1 in self.dims:
                d[deg] = Matrix(self.dims[deg + 1], self.dims[deg], rows[deg + 1], self.field)
        return CochainComplex(self.dims, d, self.field, check=False)

    def map_to(self, other: "_Total", pieces, source, target) -> ChainMap:
        """Chain map from blockwise ``pieces``: ``(src_block, tgt_block, Matrix)``."""
        rows = {deg: [{} for _ in range(n)] for deg, n in other.dims.items()}
        for src, tgt, M in pieces:
            if src not in self.where or tgt not in other.where:
                continue
            d0, o0, _ = self.where[src]
            d1, o1, _ = other.where[tgt]
            out = rows[d1]
            for i, r in enumerate(M.rows):
                tr = out[o1 + i]
                for j, v in r.items():
                    tr[o0 + j] = v
        comps = {}
        for deg in set(self.dims) & set(other.dims):
            comps[deg] = Matrix(other.dims[deg], self.dims[deg], rows[deg], self.field)
        return ChainMap(source, target, comps, check=False)


def _cellular_total(F: CellularSheafComplex, S):
    site = F.site
    T = _Total(F.field)
    cells = site.sorted_cells(S)
    for c in cells:
        C = F.stalks[c]
        for q in sorted(C.dims):
            T.add(c, q, q + site.dims[c], C.dim(q))
    T.finish()
    Sset = frozenset(S)

    def contrib():
        for c in cells:
            C = F.stalks[c]
            sign = -1 if site.dims[c] % 2 else 1
            for q in C.dims:
                yield (c, q), (c, q + 1), C.diff(q).scale(sign)
                for t, inc in site.cofaces[c].items():
                    if t in Sset:
                        yield (c, q), (t, q), F._cover(c, t).comp(q).scale(inc)

    return T, T.assemble(contrib())


def cellular_complex(F: CellularSheafComplex, cells=None) -> CochainComplex:
    """Cellular cochains of F over a locally closed cell set."""
    site = F.site
    S = site.all_cells() if cells is None else site.cellset(cells)
    if not site.is_locally_closed(S):
        raise PreconditionError("cellular complex needs a locally closed cell set")
    return _cellular_total(F, S)[1]


def _order_total(F: CellularSheafComplex, S):
    S = frozenset(S)
    cache = F.__dict__.setdefault("_ototal", {})
    hit = cache.get(S)
    if hit is None:
        hit = cache[S] = _order_total_build(F, S)
    return hit


def _order_total_build(F, S):
    site = F.site
    fld = F.field
    p = fld.p
    T = _Total(fld)
    chains = site.chains(S)
    for ch in chains:
        C = F.stalks[ch[-1]]
        n = len(ch) - 1
        for q in sorted(C.dims):
            T.add(ch, q, q + n, C.dim(q))
    T.finish()
    where = T.where
    rows = {deg: [{} for _ in range(m)] for deg, m in T.dims.items()}

    def put(src, tgt, M, sign):
        _, o0, _ = where[src]
        d1, o1, _ = where[tgt]
        out = rows[d1]
        for i, r in enumerate(M.rows):
            tr = out[o1 + i]
            for j, v in r.items():
                x = tr.get(o0 + j, 0) + (v if sign > 0 else -v)
                if p:
                    x %= p
                if x:
                    tr[o0 + j] = x
                else:
                    tr.pop(o0 + j, None)

    def put_id(src, tgt, size, sign):
        _, o0, _ = where[src]
        d1, o1, _ = where[tgt]
        out = rows[d1]
        v = fld.one if sign > 0 else -fld.one
        if p:
            v %= p
        for i in range(size):
            tr = out[o1 + i]
            x = tr.get(o0 + i, 0) + v
            if p:
                x %= p
            if x:
                tr[o0 + i] = x
            else:
                tr.pop(o0 + i, None)

    for ch in chains:
        C = F.stalks[ch[-1]]
        n = len(ch) - 1
        sign = -1 if n % 2 else 1
        for q in C.dims:
            if (ch, q + 1) in where and (ch, q) in where:
                put((ch, q), (ch, q + 1), C.diff(q), sign)
        if n == 0:
            continue
        # faces of ch: drop position i; the inserted element sat at position i
        for i in range(len(ch)):
            small = ch[:i] + ch[i + 1:]
            s = -1 if i % 2 else 1
            Cs = F.stalks[small[-1]]
            last = i == len(ch) - 1
            for q in Cs.dims:
                if (small, q) not in where or (ch, q) not in where:
                    continue
                if last:
                    put((small, q), (ch, q), F.rho(small[-1], ch[-1]).comp(q), s)
                else:
                    put_id((small, q), (ch, q), Cs.dim(q), s)
    d = {}
    for deg in T.dims:
        if deg + 1 in T.dims:
            d[deg] = Matrix(T.dims[deg + 1], T.dims[deg], rows[deg + 1], fld)
    return T, CochainComplex(T.dims, d, fld, check=False)


def order_complex(F: CellularSheafComplex, cells=None) -> CochainComplex:
    """Derived limit of F over a cell set (any subposet)."""
    site = F.site
    S = site.all_cells() if cells is None else site.cellset(cells)
    return _order_total(F, S)[1]


def _model(F, S):
    """Pick the cheapest correct model of hypercohomology over ``S``."""
    site = F.site
    mins = site.minimal(S)
    if len(mins) == 1 and all(mins[0] in site.down[c] for c in S):
        return "stalk", mins[0]
    if site.compact and site.is_closed(S):
        return "cellular", None
    return "order", None


def hyper(F: CellularSheafComplex, cells=None) -> CochainComplex:
    """A complex computing ``H^*(S; F)`` for a locally closed cell set S."""
    site = F.site
    S = site.all_cells() if cells is None else site.cellset(cells)
    if not S:
        return CochainComplex.zero(F.field)
    if not site.is_locally_closed(S):
        raise PreconditionError("hypercohomology needs a locally closed cell set")
    kind, m = _model(F, S)
    if kind == "stalk":
        return F.stalks[m]
    if kind == "cellular":
        return _cellular_total(F, S)[1]
    return _order_total(F, S)[1]


def hyper_map(phi: SheafMap, cells=None) -> ChainMap:
    """The chain map induced by a sheaf map on the model chosen by :func:`hyper`."""
    F, G = phi.source, phi.target
    site = F.site
    S = site.all_cells() if cells is None else site.cellset(cells)
    if not S:
        return ChainMap.zero(CochainComplex.zero(F.field), CochainComplex.zero(F.field))
    kind, m = _model(F, S)
    if kind == "stalk":
        return phi.comps[m]
    build = _cellular_total if kind == "cellular" else _order_total
    TF, CF = build(F, S)
    TG, CG = build(G, S)
    pieces = []
    for (key, q) in TF.where:
        last = key if kind == "cellular" else key[-1]
        pieces.append(((key, q), (key, q), phi.comps[last].comp(q)))
    return TF.map_to(TG, pieces, CF, CG)


def global_sections_complex(F: CellularSheafComplex, cells=None) -> CochainComplex:
    """Hypercohomology complex over an open cell set."""
    site = F.site
    S = site.all_cells() if cells is None else site.cellset(cells)
    if not site.is_open(S):
        raise PreconditionError("global sections are taken over an open cell set")
    return hyper(F, S)


def order_projection(F: CellularSheafComplex, S, S2):
    """Restriction of derived limits along ``S2 subset S`` with both complexes."""
    site = F.site
    S, S2 = frozenset(S), frozenset(S2)
    if not S2 <= S:
        raise PreconditionError("projection needs a subset")
    T1, C1 = _order_total(F, S)
    T2, C2 = _order_total(F, S2)
    pieces = [((k, q), (k, q), Matrix.identity(sz, F.field))
              for (k, q), (_, _, sz) in T2.where.items()]
    return T1.map_to(T2, pieces, C1, C2)


def coaugmentation(F: CellularSheafComplex, cell, S) -> ChainMap:
    """``F(cell) -> order complex over S`` (S inside the star of ``cell``)."""
    site = F.site
    c = site._idx(cell)
    S = frozenset(S)
    T, C = _order_total(F, S)
    src = F.stalks[c]
    Ts = _Total(F.field)
    for q in sorted(src.dims):
        Ts.add("pt", q, q, src.dim(q))
    Ts.finish()
    pieces = [(("pt", q), ((t,), q), F.rho(c, t).comp(q)) for t in S for q in src.dims]
    return Ts.map_to(T, pieces, src, C)


# relative, compact supports, stalks and costalks ---------------------------------

def relative_hyper(F: CellularSheafComplex, closed_cells) -> CochainComplex:
    """``H^*(X, Z; F)`` as ``cone(RG(X) -> RG(Z))[-1]``."""
    site = F.site
    Z = site.cellset(closed_cells)
    if not site.is_closed(Z):
        raise PreconditionError("Z must be a closed cell set")
    X = site.all_cells()
    if site.compact:
        TX, CX = _cellular_total(F, X)
        TZ, CZ = _cellular_total(F, Z)
        pieces = [((k, q), (k, q), Matrix.identity(sz, F.field))
                  for (k, q), (_, _, sz) in TZ.where.items()]
        proj = TX.map_to(TZ, pieces, CX, CZ)
    else:
        proj = order_projection(F, X, Z)
    M, _ = cone(proj)
    return shift(M, -1)


def compact_supports(F: CellularSheafComplex, open_cells) -> CochainComplex:
    site = F.site
    U = site.cellset(open_cells)
    if not site.is_open(U):
        raise PreconditionError("U must be open")
    if not site.compact:
        raise PreconditionError("compact supports need a compact ambient site")
    return relative_hyper(F, site.all_cells() - U)


def stalk(F: CellularSheafComplex, cell) -> CochainComplex:
    return F.stalks[F.site._idx(cell)]


def costalk(F: CellularSheafComplex, cell) -> CochainComplex:
    """Sections supported at a point of ``cell``: compact-support cochains of its star."""
    return _cellular_total(F, F.site.star(cell))[1]


def costalk_pair(F: CellularSheafComplex, cell) -> CochainComplex:
    """``H^*(st c, st c - c; F)``; equals ``costalk(F, c)`` shifted by ``dim c``."""
    site = F.site
    c = site._idx(cell)
    return local_cohomology(F, c, {c})


def local_cohomology(F: CellularSheafComplex, cell, removed) -> CochainComplex:
    """``H^*(st c, st c - R; F)`` for a set R of cells containing ``cell``."""
    site = F.site
    c = site._idx(cell)
    rest = site.star(c) - frozenset(removed)
    M, _ = cone(coaugmentation(F, c, rest))
    return shift(M, -1)


def punctured_star(F: CellularSheafComplex, cell) -> CochainComplex:
    site = F.site
    c = site._idx(cell)
    return order_complex(F, site.star(c) - {c})


def punctured_euler(F: CellularSheafComplex, cell) -> int:
    """Euler characteristic of sections on a small punctured ball around a point of ``cell``."""
    return stalk(F, cell).euler() - costalk(F, cell).euler()


def costalk_map(phi: SheafMap, cell) -> ChainMap:
    S = phi.site.star(cell)
    TF, CF = _cellular_total(phi.source, S)
    TG, CG = _cellular_total(phi.target, S)
    pieces = [((k, q), (k, q), phi.comps[k].comp(q)) for (k, q) in TF.where]
    return TF.map_to(TG, pieces, CF, CG)


# pushforward, supports and triangles -------------------------------------------------

def open_pushforward(F: CellularSheafComplex, open_cells) -> CellularSheafComplex:
    """``Ri_* i^* F`` for the inclusion of an open cell set."""
    site = F.site
    U = site.cellset(open_cells)
    if not site.is_open(U):
        raise PreconditionError("pushforward is along an open inclusion")
    totals = [_order_total(F, site.star(c) & U) for c in site.cells]
    stalks = [C for _, C in totals]
    restr = {}
    for t in site.cells:
        for s in site.faces[t]:
            Ts, Cs = totals[s]
            Tt, Ct = totals[t]
            pieces = [((k, q), (k, q), Matrix.identity(sz, F.field))
                      for (k, q), (_, _, sz) in Tt.where.items()]
            restr[(s, t)] = Ts.map_to(Tt, pieces, Cs, Ct)
    return CellularSheafComplex(site, stalks, restr, F.field, check=False)


def pushforward_unit(F: CellularSheafComplex, open_cells) -> SheafMap:
    """The adjunction map ``F -> Ri_* i^* F``."""
    site = F.site
    U = site.cellset(open_cells)
    G = open_pushforward(F, U)
    comps = [coaugmentation(F, c, site.star(c) & U) for c in site.cells]
    comps = [ChainMap(F.stalks[c], G.stalks[c], m.comps, check=False)
             for c, m in zip(site.cells, comps)]
    return SheafMap(F, G, comps, check=False)


def extension_map(F: CellularSheafComplex, Z1, Z2) -> SheafMap:
    """The canonical map ``F_{Z1} -> F_{Z2}``: identity on ``Z1 & Z2``.

    Natural when ``Z1 & Z2`` is open in ``Z1`` and closed in ``Z2``.
    """
    site = F.site
    Z1, Z2 = site.cellset(Z1), site.cellset(Z2)
    A, B = F.restrict_extend(Z1), F.restrict_extend(Z2)
    comps = [ChainMap.identity(F.stalks[c]) if c in Z1 and c in Z2
             else ChainMap.zero(A.stalks[c], B.stalks[c]) for c in site.cells]
    comps = [ChainMap(A.stalks[c], B.stalks[c], m.comps, check=False)
             for c, m in zip(site.cells, comps)]
    return SheafMap(A, B, comps)


def sheaf_cone(phi: SheafMap):
    """Cellwise mapping cone with the maps ``G -> cone`` and ``cone -> F[1]``."""
    F, G = phi.source, phi.target
    site = F.site
    cones = [cone(m) for m in phi.comps]
    stalks = [M for M, _ in cones]
    restr = {}
    for t in site.cells:
        for s in site.faces[t]:
            restr[(s, t)] = cone_map(F._cover(s, t), G._cover(s, t), phi.comps[s], phi.comps[t])
    C = CellularSheafComplex(site, stalks, restr, F.field, check=False)
    F1 = F.shift(1)
    g = SheafMap(G, C, [ChainMap(G.stalks[i], C.stalks[i], T.g.comps, check=False)
                        for i, (_, T) in enumerate(cones)], check=False)
    h = SheafMap(C, F1, [ChainMap(C.stalks[i], F1.stalks[i], T.h.comps, check=False)
                         for i, (_, T) in enumerate(cones)], check=False)
    return C, g, h


def _support_ambient(site, Z):
    U = site.up_closure(Z)
    if not site.down_closure(Z) & U == Z:
        raise PreconditionError("Z must be locally closed")
    return U


def gamma_supported(F: CellularSheafComplex, cells, within=None) -> CochainComplex:
    """``RGamma_Z`` of global sections, computed inside an open set containing Z as closed."""
    return gamma_parts(F, cells, within)[0]


def gamma_parts(F, cells, within=None):
    site = F.site
    Z = site.cellset(cells)
    U = site.all_cells() if within is None else site.cellset(within)
    if not site.is_open(U) or not Z <= U:
        raise PreconditionError("Z must lie in the open set U")
    if not site.is_closed(Z | (site.all_cells() - U)):
        raise PreconditionError("Z must be closed in U")
    proj = order_projection(F, U, U - Z)
    M, _ = cone(proj)
    return shift(M, -1), proj, U


def gamma_restriction(F, Z_big, Z_small, within):
    """``RGamma_{Z_small} -> RGamma_{Z_big}`` inside the same open set (Z_small subset Z_big)."""
    site = F.site
    U = site.cellset(within)
    Zb, Zs = site.cellset(Z_big), site.cellset(Z_small)
    p_small = order_projection(F, U, U - Zs)
    p_big = order_projection(F, U, U - Zb)
    down = order_projection(F, U - Zs, U - Zb)
    return shift_cone_map(ChainMap.identity(p_small.source), down, p_small, p_big)


def shift_cone_map(a, b, f, f2) -> ChainMap:
    from .complexes import shift_map
    return shift_map(cone_map(a, b, f, f2), -1)


def gamma_to_open(F, Z, within, V):
    """``RGamma_Z`` (inside ``within``) to ``RGamma_{Z & V}`` inside the open ``V``."""
    site = F.site
    U = site.cellset(within)
    V = site.cellset(V)
    Z = site.cellset(Z)
    p1 = order_projection(F, U, U - Z)
    p2 = order_projection(F, V, V - Z)
    a = order_projection(F, U, V)
    b = order_projection(F, U - Z, V - Z)
    return shift_cone_map(a, b, p1, p2)


def localization_triangles(F: CellularSheafComplex, open_cells):
    """Both localization triangles for ``U`` open and ``Y = X - U``.

    Returns a dict with the sheaf-level maps and the verdicts comparing
    their hypercohomology with the pairs ``(X, Y)`` and ``(X, U)``.
    """
    from .complexes import is_quasi_iso, les_dims_consistent
    site = F.site
    U = site.cellset(open_cells)
    if not site.is_open(U):
        raise PreconditionError("U must be open")
    X = site.all_cells()
    Y = X - U
    # F_U -> F -> F_Y
    i_u = extension_map(F, U, X)
    p_y = extension_map(F, X, Y)
    C1, g1, _ = sheaf_cone(i_u)
    cmp1 = SheafMap(C1, p_y.target,
                    [ChainMap(C1.stalks[c], p_y.target.stalks[c],
                              {k: hstack([Matrix.zeros(p_y.target.stalks[c].dim(k),
                                                       i_u.source.stalks[c].dim(k + 1),
                                                       F.field),
                                          p_y.comps[c].comp(k)],
                                         p_y.target.stalks[c].dim(k), F.field)
                               for k in C1.stalks[c].dims}, check=False)
                     for c in site.cells])
    first_ok = cmp1.is_quasi_iso()
    hx = hyper(F)
    rel_y = relative_hyper(F, Y) if Y else hx
    first_ok &= hyper(i_u.source).betti() == rel_y.betti()
    first_ok &= les_dims_consistent(hyper_map(i_u), hyper_map(p_y))
    # Gamma_Y F -> F -> Rj_* j^* F
    unit = pushforward_unit(F, U)
    C2, g2, h2 = sheaf_cone(unit)
    gam = C2.shift(-1)
    second_ok = hyper(unit.target).betti() == (hyper(F, U).betti() if U else {})
    g_y = gamma_supported(F, Y) if Y else CochainComplex.zero(F.field)
    second_ok &= hyper(gam).betti() == g_y.betti()
    second_ok &= les_dims_consistent(hyper_map(unit), hyper_map(g2))
    return {"extension": (i_u, p_y, first_ok), "sections": (unit, gam, second_ok)}


def mayer_vietoris_exact(F: CellularSheafComplex, U, V) -> bool:
    """Rank check of the Mayer-Vietoris sequence for an open cover ``U, V``."""
    from .complexes import les_dims_consistent
    site = F.site
    U, V = site.cellset(U), site.cellset(V)
    if not (site.is_open(U) and site.is_open(V)) or U | V != site.all_cells():
        raise PreconditionError("U and V must be an open cover")
    X = site.all_cells()
    W = U & V
    pU = order_projection(F, X, U)
    pV = order_projection(F, X, V)
    qU = order_projection(F, U, W)
    qV = order_projection(F, V, W)
    mid = direct_sum(pU.target, pV.target)
    f = ChainMap(pU.source, mid, {k: vstack([pU.comp(k), pV.comp(k)], pU.source.dim(k),
                                            F.field) for k in pU.source.dims})
    g = ChainMap(mid, qU.target, {k: hstack([qU.comp(k), -qV.comp(k)], qU.target.dim(k),
                                            F.field) for k in mid.dims})
    return les_dims_consistent(f, g)


def excision_holds(F: CellularSheafComplex, Z, U) -> bool:
    """``H(X, X - Z) = H(U, U - Z)`` dimensionwise for Z closed inside open U."""
    return gamma_supported(F, Z).betti() == gamma_supported(F, Z, within=U).betti()


def sheaf_hyper_betti(F) -> dict:
    return hyper(F).betti()


__all__ = [
    "CellSite", "CellularSheafComplex", "PreconditionError", "SheafMap", "SiteError",
    "Stratification", "cellular_complex", "compact_supports", "costalk", "costalk_map",
    "costalk_pair", "excision_holds", "extension_map", "gamma_supported", "global_sections_complex",
    "hyper", "hyper_map", "local_cohomology", "localization_triangles", "mayer_vietoris_exact",
    "open_pushforward", "order_complex", "punctured_euler", "punctured_star", "pushforward_unit",
    "relative_hyper", "sheaf_cone", "sheaf_direct_sum", "sheaf_homotopic", "stalk",
]
