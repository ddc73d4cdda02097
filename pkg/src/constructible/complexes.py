"""Bounded cochain complexes of finite-dimensional vector spaces.

Conventions: the shift ``A[n]`` has ``A[n]^k = A^{k+n}`` and differential
``(-1)^n d^{k+n}``; shifting a chain map applies no sign.  The mapping cone
of ``f: A -> B`` is ``A^{k+1} (+) B^k`` with ``d(a, b) = (-da, f a + db)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .field import Field, FieldError, active_field
from .linalg import (Matrix, block, block_diag, complement_basis, hstack, kron,
                     solve_block_system)


class ComplexError(ValueError):
    """Raised when complex or chain-map data violates an invariant."""


class CochainComplex:
    """``dims[k]`` is the dimension in degree k; ``d[k]: A^k -> A^{k+1}``."""

    __slots__ = ("dims", "d", "field", "_coh")

    def __init__(self, dims, d=None, field: Field | None = None, check: bool = True):
        self.field = field if field is not None else active_field()
        self.dims = {int(k): int(v) for k, v in dims.items() if v}
        self.d = {}
        self._coh = {}
        for k, M in (d or {}).items():
            k = int(k)
            if M.field != self.field:
                raise FieldError(f"differential over {M.field}, complex over {self.field}")
            if M.shape != (self.dim(k + 1), self.dim(k)):
                raise ComplexError(f"d^{k} has shape {M.shape}, expected "
                                   f"{(self.dim(k + 1), self.dim(k))}")
            if not M.is_zero():
                self.d[k] = M
        if check:
            for k in self.d:
                if k + 1 in self.d and not (self.d[k + 1] @ self.d[k]).is_zero():
                    raise ComplexError(f"d^{k + 1} d^{k} != 0")

    @classmethod
    def zero(cls, field=None):
        return cls({}, {}, field)

    @classmethod
    def point(cls, dim=1, degree=0, field=None):
        """``k^dim`` concentrated in one degree."""
        return cls({degree: dim}, {}, field)

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def diff(self, k: int) -> Matrix:
        M = self.d.get(k)
        if M is None:
            return Matrix.zeros(self.dim(k + 1), self.dim(k), self.field)
        return M

    @property
    def lo(self):
        return min(self.dims) if self.dims else None

    @property
    def hi(self):
        return max(self.dims) if self.dims else None

    def degrees(self):
        if not self.dims:
            return range(0)
        return range(self.lo, self.hi + 1)

    def is_zero(self) -> bool:
        return not self.dims

    def __eq__(self, other):
        if not isinstance(other, CochainComplex):
            return NotImplemented
        return (self.field == other.field and self.dims == other.dims
                and all(self.diff(k) == other.diff(k) for k in set(self.d) | set(other.d)))

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{k}:{v}" for k, v in sorted(self.dims.items()))
        return f"CochainComplex({{{body}}} over {self.field})"

    # cohomology ----------------------------------------------------------------
    def cohomology(self, p: int) -> "Cohomology":
        c = self._coh.get(p)
        if c is None:
            c = self._coh[p] = Cohomology(self, p)
        return c

    def betti(self) -> dict:
        """Nonzero cohomology dimensions by degree."""
        out = {}
        for p in self.degrees():
            h = self.cohomology(p).dim
            if h:
                out[p] = h
        return out

    def euler(self) -> int:
        return sum((-1) ** (p % 2) * h for p, h in self.betti().items())

    def is_acyclic(self) -> bool:
        return not self.betti()


class Cohomology:
    """Representative cocycles for ``H^p`` and the projection onto them."""

    def __init__(self, A: CochainComplex, p: int):
        self.complex = A
        self.degree = p
        n = A.dim(p)
        f = A.field
        Z = A.diff(p).nullspace()
        B = A.diff(p - 1).colspace()
        self.boundaries = B
        if Z.ncols == B.ncols:
            self.reps = Matrix.zeros(n, 0, f)
        else:
            X = Z.solve(B)
            E = complement_basis(X.colspace())
            self.reps = Z @ E
        self.dim = self.reps.ncols
        self._basis = None

    def project(self, z: Matrix) -> Matrix:
        """Coordinates of the classes of the cocycle columns ``z``."""
        if self.dim == 0:
            return Matrix.zeros(0, z.ncols, z.field)
        if self._basis is None:
            self._basis = hstack([self.boundaries, self.reps], self.complex.dim(self.degree),
                                 self.complex.field)
        y = self._basis.solve(z)
        if y is None:
            raise ComplexError("projecting a non-cocycle onto cohomology")
        return y.select_rows(list(range(self.boundaries.ncols, y.nrows)))


# chain maps --------------------------------------------------------------------

class ChainMap:
    """Degreewise matrices ``comps[k]: source^k -> target^k`` commuting with d."""

    __slots__ = ("source", "target", "comps")

    def __init__(self, source: CochainComplex, target: CochainComplex, comps=None,
                 check: bool = True):
        if source.field != target.field:
            raise FieldError("chain map between complexes over different fields")
        self.source = source
        self.target = target
        self.comps = {}
        for k, M in (comps or {}).items():
            k = int(k)
            if M.shape != (target.dim(k), source.dim(k)):
                raise ComplexError(f"component {k} has shape {M.shape}, expected "
                                   f"{(target.dim(k), source.dim(k))}")
            if not M.is_zero():
                self.comps[k] = M
        if check:
            for k in set(source.dims) | set(target.dims):
                lhs = target.diff(k) @ self.comp(k)
                rhs = self.comp(k + 1) @ source.diff(k)
                if lhs != rhs:
                    raise ComplexError(f"chain map does not commute with d in degree {k}")

    @property
    def field(self):
        return self.source.field

    def comp(self, k: int) -> Matrix:
        M = self.comps.get(k)
        if M is None:
            return Matrix.zeros(self.target.dim(k), self.source.dim(k), self.field)
        return M

    @classmethod
    def identity(cls, A):
        return cls(A, A, {k: Matrix.identity(n, A.field) for k, n in A.dims.items()}, check=False)

    @classmethod
    def zero(cls, A, B):
        return cls(A, B, {}, check=False)

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """Composition ``self o other``."""
        degs = set(other.source.dims) & set(self.target.dims)
        return ChainMap(other.source, self.target,
                        {k: self.comp(k) @ other.comp(k) for k in degs}, check=False)

    def _combine(self, other, sign):
        degs = set(self.comps) | set(other.comps)
        return ChainMap(self.source, self.target,
                        {k: self.comp(k) + other.comp(k).scale(sign) for k in degs},
                        check=False)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return ChainMap(self.source, self.target, {k: -M for k, M in self.comps.items()},
                        check=False)

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return NotImplemented
        degs = set(self.comps) | set(other.comps)
        return all(self.comp(k) == other.comp(k) for k in degs)

    __hash__ = None

    def induced(self, p: int) -> Matrix:
        """Matrix of ``H^p(self)`` in the representative bases."""
        hs = self.source.cohomology(p)
        ht = self.target.cohomology(p)
        if hs.dim == 0 or ht.dim == 0:
            return Matrix.zeros(ht.dim, hs.dim, self.field)
        return ht.project(self.comp(p) @ hs.reps)

    def is_quasi_iso(self) -> bool:
        degs = set(self.source.dims) | set(self.target.dims)
        for p in sorted(degs):
            M = self.induced(p)
            if M.nrows != M.ncols or M.rank() != M.nrows:
                return False
        return True

    def induces_zero(self) -> bool:
        degs = set(self.source.dims) & set(self.target.dims)
        return all(self.induced(p).is_zero() for p in degs)


def is_quasi_iso(f: ChainMap) -> bool:
    return f.is_quasi_iso()


# shifts, sums ------------------------------------------------------------------

def shift(A: CochainComplex, n: int) -> CochainComplex:
    sign = -1 if n % 2 else 1
    dims = {k - n: v for k, v in A.dims.items()}
    d = {k - n: (M if sign == 1 else -M) for k, M in A.d.items()}
    return CochainComplex(dims, d, A.field, check=False)


def shift_map(f: ChainMap, n: int) -> ChainMap:
    return ChainMap(shift(f.source, n), shift(f.target, n),
                    {k - n: M for k, M in f.comps.items()}, check=False)


def direct_sum(*cs: CochainComplex) -> CochainComplex:
    fld = cs[0].field if cs else active_field()
    degs = sorted(set().union(*[c.dims for c in cs])) if cs else []
    dims = {k: sum(c.dim(k) for c in cs) for k in degs}
    d = {k: block_diag([c.diff(k) for c in cs], fld) for k in degs}
    return CochainComplex(dims, d, fld, check=False)


def direct_sum_maps(*fs: ChainMap) -> ChainMap:
    src = direct_sum(*[f.source for f in fs])
    tgt = direct_sum(*[f.target for f in fs])
    degs = set(src.dims) | set(tgt.dims)
    return ChainMap(src, tgt, {k: block_diag([f.comp(k) for f in fs], src.field) for k in degs},
                    check=False)


# cones and triangles ----------------------------------------------------------

@dataclass
class Triangle:
    """``a -f-> b -g-> c -h-> a[1]``; ``origin`` records why it is distinguished."""

    a: CochainComplex
    b: CochainComplex
    c: CochainComplex
    f: ChainMap
    g: ChainMap
    h: ChainMap
    origin: str = "cone"

    def les(self):
        """Joints of the long exact sequence as ``(label, dim, rank_in, rank_out, composite_zero)``."""
        degs = set(self.a.dims) | set(self.b.dims) | set(self.c.dims)
        if not degs:
            return []
        lo, hi = min(degs) - 1, max(degs) + 1
        # the sequence ... H^p(a) -> H^p(b) -> H^p(c) -> H^{p+1}(a) -> ...
        maps = []
        for p in range(lo, hi + 1):
            maps.append((("a", p), ("b", p), self.f.induced(p)))
            maps.append((("b", p), ("c", p), self.g.induced(p)))
            maps.append((("c", p), ("a", p + 1), self.h.induced(p)))
        out = []
        for (x, y, u), (_, z, v) in zip(maps, maps[1:]):
            comp_zero = (v @ u).is_zero() if u.ncols and v.nrows else True
            out.append((y, u.nrows, u.rank(), v.rank(), comp_zero))
        return out

    def is_exact(self) -> bool:
        return all(dim == rin + rout and cz for _, dim, rin, rout, cz in self.les())


def cone(f: ChainMap):
    """Mapping cone and its distinguished triangle ``A -> B -> M -> A[1]``."""
    A, B = f.source, f.target
    fld = f.field
    degs = set(k - 1 for k in A.dims) | set(B.dims)
    dims = {k: A.dim(k + 1) + B.dim(k) for k in degs}
    d = {}
    for k in degs:
        if dims.get(k + 1, 0) == 0 or dims[k] == 0:
            continue
        d[k] = block([[-A.diff(k + 1), None], [f.comp(k + 1), B.diff(k)]],
                     [A.dim(k + 2), B.dim(k + 1)], [A.dim(k + 1), B.dim(k)], fld)
    M = CochainComplex(dims, d, fld, check=False)
    A1 = shift(A, 1)
    g = {}
    h = {}
    for k in degs:
        g[k] = block([[None], [Matrix.identity(B.dim(k), fld)]],
                     [A.dim(k + 1), B.dim(k)], [B.dim(k)], fld)
        h[k] = block([[Matrix.identity(A.dim(k + 1), fld), None]],
                     [A.dim(k + 1)], [A.dim(k + 1), B.dim(k)], fld)
    T = Triangle(A, B, M, f, ChainMap(B, M, g, check=False), ChainMap(M, A1, h, check=False),
                 origin="cone")
    return M, T


def turn_triangle(T: Triangle) -> Triangle:
    """``b -> c -> a[1] -(-f[1])-> b[1]``."""
    return Triangle(T.b, T.c, shift(T.a, 1), T.g, T.h, -shift_map(T.f, 1),
                    origin=f"turn({T.origin})")


# homotopies -------------------------------------------------------------------

def homotopic(f: ChainMap, g: ChainMap):
    """A homotopy ``H`` (``H[k]: A^k -> B^{k-1}``) with ``f - g = dH + Hd``, or None."""
    A, B = f.source, f.target
    fld = f.field
    degs = sorted(set(A.dims) | set(k + 1 for k in B.dims))
    unknowns = [k for k in degs if A.dim(k) and B.dim(k - 1)]
    idx = {k: i for i, k in enumerate(unknowns)}
    shapes = [(B.dim(k - 1), A.dim(k)) for k in unknowns]
    eqs = []
    for k in sorted(set(A.dims) & set(B.dims)):
        terms = []
        if k in idx:
            terms.append((idx[k], B.diff(k - 1), None))
        if k + 1 in idx:
            terms.append((idx[k + 1], None, A.diff(k)))
        eqs.append((terms, f.comp(k) - g.comp(k)))
    sol = solve_block_system(shapes, eqs, fld)
    if sol is None:
        return None
    return {k: sol[idx[k]] for k in unknowns}


# minimal models and roofs ------------------------------------------------------

def minimal_model(A: CochainComplex):
    """``(H, iota, pi)``: cohomology with zero differential, inclusion, retraction."""
    fld = A.field
    hd = {}
    iota = {}
    pi = {}
    for p in A.degrees():
        c = A.cohomology(p)
        if not c.dim:
            continue
        hd[p] = c.dim
        iota[p] = c.reps
        Z = A.diff(p).nullspace()
        full = hstack([c.boundaries, c.reps, complement_basis(Z)], A.dim(p), fld)
        inv = full.inverse()
        b = c.boundaries.ncols
        pi[p] = inv.select_rows(list(range(b, b + c.dim)))
    H = CochainComplex(hd, {}, fld, check=False)
    return H, ChainMap(H, A, iota, check=False), ChainMap(A, H, pi, check=False)


def induced_on_models(f: ChainMap):
    """``f`` transported to the minimal models of source and target."""
    Hs, i_s, _ = minimal_model(f.source)
    Ht, _, p_t = minimal_model(f.target)
    return p_t @ f @ i_s


class RoofError(ComplexError):
    pass


@dataclass
class Roof:
    """``source <-left- apex -right-> target`` with ``left`` a quasi-isomorphism."""

    left: ChainMap
    right: ChainMap

    def __post_init__(self):
        if self.left.source is not self.right.source and not (
                self.left.source == self.right.source):
            raise RoofError("roof legs have different apexes")
        if not self.left.is_quasi_iso():
            raise RoofError("left leg of a roof must be a quasi-isomorphism")

    @property
    def apex(self):
        return self.left.source

    @property
    def source(self):
        return self.left.target

    @property
    def target(self):
        return self.right.target

    @classmethod
    def from_map(cls, f: ChainMap) -> "Roof":
        return cls(ChainMap.identity(f.source), f)

    @classmethod
    def identity(cls, A: CochainComplex) -> "Roof":
        return cls(ChainMap.identity(A), ChainMap.identity(A))

    def to_map(self) -> ChainMap:
        """A chain map ``source -> target`` in the same derived class."""
        C = self.apex
        _, i_c, _ = minimal_model(C)
        _, i_a, p_a = minimal_model(self.source)
        Hf = p_a @ self.left @ i_c
        inv = {k: M.inverse() for k, M in Hf.comps.items()}
        Hinv = ChainMap(Hf.target, Hf.source, inv, check=False)
        return self.right @ i_c @ Hinv @ p_a


def roofs_equivalent(r1: Roof, r2: Roof) -> bool:
    if not (r1.source == r2.source and r1.target == r2.target):
        raise RoofError("roofs have different endpoints")
    return homotopic(r1.to_map(), r2.to_map()) is not None


def path_resolution(B: CochainComplex):
    """The contractible complex ``cone(id_B)[-1]`` with its surjection onto B."""
    M, _ = cone(ChainMap.identity(B))
    E = shift(M, -1)
    fld = B.field
    e = {k: block([[Matrix.identity(B.dim(k), fld), None]], [B.dim(k)],
                  [B.dim(k), B.dim(k - 1)], fld) for k in B.dims}
    return E, ChainMap(E, B, e, check=False)


def fiber_product(g1: ChainMap, f2: ChainMap):
    """Degreewise pullback ``C1 x_B C2`` with projections ``(P, pi1, pi2)``."""
    C1, C2 = g1.source, f2.source
    fld = g1.field
    degs = sorted(set(C1.dims) | set(C2.dims))
    K = {}
    for k in degs:
        A = hstack([g1.comp(k), -f2.comp(k)], g1.target.dim(k), fld)
        K[k] = A.nullspace()
    dims = {k: K[k].ncols for k in degs}
    d = {}
    for k in degs:
        if k + 1 not in K or not dims[k] or not dims[k + 1]:
            continue
        D = block_diag([C1.diff(k), C2.diff(k)], fld)
        X = K[k + 1].solve(D @ K[k])
        if X is None:
            raise ComplexError("fiber product differential does not close")
        d[k] = X
    P = CochainComplex(dims, d, fld, check=False)
    p1, p2 = {}, {}
    for k in degs:
        n1, n2 = C1.dim(k), C2.dim(k)
        p1[k] = K[k].select_rows(list(range(n1)))
        p2[k] = K[k].select_rows(list(range(n1, n1 + n2)))
    return P, ChainMap(P, C1, p1, check=False), ChainMap(P, C2, p2, check=False)


def compose_roofs(r1: Roof, r2: Roof) -> Roof:
    """``r2 o r1`` via the pullback of the apexes over the middle object."""
    if not r1.target == r2.source:
        raise RoofError("incompatible endpoints for roof composition")
    B = r1.target
    g1, f2, g2 = r1.right, r2.left, r2.right
    surjective = all(
        hstack([g1.comp(k), f2.comp(k)], B.dim(k), B.field).rank() == B.dim(k)
        for k in B.dims)
    if not surjective:
        # an equivalent roof whose left leg is degreewise onto
        E, e = path_resolution(B)
        C2 = f2.source
        C2e = direct_sum(C2, E)
        degs = set(C2e.dims)
        f2 = ChainMap(C2e, B, {k: hstack([f2.comp(k), e.comp(k)], B.dim(k), B.field)
                               for k in degs})
        proj = ChainMap(C2e, C2, {k: hstack([Matrix.identity(C2.dim(k), B.field),
                                             Matrix.zeros(C2.dim(k), E.dim(k), B.field)],
                                            C2.dim(k), B.field) for k in degs}, check=False)
        g2 = g2 @ proj
    P, pi1, pi2 = fiber_product(g1, f2)
    return Roof(r1.left @ pi1, g2 @ pi2)


# truncations -------------------------------------------------------------------

def truncate_below(A: CochainComplex, p: int):
    """``tau_{<=p} A`` and its inclusion into A."""
    fld = A.field
    K = A.diff(p).nullspace()
    dims = {k: n for k, n in A.dims.items() if k < p}
    dims[p] = K.ncols
    d = {k: M for k, M in A.d.items() if k < p - 1}
    if A.dim(p - 1) and K.ncols:
        d[p - 1] = K.solve(A.diff(p - 1))
    T = CochainComplex(dims, d, fld, check=False)
    comps = {k: Matrix.identity(n, fld) for k, n in A.dims.items() if k < p}
    comps[p] = K
    return T, ChainMap(T, A, comps, check=False)


def truncate_above(A: CochainComplex, p: int):
    """``tau^{>=p} A`` and the projection from A."""
    fld = A.field
    B = A.diff(p - 1).colspace()
    if B.ncols:
        from .linalg import quotient_map
        Q, E = quotient_map(B)
    else:
        Q = E = Matrix.identity(A.dim(p), fld)
    dims = {k: n for k, n in A.dims.items() if k > p}
    dims[p] = Q.nrows
    d = {k: M for k, M in A.d.items() if k > p}
    if A.dim(p + 1) and Q.nrows:
        d[p] = A.diff(p) @ E
    T = CochainComplex(dims, d, fld, check=False)
    comps = {k: Matrix.identity(n, fld) for k, n in A.dims.items() if k > p}
    comps[p] = Q
    return T, ChainMap(A, T, comps, check=False)


def truncate_below_tilde(A: CochainComplex, p: int):
    """``A^n`` for n <= p and ``Im d^p`` in degree p+1, with the inclusion into A."""
    fld = A.field
    Im = A.diff(p).colspace()
    dims = {k: n for k, n in A.dims.items() if k <= p}
    dims[p + 1] = Im.ncols
    d = {k: M for k, M in A.d.items() if k < p}
    if Im.ncols:
        d[p] = Im.solve(A.diff(p))
    T = CochainComplex(dims, d, fld, check=False)
    comps = {k: Matrix.identity(n, fld) for k, n in A.dims.items() if k <= p}
    comps[p + 1] = Im
    return T, ChainMap(T, A, comps, check=False)


def truncate_above_tilde(A: CochainComplex, p: int):
    """``Im d^{p-1}`` in degree p-1 and ``A^n`` for n >= p, with the map from A."""
    fld = A.field
    Im = A.diff(p - 1).colspace()
    dims = {k: n for k, n in A.dims.items() if k >= p}
    dims[p - 1] = Im.ncols
    d = {k: M for k, M in A.d.items() if k >= p}
    comps = {k: Matrix.identity(n, fld) for k, n in A.dims.items() if k >= p}
    if Im.ncols:
        d[p - 1] = Im
        comps[p - 1] = Im.solve(A.diff(p - 1))
    T = CochainComplex(dims, d, fld, check=False)
    return T, ChainMap(A, T, comps, check=False)


def tilde_comparisons(A: CochainComplex, p: int):
    """Comparison maps ``tau_{<=p} -> tilde tau_{<=p}`` and ``tilde tau^{>=p} -> tau^{>=p}``."""
    fld = A.field
    T, inc = truncate_below(A, p)
    Tt, inct = truncate_below_tilde(A, p)
    comps = {k: Matrix.identity(n, fld) for k, n in T.dims.items() if k < p}
    if T.dim(p):
        comps[p] = inc.comp(p)  # ker d^p inside A^p
    low = ChainMap(T, Tt, comps)
    U, pr = truncate_above(A, p)
    Ut, prt = truncate_above_tilde(A, p)
    comps = {k: Matrix.identity(n, fld) for k, n in U.dims.items() if k > p}
    if U.dim(p):
        comps[p] = pr.comp(p)
    high = ChainMap(Ut, U, comps)
    return low, high


def t_cohomology(A: CochainComplex, n: int) -> CochainComplex:
    """``(tau^{>=n} tau_{<=n} A)[n]``."""
    T, _ = truncate_below(A, n)
    U, _ = truncate_above(T, n)
    return shift(U, n)


# tensor and Hom ----------------------------------------------------------------

def tensor(A: CochainComplex, B: CochainComplex) -> CochainComplex:
    """Total complex of ``A^p (x) B^q`` with ``d(a(x)b) = da(x)b + (-1)^p a(x)db``."""
    fld = A.field
    if B.field != fld:
        raise FieldError("tensor of complexes over different fields")
    layout = {}
    for p, a in A.dims.items():
        for q, b in B.dims.items():
            layout.setdefault(p + q, []).append((p, q))
    for m in layout:
        layout[m].sort()
    dims = {m: sum(A.dim(p) * B.dim(q) for p, q in blocks) for m, blocks in layout.items()}
    d = {}
    for m, src in layout.items():
        tgt = layout.get(m + 1)
        if not tgt:
            continue
        tpos = {pq: i for i, pq in enumerate(tgt)}
        grid = [[None] * len(src) for _ in tgt]
        for j, (p, q) in enumerate(src):
            if (p + 1, q) in tpos:
                grid[tpos[(p + 1, q)]][j] = kron(A.diff(p), Matrix.identity(B.dim(q), fld))
            if (p, q + 1) in tpos:
                grid[tpos[(p, q + 1)]][j] = kron(Matrix.identity(A.dim(p), fld),
                                                  B.diff(q)).scale(-1 if p % 2 else 1)
        d[m] = block(grid, [A.dim(p) * B.dim(q) for p, q in tgt],
                     [A.dim(p) * B.dim(q) for p, q in src], fld)
    return CochainComplex(dims, d, fld)


def _hom_layout(B, A):
    layout = {}
    for p in B.dims:
        for k in A.dims:
            layout.setdefault(k - p, []).append(p)
    for n in layout:
        layout[n].sort()
    return layout


def hom_complex(B: CochainComplex, A: CochainComplex) -> CochainComplex:
    """``Hom^n = prod_p Hom(B^p, A^{n+p})`` with
    ``[d f]^p = d_A f^p + (-1)^{n+1} f^{p+1} d_B``.

    A component ``f^p`` is stored row-major as a ``dim A^{n+p} x dim B^p`` matrix.
    """
    fld = A.field
    if B.field != fld:
        raise FieldError("Hom between complexes over different fields")
    layout = _hom_layout(B, A)
    size = lambda n, p: A.dim(n + p) * B.dim(p)  # noqa: E731
    dims = {n: sum(size(n, p) for p in ps) for n, ps in layout.items()}
    d = {}
    for n, src in layout.items():
        tgt = layout.get(n + 1)
        if not tgt:
            continue
        tpos = {p: i for i, p in enumerate(tgt)}
        grid = [[None] * len(src) for _ in tgt]
        sign = 1 if (n + 1) % 2 == 0 else -1
        for j, p in enumerate(src):
            # d_A^{n+p} f^p lands in component p of degree n+1
            if p in tpos:
                grid[tpos[p]][j] = kron(A.diff(n + p), Matrix.identity(B.dim(p), fld))
            # f^p d_B^{p-1} lands in component p-1 of degree n+1
            if p - 1 in tpos:
                term = kron(Matrix.identity(A.dim(n + p), fld), B.diff(p - 1).T)
                grid[tpos[p - 1]][j] = term.scale(sign)
        d[n] = block(grid, [size(n + 1, p) for p in tgt], [size(n, p) for p in src], fld)
    return CochainComplex(dims, d, fld)


def hom_element_to_map(B: CochainComplex, A: CochainComplex, x: Matrix) -> ChainMap:
    """Turn a degree-0 cocycle of ``Hom(B, A)`` (a column) into a chain map B -> A."""
    fld = A.field
    comps = {}
    off = 0
    for p in _hom_layout(B, A).get(0, []):
        r, c = A.dim(p), B.dim(p)
        rows = [{} for _ in range(r)]
        for i in range(r):
            for j in range(c):
                v = x[off + i * c + j, 0]
                if v:
                    rows[i][j] = v
        comps[p] = Matrix(r, c, rows, fld)
        off += r * c
    return ChainMap(B, A, comps)


def map_to_hom_element(f: ChainMap) -> Matrix:
    B, A = f.source, f.target
    fld = f.field
    entries = []
    for p in _hom_layout(B, A).get(0, []):
        M = f.comp(p)
        for i in range(M.nrows):
            for j in range(M.ncols):
                entries.append(M[i, j])
    return Matrix(len(entries), 1, [{0: v} if v else {} for v in entries], fld)


# octahedron --------------------------------------------------------------------

@dataclass
class Octahedron:
    triangles: list
    sigma: ChainMap
    nu: ChainMap
    squares: list = dc_field(default_factory=list)

    def commutes(self) -> bool:
        return all(lhs == rhs for _, lhs, rhs in self.squares)

    def all_exact(self) -> bool:
        return all(T.is_exact() for T in self.triangles)


def octahedron(f: ChainMap, beta: ChainMap) -> Octahedron:
    """The octahedral diagram for ``A -f-> B -beta-> E``; ``M = cone(beta o f)``."""
    A, B, E = f.source, f.target, beta.target
    fld = f.field
    C, T1 = cone(f)
    F, T2 = cone(beta)
    bf = beta @ f
    M, T3 = cone(bf)
    sigma = {}
    for k in set(C.dims) | set(M.dims):
        sigma[k] = block([[Matrix.identity(A.dim(k + 1), fld), None], [None, beta.comp(k)]],
                         [A.dim(k + 1), E.dim(k)], [A.dim(k + 1), B.dim(k)], fld)
    sigma = ChainMap(C, M, sigma)
    nu = {}
    for k in set(M.dims) | set(F.dims):
        nu[k] = block([[f.comp(k + 1), None], [None, Matrix.identity(E.dim(k), fld)]],
                      [B.dim(k + 1), E.dim(k)], [A.dim(k + 1), E.dim(k)], fld)
    nu = ChainMap(M, F, nu)
    g1 = shift_map(T1.g, 1)
    T4 = Triangle(C, M, F, sigma, nu, g1 @ T2.h, origin="octahedron")
    squares = [
        ("beta f = (beta f) id", beta @ f, T3.f),
        ("sigma g = tau beta", sigma @ T1.g, T3.g @ beta),
        ("omega sigma = h", T3.h @ sigma, T1.h),
        ("gamma = nu tau", T2.g, nu @ T3.g),
        ("f[1] omega = delta nu", shift_map(f, 1) @ T3.h, T2.h @ nu),
        ("g[1] delta = (g[1] delta) id", g1 @ T2.h, T4.h),
    ]
    return Octahedron([T1, T2, T3, T4], sigma, nu, squares)


def cone_map(a: ChainMap, b: ChainMap, f: ChainMap, f2: ChainMap) -> ChainMap:
    """Map ``cone(f) -> cone(f2)`` induced by a strictly commuting square
    ``f2 o a == b o f``."""
    M1, _ = cone(f)
    M2, _ = cone(f2)
    fld = f.field
    A, B, A2, B2 = f.source, f.target, f2.source, f2.target
    comps = {}
    for k in set(M1.dims) | set(M2.dims):
        comps[k] = block([[a.comp(k + 1), None], [None, b.comp(k)]],
                         [A2.dim(k + 1), B2.dim(k)], [A.dim(k + 1), B.dim(k)], fld)
    return ChainMap(M1, M2, comps, check=False)


def les_dims_consistent(f: ChainMap, g: ChainMap, c_betti=None) -> bool:
    """Rank bookkeeping for a would-be triangle ``A -f-> B -g-> C -> A[1]``.

    Checks ``H(g) H(f) = 0``, exactness at ``H(B)`` and that the connecting
    map ``H^p(C) -> H^{p+1}(A)`` has the same rank whichever side computes it.
    """
    A, B, C = f.source, f.target, g.target
    degs = set(A.dims) | set(B.dims) | set(C.dims)
    if not degs:
        return True
    for p in range(min(degs) - 1, max(degs) + 2):
        F, G = f.induced(p), g.induced(p)
        if F.ncols and G.nrows and not (G @ F).is_zero():
            return False
        hb = B.cohomology(p).dim
        if hb - G.rank() != F.rank():
            return False
        delta_from_c = C.cohomology(p).dim - G.rank()
        delta_from_a = A.cohomology(p + 1).dim - f.induced(p + 1).rank()
        if delta_from_c != delta_from_a:
            return False
    return True
