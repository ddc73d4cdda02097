"""Perverse sheaves on a germ of d lines through a point, as linear data.

An object is ``(V_i, h_i, W, alpha, beta)`` with ``alpha: (+)V_i -> W``,
``beta: W -> (+)V_i`` and ``beta alpha = 1 - (+)h_i``.  The ``V_i`` are the
nearby fibres along the branches, W the vanishing part at the origin.
"""
from __future__ import annotations

from dataclasses import dataclass

from .complexes import ChainMap, CochainComplex
from .field import active_field
from .linalg import Matrix, block_diag, quotient_map


class QuiverError(ValueError):
    """The defining relation or an invertibility requirement fails."""


def _eye(n, f):
    return Matrix.identity(n, f)


@dataclass
class QuiverPervObject:
    V: list       # dimension of each branch space
    h: list       # branch monodromies
    W: int
    alpha: Matrix  # W x sum(V)
    beta: Matrix   # sum(V) x W
    irreducible: bool | None = None  # caller's claim about the branch local systems

    @property
    def field(self):
        return self.alpha.field

    @property
    def d(self) -> int:
        return len(self.V)

    @property
    def total(self) -> int:
        return sum(self.V)

    def H(self) -> Matrix:
        return block_diag(self.h, self.field) if self.h else Matrix.zeros(0, 0, self.field)

    def T_tilde(self) -> Matrix:
        return _eye(self.W, self.field) - self.alpha @ self.beta

    def validate(self) -> dict:
        f = self.field
        shapes = (len(self.h) == self.d
                  and all(m.shape == (v, v) for m, v in zip(self.h, self.V))
                  and self.alpha.shape == (self.W, self.total)
                  and self.beta.shape == (self.total, self.W))
        if not shapes:
            return {"shapes": False, "relation": False, "h_invertible": False,
                    "T_tilde_invertible": False, "ok": False}
        rel = self.beta @ self.alpha == _eye(self.total, f) - self.H()
        hinv = all(m.is_invertible() for m in self.h)
        tinv = self.T_tilde().is_invertible()
        return {"shapes": True, "relation": rel, "h_invertible": hinv,
                "T_tilde_invertible": tinv, "ok": rel and hinv and tinv}

    def check(self) -> "QuiverPervObject":
        v = self.validate()
        if not v["shapes"]:
            raise QuiverError("matrix shapes do not match the declared dimensions")
        if not v["h_invertible"]:
            raise QuiverError("a branch monodromy is singular")
        if not v["relation"]:
            raise QuiverError("beta alpha differs from 1 - h")
        if not v["T_tilde_invertible"]:
            raise QuiverError("1 - alpha beta is singular")
        return self

    def offsets(self):
        out, o = [], 0
        for v in self.V:
            out.append(o)
            o += v
        return out


@dataclass
class QuiverMorphism:
    source: QuiverPervObject
    target: QuiverPervObject
    tau: list   # per-branch maps V_i -> V'_i
    eta: Matrix  # W -> W'

    def __post_init__(self):
        s, t = self.source, self.target
        if s.d != t.d or len(self.tau) != s.d:
            raise QuiverError("branch counts differ")
        for m, a, b in zip(self.tau, s.V, t.V):
            if m.shape != (b, a):
                raise QuiverError("branch map has the wrong shape")
        if self.eta.shape != (t.W, s.W):
            raise QuiverError("origin map has the wrong shape")
        T = self.tau_total()
        if t.alpha @ T != self.eta @ s.alpha or t.beta @ self.eta != T @ s.beta:
            raise QuiverError("morphism does not commute with alpha and beta")

    def tau_total(self) -> Matrix:
        f = self.source.field
        if not self.tau:
            return Matrix.zeros(0, 0, f)
        return block_diag(self.tau, f)

    def __matmul__(self, other: "QuiverMorphism") -> "QuiverMorphism":
        return QuiverMorphism(other.source, self.target,
                              [a @ b for a, b in zip(self.tau, other.tau)], self.eta @ other.eta)

    @classmethod
    def identity(cls, P):
        f = P.field
        return cls(P, P, [_eye(v, f) for v in P.V], _eye(P.W, f))

    @classmethod
    def zero(cls, P, Q):
        f = P.field
        return cls(P, Q, [Matrix.zeros(b, a, f) for a, b in zip(P.V, Q.V)],
                   Matrix.zeros(Q.W, P.W, f))

    def scale(self, c) -> "QuiverMorphism":
        return QuiverMorphism(self.source, self.target, [m.scale(c) for m in self.tau],
                              self.eta.scale(c))

    def __sub__(self, other):
        return QuiverMorphism(self.source, self.target,
                              [a - b for a, b in zip(self.tau, other.tau)], self.eta - other.eta)

    def is_zero(self) -> bool:
        return self.eta.is_zero() and all(m.is_zero() for m in self.tau)

    def __eq__(self, other):
        return (self.eta == other.eta and len(self.tau) == len(other.tau)
                and all(a == b for a, b in zip(self.tau, other.tau)))


# kernels, cokernels, images ---------------------------------------------------------

def kernel(m: QuiverMorphism):
    """``(ker m, inclusion)``."""
    P = m.source
    f = P.field
    N = [t.nullspace() for t in m.tau]
    NW = m.eta.nullspace()
    Nall = block_diag(N, f) if N else Matrix.zeros(0, 0, f)
    K = QuiverPervObject(
        [n.ncols for n in N],
        [n.solve(h @ n) for n, h in zip(N, P.h)],
        NW.ncols,
        NW.solve(P.alpha @ Nall),
        Nall.solve(P.beta @ NW),
    )
    return K, QuiverMorphism(K, P, N, NW)


def cokernel(m: QuiverMorphism):
    """``(coker m, projection)``."""
    Q_ = m.target
    f = Q_.field
    qs = [quotient_map(t.colspace()) if t.nrows else (Matrix.zeros(0, 0, f),) * 2
          for t in m.tau]
    qW = quotient_map(m.eta.colspace()) if m.eta.nrows else (Matrix.zeros(0, 0, f),) * 2
    Qall = block_diag([q for q, _ in qs], f) if qs else Matrix.zeros(0, 0, f)
    Eall = block_diag([e for _, e in qs], f) if qs else Matrix.zeros(0, 0, f)
    C = QuiverPervObject(
        [q.nrows for q, _ in qs],
        [q @ h @ e for (q, e), h in zip(qs, Q_.h)],
        qW[0].nrows,
        qW[0] @ Q_.alpha @ Eall,
        Qall @ Q_.beta @ qW[1],
    )
    return C, QuiverMorphism(Q_, C, [q for q, _ in qs], qW[0])


def image(m: QuiverMorphism):
    """``(im m, inclusion into the target)``: kernel of the cokernel projection."""
    _, p = cokernel(m)
    return kernel(p)


# nearby and vanishing data -----------------------------------------------------------

def psi(P: QuiverPervObject):
    return P.total, P.H()


def phi(P: QuiverPervObject):
    return P.W, P.T_tilde()


def can(P: QuiverPervObject) -> Matrix:
    return P.alpha


def var(P: QuiverPervObject) -> Matrix:
    return P.beta


def can_var_identities(P: QuiverPervObject) -> dict:
    f = P.field
    return {"var_can": P.beta @ P.alpha == _eye(P.total, f) - P.H(),
            "can_var": P.alpha @ P.beta == _eye(P.W, f) - P.T_tilde()}


def stalk_complex(P: QuiverPervObject) -> CochainComplex:
    """``[(+)V_i --alpha--> W]`` in degrees -1, 0."""
    return CochainComplex({-1: P.total, 0: P.W}, {-1: P.alpha}, P.field)


def costalk_complex(P: QuiverPervObject) -> CochainComplex:
    """``[W --beta--> (+)V_i]`` in degrees 0, 1."""
    return CochainComplex({0: P.W, 1: P.total}, {0: P.beta}, P.field)


def stalk_map(m: QuiverMorphism) -> ChainMap:
    return ChainMap(stalk_complex(m.source), stalk_complex(m.target),
                    {-1: m.tau_total(), 0: m.eta})


def costalk_map(m: QuiverMorphism) -> ChainMap:
    return ChainMap(costalk_complex(m.source), costalk_complex(m.target),
                    {0: m.eta, 1: m.tau_total()})


# constructors -----------------------------------------------------------------------

def _as_matrices(hs, f):
    return [h if isinstance(h, Matrix) else Matrix.from_lists(h, field=f) for h in hs]


def zero_object(d: int, field=None) -> QuiverPervObject:
    f = field if field is not None else active_field()
    return QuiverPervObject([0] * d, [Matrix.zeros(0, 0, f)] * d, 0,
                            Matrix.zeros(0, 0, f), Matrix.zeros(0, 0, f))


def skyscraper(d: int, rank: int = 1, field=None) -> QuiverPervObject:
    f = field if field is not None else active_field()
    return QuiverPervObject([0] * d, [Matrix.zeros(0, 0, f)] * d, rank,
                            Matrix.zeros(rank, 0, f), Matrix.zeros(0, rank, f))


def constant(d: int, rank: int = 1, field=None) -> QuiverPervObject:
    """The constant sheaf shifted by one: alpha surjective with diagonal kernel."""
    f = field if field is not None else active_field()
    rows = []
    for i in range(d - 1):
        for a in range(rank):
            r = {i * rank + a: f.one, (i + 1) * rank + a: -f.one}
            rows.append({j: f.norm(v) for j, v in r.items()})
    alpha = Matrix(rank * (d - 1) if d else 0, rank * d, rows, f)
    return QuiverPervObject([rank] * d, [_eye(rank, f)] * d, alpha.nrows, alpha,
                            Matrix.zeros(rank * d, alpha.nrows, f))


def intermediate_extension(h, field=None, irreducible=None) -> QuiverPervObject:
    """From branch monodromies: ``W = im(1 - h)``, alpha onto W, beta the inclusion."""
    f = field if field is not None else active_field()
    hs = _as_matrices(h, f)
    P0 = QuiverPervObject([m.nrows for m in hs], hs, 0, Matrix.zeros(0, 0, f),
                          Matrix.zeros(0, 0, f))
    one_minus = _eye(P0.total, f) - P0.H()
    B = one_minus.colspace()
    alpha = B.solve(one_minus) if B.ncols else Matrix.zeros(0, P0.total, f)
    return QuiverPervObject(P0.V, hs, B.ncols, alpha,
                            B if B.ncols else Matrix.zeros(P0.total, 0, f), irreducible)


def branch_ic(d: int, i: int, h, field=None) -> QuiverPervObject:
    """Intermediate extension of a local system on branch ``i`` only."""
    f = field if field is not None else active_field()
    hm = _as_matrices([h], f)[0]
    hs = [hm if j == i else Matrix.zeros(0, 0, f) for j in range(d)]
    return intermediate_extension(hs, f)


def extension_by_zero(h, field=None) -> QuiverPervObject:
    """``j_!``: alpha is the identity, beta = 1 - h."""
    f = field if field is not None else active_field()
    hs = _as_matrices(h, f)
    n = sum(m.nrows for m in hs)
    H = block_diag(hs, f) if hs else Matrix.zeros(0, 0, f)
    return QuiverPervObject([m.nrows for m in hs], hs, n, _eye(n, f), _eye(n, f) - H)


def full_pushforward(h, field=None) -> QuiverPervObject:
    """``Rj_*``: alpha = 1 - h, beta is the identity."""
    f = field if field is not None else active_field()
    hs = _as_matrices(h, f)
    n = sum(m.nrows for m in hs)
    H = block_diag(hs, f) if hs else Matrix.zeros(0, 0, f)
    return QuiverPervObject([m.nrows for m in hs], hs, n, _eye(n, f) - H, _eye(n, f))


def direct_sum(*Ps: QuiverPervObject) -> QuiverPervObject:
    """Branchwise sum; blocks are reordered so each branch stays contiguous."""
    f = Ps[0].field
    d = Ps[0].d
    V = [sum(P.V[i] for P in Ps) for i in range(d)]
    h = [block_diag([P.h[i] for P in Ps], f) for i in range(d)]
    W = sum(P.W for P in Ps)
    # permutation from (object, branch) order to (branch, object) order
    perm = []
    for i in range(d):
        base = 0
        for P in Ps:
            perm += [base + P.offsets()[i] + a for a in range(P.V[i])]
            base += P.total
    n = len(perm)
    S = Matrix(n, n, [{perm[r]: f.one} for r in range(n)], f)
    A = block_diag([P.alpha for P in Ps], f) @ S.T
    B = S @ block_diag([P.beta for P in Ps], f)
    return QuiverPervObject(V, h, W, A, B)


def warning_sequence(field=None):
    """``0 -> skyscraper -> constant -> (+) branch IC -> 0`` on two branches."""
    f = field if field is not None else active_field()
    C = constant(2, 1, f)
    ic = direct_sum(branch_ic(2, 0, [[1]], f), branch_ic(2, 1, [[1]], f))
    q = QuiverMorphism(C, ic, [_eye(1, f), _eye(1, f)], Matrix.zeros(0, 1, f))
    K, i = kernel(q)
    return K, i, q


# supports and the kernel theorem ------------------------------------------------------

def support(P: QuiverPervObject) -> dict:
    """Branches with nonzero nearby space; the origin when the stalk there is nonzero."""
    branches = [i for i, v in enumerate(P.V) if v]
    origin = bool(branches) or not stalk_complex(P).is_acyclic()
    dim = 1 if branches else (0 if origin else None)
    return {"branches": branches, "origin": origin, "dim": dim}


def kernel_support_theorem_check(T: QuiverMorphism) -> dict:
    """Support of ker T equals the closure of points where T is not injective on
    stalk cohomology, and in degree ``-s`` the stalk of ker T is the kernel of T."""
    P = T.source
    if T.target is not P and (T.target.V != P.V or T.target.W != P.W):
        raise QuiverError("theorem check needs an endomorphism")
    K, _ = kernel(T)
    C, _ = cokernel(T)
    sK, sC = support(K), support(C)
    # points where T^* on stalk cohomology has a kernel
    bad_branches = [i for i, t in enumerate(T.tau) if t.nullspace().ncols]
    sm = stalk_map(T)
    origin_ker = {k: sm.induced(k).nullspace().ncols for k in (-1, 0)}
    S_origin = bool(bad_branches) or any(origin_ker.values())
    closure_ok = sK["branches"] == bad_branches and sK["origin"] == S_origin
    degree_ok = True
    details = []
    if sK["dim"] is not None:
        s = sK["dim"]
        for i in sK["branches"]:
            details.append(("branch", i, K.V[i], T.tau[i].nullspace().ncols))
        kb = stalk_complex(K).betti().get(-s, 0)
        details.append(("origin", None, kb, origin_ker[-s]))
        degree_ok = all(a == b for _, _, a, b in details)
    return {"supp_ker": sK, "supp_coker": sC,
            "supports_equal": (sK["branches"], sK["origin"]) == (sC["branches"], sC["origin"]),
            "closure_matches": closure_ok, "degree_match": degree_ok,
            "class_dims_equal": (K.total, K.W) == (C.total, C.W),
            "ok": closure_ok and degree_ok and (sK["branches"], sK["origin"])
            == (sC["branches"], sC["origin"]),
            "s": sK["dim"], "details": details}
