"""Combinatorial Verdier duality over a field.

``(DF)(sigma)`` is the linear dual of the compact-support cochains of F over
the open star of sigma, with negated grading.  Restrictions are dual to the
extension-by-zero inclusions between nested stars, so the result is a
strict cellular sheaf complex.
"""
from __future__ import annotations

from .complexes import ChainMap, CochainComplex, hom_complex
from .linalg import Matrix
from .sheaves import (CellularSheafComplex, PreconditionError, SheafMap, _cellular_total,
                      costalk, hyper, hyper_map)


def dual_complex(C: CochainComplex) -> CochainComplex:
    """``Hom(C, k)``: degree n holds functionals on ``C^{-n}``."""
    return hom_complex(C, CochainComplex.point(1, 0, C.field))


def dual_map(f: ChainMap, source_dual=None, target_dual=None) -> ChainMap:
    """``f: C -> C'`` gives ``Hom(C', k) -> Hom(C, k)``, precomposition with f."""
    Cd = source_dual if source_dual is not None else dual_complex(f.target)
    Dd = target_dual if target_dual is not None else dual_complex(f.source)
    comps = {n: f.comp(-n).T for n in set(Cd.dims) | set(Dd.dims)}
    return ChainMap(Cd, Dd, comps, check=False)


def _star_totals(F):
    site = F.site
    return [_cellular_total(F, site.star(c)) for c in site.cells]


def _inclusion(Tsmall, Csmall, Tbig, Cbig, field):
    pieces = [((k, q), (k, q), Matrix.identity(sz, field))
              for (k, q), (_, _, sz) in Tsmall.where.items()]
    return Tsmall.map_to(Tbig, pieces, Csmall, Cbig)


def dualize(F: CellularSheafComplex) -> CellularSheafComplex:
    site = F.site
    totals = _star_totals(F)
    stalks = [dual_complex(C) for _, C in totals]
    restr = {}
    for t in site.cells:
        for s in site.faces[t]:
            Ts, Cs = totals[s]
            Tt, Ct = totals[t]
            inc = _inclusion(Tt, Ct, Ts, Cs, F.field)
            restr[(s, t)] = dual_map(inc, stalks[s], stalks[t])
    return CellularSheafComplex(site, stalks, restr, F.field, check=False)


def dual_sheaf_map(phi: SheafMap, DF=None, DG=None) -> SheafMap:
    """``D(phi): DG -> DF`` for ``phi: F -> G``."""
    F, G = phi.source, phi.target
    site = F.site
    DF = DF if DF is not None else dualize(F)
    DG = DG if DG is not None else dualize(G)
    comps = []
    for c in site.cells:
        S = site.star(c)
        TF, CF = _cellular_total(F, S)
        TG, CG = _cellular_total(G, S)
        pieces = [((k, q), (k, q), phi.comps[k].comp(q)) for (k, q) in TF.where]
        m = TF.map_to(TG, pieces, CF, CG)
        comps.append(dual_map(m, DG.stalks[c], DF.stalks[c]))
    return SheafMap(DG, DF, comps, check=False)


def dualizing_complex(site, field=None) -> CellularSheafComplex:
    return dualize(CellularSheafComplex.constant(site, 0, 1, None, field))


def _betti_table(F, which):
    fn = (lambda c: F.stalks[c]) if which == "stalk" else (lambda c: costalk(F, c))
    return [fn(c).betti() for c in F.site.cells]


def double_dual_check(F: CellularSheafComplex, DDF=None) -> bool:
    """Stalks, costalks and global hypercohomology of DDF match those of F."""
    DDF = DDF if DDF is not None else dualize(dualize(F))
    if _betti_table(DDF, "stalk") != _betti_table(F, "stalk"):
        return False
    if _betti_table(DDF, "costalk") != _betti_table(F, "costalk"):
        return False
    return hyper(DDF).betti() == hyper(F).betti()


def swap_check(F: CellularSheafComplex, DF=None) -> bool:
    """``H^q`` of the stalk of DF equals ``H^{-q}`` of the costalk of F, and back."""
    DF = DF if DF is not None else dualize(F)
    for c in F.site.cells:
        st, co = DF.stalks[c].betti(), costalk(F, c).betti()
        if st != {-q: v for q, v in co.items()}:
            return False
        co2, st2 = costalk(DF, c).betti(), F.stalks[c].betti()
        if co2 != {-q: v for q, v in st2.items()}:
            return False
    return True


def duality_map(F: CellularSheafComplex, DF=None) -> ChainMap:
    """The chain map ``Hom(Cell(X; F), k) -> Cell(X; DF)`` on a compact site.

    A global functional is sent to its restrictions to the stars of the
    vertices.  Global duality says this is a quasi-isomorphism.
    """
    site = F.site
    if not site.compact:
        raise PreconditionError("global duality needs a compact site")
    DF = DF if DF is not None else dualize(F)
    X = site.all_cells()
    TX, CX = _cellular_total(F, X)
    dual_X = dual_complex(CX)
    TD, CD = _cellular_total(DF, X)
    verts = [v for v in site.sorted_cells(X) if site.dims[v] == 0]
    stars = {v: _cellular_total(F, site.star(v)) for v in verts}
    comps = {}
    for n in dual_X.dims:
        rows = [{} for _ in range(CD.dim(n))]
        for v in verts:
            if (v, n) not in TD.where:
                continue
            _, off, _ = TD.where[(v, n)]
            Ts, Cs = stars[v]
            block = _inclusion(Ts, Cs, TX, CX, F.field).comp(-n).T
            for i, r in enumerate(block.rows):
                rows[off + i] = dict(r)
        comps[n] = Matrix(CD.dim(n), dual_X.dim(n), rows, F.field)
    return ChainMap(dual_X, CD, comps)


def global_duality(F: CellularSheafComplex, DF=None) -> dict:
    """Dimension identity ``H^{-q}(X; DF) = H^q(X; F)`` plus the comparison map verdict."""
    DF = DF if DF is not None else dualize(F)
    hF = hyper(F).betti()
    hD = hyper(DF).betti()
    dims_ok = hD == {-q: v for q, v in hF.items()}
    phi = duality_map(F, DF)
    return {"dims": dims_ok, "quasi_iso": phi.is_quasi_iso(), "H": hF, "H_dual": hD}


def orientation_map(F: CellularSheafComplex, DF=None) -> SheafMap:
    """``F -> DF`` for F constant of rank one in degree ``-m/2`` on a closed
    oriented m-manifold, given by the fundamental functional on top cells."""
    site = F.site
    m = site.dim
    if m % 2 or not site.compact:
        raise PreconditionError("needs a closed even-dimensional manifold model")
    s = m // 2
    DF = DF if DF is not None else dualize(F)
    tops = [t for t in site.cells if site.dims[t] == m]
    codim1 = [u for u in site.cells if site.dims[u] == m - 1]
    rows = [[site.faces[t].get(u, 0) for t in tops] for u in codim1]
    M = Matrix.from_lists(rows, ncols=len(tops), field=F.field)
    N = M.nullspace()
    if N.ncols != 1:
        raise PreconditionError("model is not a connected orientable manifold")
    eps = {t: N[i, 0] for i, t in enumerate(tops)}
    comps = []
    for c in site.cells:
        if F.stalks[c].dims != {-s: 1}:
            raise PreconditionError("F must be rank one in degree -dim/2")
        T, C = _cellular_total(F, site.star(c))
        D = DF.stalks[c]
        vecrow = {}
        for (key, q), (deg, off, size) in T.where.items():
            if deg == s and site.dims[key] == m:
                vecrow[off] = eps[key]
        col = Matrix(D.dim(-s), 1, [{0: vecrow[i]} if i in vecrow else {}
                                    for i in range(D.dim(-s))], F.field)
        comps.append(ChainMap(F.stalks[c], D, {-s: col}))
    return SheafMap(F, DF, comps)


def intersection_form(F: CellularSheafComplex, alpha: SheafMap, k: int) -> Matrix:
    """Pairing ``H^k(X; F) x H^{-k}(X; F) -> field`` induced by ``alpha: F -> DF``.

    Rows index the basis of ``H^k``, columns that of ``H^{-k}``.
    """
    if not alpha.is_quasi_iso():
        raise PreconditionError("alpha must be a quasi-isomorphism")
    DF = alpha.target
    phi = duality_map(F, DF)
    a = hyper_map(alpha)
    Hphi = phi.induced(-k)
    Ha = a.induced(-k)
    Y = Hphi.inverse() @ Ha if Hphi.nrows else Matrix.zeros(0, Ha.ncols, F.field)
    R = phi.source.cohomology(-k).reps
    CX = hyper(F)
    Zr = CX.cohomology(k).reps
    P = R.T @ Zr
    return P.T @ Y
