"""Bundled cell models: small manifolds, cones, curve and surface germs."""
from __future__ import annotations

from .complexes import ChainMap, CochainComplex
from .field import active_field
from .linalg import Matrix
from .sheaves import CellSite, CellularSheafComplex, SheafMap, Stratification


def _site(cells, compact=True, complex_model=False, name=""):
    """``cells``: list of ``(name, dim, {face: sign})``."""
    names = [c[0] for c in cells]
    dims = [c[1] for c in cells]
    faces = {c[0]: dict(c[2]) for c in cells if c[2]}
    return CellSite(names, dims, faces, compact=compact, complex_model=complex_model, name=name)


def _cells_of(site):
    return [(site.names[i], site.dims[i],
             {site.names[j]: s for j, s in site.faces[i].items()}) for i in site.cells]


def point():
    return _site([("pt", 0, {})], name="point")


def segment():
    return _site([("a", 0, {}), ("b", 0, {}), ("e", 1, {"b": 1, "a": -1})], name="segment")


def circle(n: int = 2):
    """``n`` vertices and ``n`` edges, ``e_i`` running from ``v_i`` to ``v_{i+1}``."""
    if n < 2:
        raise ValueError("a regular circle needs at least two vertices")
    cells = [(f"v{i}", 0, {}) for i in range(n)]
    for i in range(n):
        j = (i + 1) % n
        cells.append((f"e{i}", 1, {f"v{j}": 1, f"v{i}": -1}))
    return _site(cells, name="circle")


def disk():
    """A closed 2-simplex."""
    return _site([
        ("v0", 0, {}), ("v1", 0, {}), ("v2", 0, {}),
        ("e01", 1, {"v1": 1, "v0": -1}), ("e12", 1, {"v2": 1, "v1": -1}),
        ("e02", 1, {"v2": 1, "v0": -1}),
        ("f", 2, {"e12": 1, "e02": -1, "e01": 1}),
    ], name="disk")


def sphere_min(n: int):
    """The n-sphere with two cells in each dimension."""
    cells = [("s0+", 0, {}), ("s0-", 0, {})]
    for k in range(1, n + 1):
        for s in "+-":
            cells.append((f"s{k}{s}", k, {f"s{k - 1}+": 1, f"s{k - 1}-": -1}))
    return _site(cells, name=f"sphere{n}")


def sphere2():
    """Triangulated-looking 2-sphere: poles n, s and equator vertices a, b."""
    return _site([
        ("n", 0, {}), ("s", 0, {}), ("a", 0, {}), ("b", 0, {}),
        ("e1", 1, {"b": 1, "a": -1}), ("e2", 1, {"b": 1, "a": -1}),
        ("na", 1, {"a": 1, "n": -1}), ("nb", 1, {"b": 1, "n": -1}),
        ("sa", 1, {"a": 1, "s": -1}), ("sb", 1, {"b": 1, "s": -1}),
        ("u1", 2, {"na": 1, "e1": 1, "nb": -1}), ("u2", 2, {"nb": 1, "e2": -1, "na": -1}),
        ("l1", 2, {"sb": 1, "e1": -1, "sa": -1}), ("l2", 2, {"sa": 1, "e2": 1, "sb": -1}),
    ], name="sphere")


def nodal_cubic():
    """The sphere above with both poles glued to one node ``p``."""
    return _site([
        ("p", 0, {}), ("a", 0, {}), ("b", 0, {}),
        ("e1", 1, {"b": 1, "a": -1}), ("e2", 1, {"b": 1, "a": -1}),
        ("pa", 1, {"a": 1, "p": -1}), ("pb", 1, {"b": 1, "p": -1}),
        ("qa", 1, {"a": 1, "p": -1}), ("qb", 1, {"b": 1, "p": -1}),
        ("u1", 2, {"pa": 1, "e1": 1, "pb": -1}), ("u2", 2, {"pb": 1, "e2": -1, "pa": -1}),
        ("l1", 2, {"qb": 1, "e1": -1, "qa": -1}), ("l2", 2, {"qa": 1, "e2": 1, "qb": -1}),
    ], complex_model=True, name="nodal_cubic")


def product(A: CellSite, B: CellSite, name=""):
    """Product cell structure with ``d(a x b) = da x b + (-1)^{|a|} a x db``."""
    cells = []
    for i in A.cells:
        for j in B.cells:
            faces = {}
            for fi, s in A.faces[i].items():
                faces[f"{A.names[fi]}*{B.names[j]}"] = s
            sign = -1 if A.dims[i] % 2 else 1
            for fj, s in B.faces[j].items():
                faces[f"{A.names[i]}*{B.names[fj]}"] = sign * s
            cells.append((f"{A.names[i]}*{B.names[j]}", A.dims[i] + B.dims[j], faces))
    return _site(cells, compact=A.compact and B.compact, name=name)


def torus():
    return product(circle(), circle(), name="torus")


def torus3():
    return product(torus(), circle(), name="torus3")


def annulus():
    return product(circle(), segment(), name="annulus")


def disjoint(*sites, prefixes=None):
    prefixes = prefixes or [f"{k}." for k in range(len(sites))]
    cells = []
    for pre, S in zip(prefixes, sites):
        for nm, d, fs in _cells_of(S):
            cells.append((pre + nm, d, {pre + f: s for f, s in fs.items()}))
    return _site(cells, compact=all(S.compact for S in sites))


def open_cone(link: CellSite, apex="o", complex_model=False, name=""):
    """Open cone: apex plus ``c(x)`` for each link cell; the link itself is absent."""
    cells = [(apex, 0, {})]
    for i in link.cells:
        nm = link.names[i]
        if link.dims[i] == 0:
            faces = {apex: -1}
        else:
            faces = {f"c({link.names[j]})": -s for j, s in link.faces[i].items()}
        cells.append((f"c({nm})", link.dims[i] + 1, faces))
    return _site(cells, compact=False, complex_model=complex_model, name=name)


def suspension(link: CellSite, name=""):
    cells = [("N", 0, {}), ("S", 0, {})] + _cells_of(link)
    for pole in "NS":
        for i in link.cells:
            nm = link.names[i]
            faces = {nm: 1}
            if link.dims[i] == 0:
                faces[pole] = -1
            else:
                for j, s in link.faces[i].items():
                    faces[f"{pole}({link.names[j]})"] = -s
            cells.append((f"{pole}({nm})", link.dims[i] + 1, faces))
    return _site(cells, complex_model=True, name=name)


# germs with stratifications -------------------------------------------------------

def two_lines():
    """Two complex lines meeting at ``o``: the open cone over two circles."""
    link = disjoint(circle(), circle(), prefixes=["L1.", "L2."])
    site = open_cone(link, complex_model=True, name="two_lines")
    strat = Stratification.build(site, {
        "p": (["o"], 0),
        "L1": ([c for c in site.names if c.startswith("c(L1.")], 1),
        "L2": ([c for c in site.names if c.startswith("c(L2.")], 1),
    })
    return site, strat


def branch_cells(site, k):
    """Closed cell set of the k-th line of :func:`two_lines`."""
    return ["o"] + [c for c in site.names if c.startswith(f"c(L{k}.")]


def nodal_cubic_germ():
    site = nodal_cubic()
    strat = Stratification.build(site, {"p": (["p"], 0),
                                        "smooth": ([c for c in site.names if c != "p"], 1)})
    return site, strat


def cone_torus():
    site = open_cone(torus3(), complex_model=True, name="cone_torus")
    strat = Stratification.build(site, {"o": (["o"], 0),
                                        "smooth": ([c for c in site.names if c != "o"], 2)})
    return site, strat


def cone_two_spheres():
    link = disjoint(sphere_min(3), sphere_min(3), prefixes=["P1.", "P2."])
    site = open_cone(link, complex_model=True, name="cone_two_spheres")
    strat = Stratification.build(site, {
        "o": (["o"], 0),
        "P1": ([c for c in site.names if c.startswith("c(P1.")], 2),
        "P2": ([c for c in site.names if c.startswith("c(P2.")], 2),
    })
    return site, strat


def suspension_torus():
    site = suspension(torus3(), name="suspension_torus")
    strat = Stratification.build(site, {"N": (["N"], 0), "S": (["S"], 0),
                                        "smooth": ([c for c in site.names
                                                    if c not in ("N", "S")], 2)})
    return site, strat


def smooth(site, cdim):
    return site, Stratification.build(site, {"X": (list(site.names), cdim)})


def disk_curve():
    return smooth(disk(), 1)


def sphere_curve():
    return smooth(sphere2(), 1)


GERMS = {
    "two_lines": two_lines,
    "nodal_cubic": nodal_cubic_germ,
    "cone_torus": cone_torus,
    "cone_two_spheres": cone_two_spheres,
    "suspension_torus": suspension_torus,
    "disk": disk_curve,
    "sphere": sphere_curve,
}

SITES = {
    "point": point, "segment": segment, "circle": circle, "disk": disk, "annulus": annulus,
    "sphere": sphere2, "torus": torus, "nodal_cubic": nodal_cubic,
    "two_lines": lambda: two_lines()[0], "cone_torus": lambda: cone_torus()[0],
    "cone_two_spheres": lambda: cone_two_spheres()[0],
    "suspension_torus": lambda: suspension_torus()[0],
}


# the morphism that vanishes on cohomology sheaves but not in the derived category ----

def warning_morphism(field=None):
    """On the two-lines germ: ``A = [k_X -> k_L1 + k_L2]`` (degrees 0, 1) and the
    map ``A -> k_X`` which is the identity in degree 0."""
    fld = field if field is not None else active_field()
    site, _ = two_lines()
    L = [site.cellset(branch_cells(site, k)) for k in (1, 2)]
    stalks = []
    for c in site.cells:
        r = sum(1 for Lk in L if c in Lk)
        alpha = Matrix.from_lists([[1]] * r, ncols=1, field=fld)
        stalks.append(CochainComplex({0: 1, 1: r}, {0: alpha}, fld))
    restr = {}
    for t in site.cells:
        for s in site.faces[t]:
            rows = []
            ts = [k for k, Lk in enumerate(L) if t in Lk]
            ss = [k for k, Lk in enumerate(L) if s in Lk]
            for k in ts:
                rows.append([1 if k == k2 else 0 for k2 in ss])
            P = Matrix.from_lists(rows, ncols=len(ss), field=fld)
            restr[(s, t)] = ChainMap(stalks[s], stalks[t],
                                     {0: Matrix.identity(1, fld), 1: P})
    A = CellularSheafComplex(site, stalks, restr, fld)
    K = CellularSheafComplex.constant(site, 0, 1, None, fld)
    f = SheafMap(A, K, [ChainMap(A.stalks[c], K.stalks[c], {0: Matrix.identity(1, fld)})
                        for c in site.cells])
    return f
