from __future__ import annotations

import random

import pytest

from constructible import models as M
from constructible.field import QQ, GF
from constructible.linalg import Matrix
from constructible.sheaves import (CellSite, CellularSheafComplex, PreconditionError, SheafMap,
                                   SiteError, compact_supports, costalk, costalk_pair,
                                   excision_holds, hyper, localization_triangles,
                                   mayer_vietoris_exact, open_pushforward, punctured_euler,
                                   punctured_star, relative_hyper, sheaf_homotopic)

import gen


def const(site, deg=0, f=QQ):
    return CellularSheafComplex.constant(site, deg, 1, None, f)


@pytest.mark.parametrize("name,betti", [
    ("point", {0: 1}), ("circle", {0: 1, 1: 1}), ("disk", {0: 1}),
    ("sphere", {0: 1, 2: 1}), ("torus", {0: 1, 1: 2, 2: 1}), ("nodal_cubic", {0: 1, 1: 1, 2: 1}),
    ("annulus", {0: 1, 1: 1}),
])
def test_hypercohomology_of_constant_sheaf(name, betti):
    assert hyper(const(M.SITES[name]())).betti() == betti


def test_cellular_and_order_models_agree():
    for name in ("circle", "disk", "torus"):
        site = M.SITES[name]()
        F = const(site)
        from constructible.sheaves import cellular_complex, order_complex
        assert cellular_complex(F).betti() == order_complex(F).betti()


def test_twisted_circle_kills_cohomology():
    C = M.circle()
    F = CellularSheafComplex.local_system(C, 1, {("v0", "e0"): Matrix.from_lists([[-1]])})
    assert hyper(F).betti() == {}
    # over GF(2) the twist is trivial
    F2 = CellularSheafComplex.local_system(C, 1, {("v0", "e0"): Matrix.from_lists(
        [[-1]], field=GF(2))}, field=GF(2))
    assert hyper(F2).betti() == {0: 1, 1: 1}


def test_broken_incidence_is_rejected():
    with pytest.raises(SiteError):
        CellSite(["a", "b", "c", "e1", "e2", "f"], [0, 0, 0, 1, 1, 2],
                 {"e1": {"b": 1, "a": -1}, "e2": {"c": 1, "b": -1},
                  "f": {"e1": 1, "e2": 1}})


def test_non_natural_restrictions_rejected():
    D = M.disk()
    F = const(D)
    restr = dict(F.restr)
    key = next(iter(restr))
    m = restr[key]
    restr[key] = m.__class__(m.source, m.target, {0: Matrix.from_lists([[2]])})
    with pytest.raises(SiteError):
        CellularSheafComplex(D, F.stalks, restr, QQ)


def test_relative_and_compact_supports():
    D = M.disk()
    F = const(D)
    bd = [c for c in D.names if c != "f"]
    assert relative_hyper(F, bd).betti() == {2: 1}
    assert compact_supports(F, ["f"]).betti() == {2: 1}
    with pytest.raises(PreconditionError):
        relative_hyper(F, ["f"])


def test_costalk_is_shifted_local_cohomology():
    site, _ = M.two_lines()
    K = const(site)
    assert costalk(K, "o").betti() == {1: 1, 2: 2}
    for c in site.names:
        sh = site.dims[site.index[c]]
        assert costalk_pair(K, c).betti() == {k - sh: v for k, v in costalk(K, c).betti().items()}


def test_smooth_costalks():
    D = M.disk()
    K = const(D)
    # a point of the open 2-cell: H^2_c of a disk
    assert costalk(K, "f").betti() == {2: 1}


@pytest.mark.parametrize("germ", ["two_lines", "nodal_cubic", "cone_torus", "cone_two_spheres"])
def test_punctured_star_euler_vanishes(germ):
    site, _ = M.GERMS[germ]()
    K = const(site)
    for c in site.names:
        assert punctured_euler(K, c) == 0


def test_punctured_star_of_cone_point_is_link():
    site, _ = M.cone_torus()
    assert punctured_star(const(site), "o").betti() == {0: 1, 1: 3, 2: 3, 3: 1}


def test_mayer_vietoris_and_excision():
    C = M.circle(3)
    F = const(C)
    X = C.all_cells()
    assert mayer_vietoris_exact(F, X - {C.index["v2"]}, X - {C.index["v0"]})
    T = M.torus()
    v = T.cells[0]
    assert mayer_vietoris_exact(const(T), T.star(v), T.all_cells() - {v})
    assert excision_holds(F, {C.index["v0"]}, C.star("v0"))
    with pytest.raises(PreconditionError):
        mayer_vietoris_exact(F, C.star("v0"), C.star("v1"))


@pytest.mark.parametrize("name,open_", [("disk", ["f"]), ("circle", ["e0", "e1", "v1"])])
def test_localization_triangles(name, open_):
    site = M.SITES[name]()
    res = localization_triangles(const(site), open_)
    assert res["extension"][2]
    assert res["sections"][2]


def test_open_pushforward_of_punctured_disk():
    D = M.disk()
    F = const(D)
    U = D.all_cells() - {D.index["v0"]}
    G = open_pushforward(F, U)
    # stalk at the removed vertex sees the punctured neighbourhood (contractible)
    assert G.stalks[D.index["v0"]].betti() == {0: 1}


def test_warning_morphism_visible_only_at_sheaf_level():
    f = M.warning_morphism()
    assert f.induces_zero()
    assert sheaf_homotopic(f, SheafMap.zero(f.source, f.target)) is None


def test_random_sheaves_are_valid():
    rng = random.Random(0)
    site, _ = M.two_lines()
    for _ in range(10):
        F = gen.rand_sheaf(rng, site, QQ)
        CellularSheafComplex(site, F.stalks, {(site.names[s], site.names[t]): m
                                              for (s, t), m in F.restr.items()}, QQ)
