from __future__ import annotations

import random

import pytest

from constructible import models as M
from constructible.duality import dualize
from constructible.field import GF, QQ
from constructible.linalg import Matrix
from constructible.perversity import (ICInput, constant_to_ic, deligne_construction, deligne_ic,
                                      ic_axiom_check, ih, is_perverse, support_profile,
                                      truncate_sheaf)
from constructible.sheaves import (CellularSheafComplex, PreconditionError, hyper,
                                   sheaf_direct_sum)

import gen

GERMS = ["two_lines", "nodal_cubic", "cone_torus", "cone_two_spheres", "disk", "sphere"]


def k_shift(site, strat, f=QQ):
    return CellularSheafComplex.constant(site, -strat.dim, 1, None, f)


@pytest.mark.parametrize("germ,expected", [
    ("two_lines", True), ("nodal_cubic", True), ("cone_torus", True),
    ("cone_two_spheres", False), ("disk", True),
])
def test_constant_sheaf_perversity(germ, expected):
    site, strat = M.GERMS[germ]()
    v = is_perverse(k_shift(site, strat), strat)
    assert v.ok is expected
    if not expected:
        assert ("cosupport", "o", -1) in v.witnesses


def test_wrong_shift_is_not_perverse():
    site, strat = M.two_lines()
    v = is_perverse(CellularSheafComplex.constant(site, 0), strat)
    assert not v.ok and v.witnesses


def test_non_constructible_input_rejected():
    site, strat = M.two_lines()
    F = CellularSheafComplex.constant(site, -1, 1, M.branch_cells(site, 1)[:3])
    with pytest.raises(PreconditionError):
        support_profile(F, strat)


@pytest.mark.parametrize("germ", ["two_lines", "nodal_cubic"])
def test_both_forms_agree_on_random_sheaves(germ):
    rng = random.Random(21)
    site, strat = M.GERMS[germ]()
    verdicts = set()
    for _ in range(40):
        F = gen.rand_constructible(rng, site, strat, QQ)
        verdicts.add(is_perverse(F, strat).ok)  # raises AssertionError on disagreement
    assert verdicts == {True, False}


@pytest.mark.parametrize("germ,cell,table", [
    ("two_lines", "o", {-1: 2}),
    ("nodal_cubic", "p", {-1: 2}),
    ("cone_torus", "o", {-2: 1, -1: 3}),
    ("cone_two_spheres", "o", {-2: 2}),
])
def test_ic_stalks(germ, cell, table):
    site, strat = M.GERMS[germ]()
    IC = deligne_ic(ICInput.constant(site, strat))
    assert IC.stalks[site.index[cell]].betti() == table


@pytest.mark.parametrize("germ", GERMS)
def test_ic_axioms_and_self_duality(germ):
    site, strat = M.GERMS[germ]()
    IC = deligne_ic(ICInput.constant(site, strat))
    res = ic_axiom_check(IC, strat)
    assert res["ok"], res["failures"]
    if germ != "disk":  # the closed disk has boundary, where D(IC) vanishes
        D = dualize(IC)
        assert [C.betti() for C in D.stalks] == [C.betti() for C in IC.stalks]


def test_constant_sheaf_fails_ic_axioms_on_two_lines():
    site, strat = M.two_lines()
    res = ic_axiom_check(k_shift(site, strat), strat)
    assert not res["ok"] and not res["axiom3"]
    assert res["perverse"]


def test_nodal_cubic_ih_matches_normalization():
    site, strat = M.nodal_cubic_germ()
    assert ih(ICInput.constant(site, strat)) == {-1: 1, 1: 1}
    S = M.sphere2()
    assert hyper(CellularSheafComplex.constant(S, -1)).betti() == {-1: 1, 1: 1}


def test_two_lines_ic_is_sum_of_branches():
    site, strat = M.two_lines()
    IC = deligne_ic(ICInput.constant(site, strat))
    B = sheaf_direct_sum(*[CellularSheafComplex.constant(site, -1, 1, M.branch_cells(site, k))
                           for k in (1, 2)])
    m = gen.rand_sheaf_map(random.Random(0), B, IC)
    assert m.is_quasi_iso()


def test_constant_to_ic():
    site, strat = M.two_lines()
    inp = ICInput.constant(site, strat)
    res = deligne_construction(inp)
    phi = constant_to_ic(inp, res)
    for c in inp.U1:
        assert phi.comps[c].is_quasi_iso()
    o = site.index["o"]
    assert phi.comps[o].induced(-1).rank() == 1


def test_local_system_coefficients():
    site, strat = M.two_lines()
    edge = next(c for c in site.names if c.startswith("c(L1.e"))
    face = next(site.names[s] for s in site.faces[site.index[edge]]
                if site.names[s] != "o")
    inp = ICInput.local_system(site, strat, 1, {(face, edge): Matrix.from_lists([[-1]])})
    IC = deligne_ic(inp)
    assert IC.stalks[site.index["o"]].betti() == {-1: 1}
    assert ic_axiom_check(IC, strat, L=inp.L)["ok"]


def test_ic_input_validation():
    site, strat = M.two_lines()
    with pytest.raises(PreconditionError):
        ICInput(site, strat, CellularSheafComplex.constant(site, 0))


def test_ic_over_prime_field():
    site, strat = M.cone_torus()
    IC = deligne_ic(ICInput.constant(site, strat, field=GF(7)))
    assert IC.stalks[site.index["o"]].betti() == {-2: 1, -1: 3}


@pytest.mark.parametrize("f", [QQ, GF(5)])
def test_sheaf_truncation_stalk_formula(f):
    rng = random.Random(22)
    site = M.circle()
    for _ in range(15):
        F = gen.rand_sheaf(rng, site, f)
        for p in range(-3, 3):
            G, inc = truncate_sheaf(F, p)
            for c in site.cells:
                want = {k: v for k, v in F.stalks[c].betti().items() if k <= p}
                assert G.stalks[c].betti() == want
                # the inclusion is injective on the surviving cohomology
                for k in want:
                    assert inc.comps[c].induced(k).rank() == want[k]
