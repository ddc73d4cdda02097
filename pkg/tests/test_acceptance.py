"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (``pytest tests/test_acceptance.py -s``) or directly with
``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import contextlib
import io as _io
import json
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest  # noqa: E402

import gen  # noqa: E402
from constructible import cli, io  # noqa: E402
from constructible import models as M  # noqa: E402
from constructible.complexes import (ChainMap, Roof, compose_roofs, cone, direct_sum,  # noqa: E402
                                     hom_complex, minimal_model, roofs_equivalent, shift,
                                     tensor, tilde_comparisons, truncate_above, truncate_below,
                                     truncate_above_tilde, truncate_below_tilde, turn_triangle)
from constructible.duality import double_dual_check, dualize, global_duality, swap_check  # noqa: E402
from constructible.field import GF, QQ  # noqa: E402
from constructible.milnor import (betti_bound_section4, charpoly, cyclic_nearby_datum,  # noqa: E402
                                  cyclic_point_datum, lefschetz_number, seb_thom_join)
from constructible.linalg import Matrix, block_diag, kron  # noqa: E402
from constructible.perversity import (ICInput, deligne_ic, ic_axiom_check, ih,  # noqa: E402
                                      is_perverse, truncate_sheaf)
from constructible.quiver import (can_var_identities, cokernel, kernel,  # noqa: E402
                                  kernel_support_theorem_check, stalk_map, warning_sequence)
from constructible.sheaves import (CellularSheafComplex, SheafMap, costalk, hyper,  # noqa: E402
                                   punctured_euler, sheaf_direct_sum, sheaf_homotopic)

FIX = cli.fixture_dir()


def fixture_spaces():
    out = {}
    for name in cli.fixture_names():
        doc = json.loads((FIX / f"{name}.json").read_text())
        kind, obj = io.parse_document(doc, QQ)
        if kind == "space":
            out[name] = obj
    return out


def report(n, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} ({detail}; {elapsed:.1f}s)"
    print(line, flush=True)


class Check:
    """Collects failures for one criterion instead of stopping at the first."""

    def __init__(self):
        self.failures = []
        self.count = 0

    def __call__(self, cond, what):
        self.count += 1
        if not cond:
            self.failures.append(what)

    @property
    def ok(self):
        return not self.failures


# 1 ---------------------------------------------------------------------------------

def _les_ranks(T):
    deg = set(T.a.dims) | set(T.b.dims) | set(T.c.dims)
    if not deg:
        return {}
    out = {}
    for p in range(min(deg) - 2, max(deg) + 2):
        out[("f", p)] = T.f.induced(p).rank()
        out[("g", p)] = T.g.induced(p).rank()
        out[("h", p)] = T.h.induced(p).rank()
    return out


def criterion_1(c):
    rng = random.Random(101)
    for f in (QQ, GF(5)):
        for _ in range(100):
            A, B = gen.rand_complex(rng, f), gen.rand_complex(rng, f)
            m = gen.rand_chain_map(rng, A, B)
            Mc, T = cone(m)
            c(T.is_exact(), "cone LES not exact")
            c(cone(ChainMap.identity(A))[0].is_acyclic(), "cone(id) not acyclic")
            c(cone(ChainMap.zero(A, B))[0] == direct_sum(shift(A, 1), B), "cone(0) differs")
            T2 = turn_triangle(T)
            c(T2.is_exact(), "turned triangle not exact")
            r1, r2 = _les_ranks(T), _les_ranks(T2)
            same = all(r2.get(("f", p)) in (None, v) for (k, p), v in r1.items() if k == "g")
            same &= all(r2.get(("g", p)) in (None, v) for (k, p), v in r1.items() if k == "h")
            same &= all(r2.get(("h", p - 1)) in (None, v) for (k, p), v in r1.items() if k == "f")
            c(same, "turning changed LES ranks")
    return "200 random maps over Q and GF(5)"


# 2 ---------------------------------------------------------------------------------

def criterion_2(c):
    rng = random.Random(102)
    for i in range(200):
        f = QQ if i % 2 else GF(5)
        A, B = gen.rand_complex(rng, f, maxdim=3), gen.rand_complex(rng, f, maxdim=3)
        for X in (tensor(A, B), hom_complex(B, A)):
            c(all((X.diff(k + 1) @ X.diff(k)).is_zero() for k in X.degrees()), "d^2 != 0")
        H = hom_complex(B, A)
        k = rng.randint(-3, 3)
        Hk = hom_complex(B, shift(A, k))
        c(Hk.dims == shift(H, k).dims and Hk.betti() == shift(H, k).betti(),
          "Hom(B, A[k]) != Hom(B, A)[k]")
    return "200 tensor/Hom instances"


# 3 ---------------------------------------------------------------------------------

def _rand_roof(rng, A, B):
    H, i, _ = minimal_model(A)
    return Roof(i, gen.rand_chain_map(rng, H, B))


def criterion_3(c):
    f = M.warning_morphism()
    c(f.induces_zero(), "warning morphism nonzero on cohomology sheaves")
    c(sheaf_homotopic(f, SheafMap.zero(f.source, f.target)) is None,
      "warning morphism is null-homotopic")
    rng = random.Random(103)
    triples = nonzero = 0
    while triples < 30:
        # same base complex plus noise, so the cohomology degrees line up
        A = gen.rand_complex(rng, QQ, maxdim=3)
        if not A.betti():
            continue
        B, C, D = (direct_sum(A, gen.rand_complex(rng, QQ, maxdim=2)) for _ in range(3))
        triples += 1
        r1, r2, r3 = _rand_roof(rng, A, B), _rand_roof(rng, B, C), _rand_roof(rng, C, D)
        left = compose_roofs(compose_roofs(r1, r2), r3)
        right = compose_roofs(r1, compose_roofs(r2, r3))
        c(roofs_equivalent(left, right), "roof composition not associative")
        nonzero += not roofs_equivalent(left, Roof.from_map(ChainMap.zero(A, D)))
    return (f"warning map zero on cohomology but not null-homotopic; "
            f"{triples} roof triples, {nonzero} with nonzero composite")


# 4 ---------------------------------------------------------------------------------

def criterion_4(c):
    rng = random.Random(104)
    for f in (QQ, GF(5)):
        for _ in range(50):
            A = gen.rand_complex(rng, f)
            b = A.betti()
            for p in range(-4, 5):
                lo, hi = tilde_comparisons(A, p)
                c(lo.is_quasi_iso() and hi.is_quasi_iso(), "tilde variants not qi")
                c(truncate_below_tilde(A, p)[0].betti() == truncate_below(A, p)[0].betti(),
                  "tilde below differs")
                c(truncate_above_tilde(A, p)[0].betti() == truncate_above(A, p)[0].betti(),
                  "tilde above differs")
                T = truncate_below(A, p)[0]
                c(T.betti() == {k: v for k, v in b.items() if k <= p}, "stalk formula")
                for a in range(p + 1, p + 3):
                    c(truncate_below(truncate_above(A, a)[0], p)[0].is_acyclic(),
                      "tau<=b tau>=a nonzero")
    for _ in range(20):
        F = gen.rand_sheaf(rng, M.circle(), QQ)
        for p in range(-3, 3):
            G, _ = truncate_sheaf(F, p)
            c(all(G.stalks[x].betti() == {k: v for k, v in F.stalks[x].betti().items() if k <= p}
                  for x in F.site.cells), "sheaf stalk formula")
    return "100 random complexes, 20 random sheaves"


# 5 ---------------------------------------------------------------------------------

def _cell_supports(F):
    supp, cosupp = {}, {}
    for x in F.site.cells:
        for i in F.stalks[x].betti():
            supp.setdefault(i, set()).add(x)
        for i in costalk(F, x).betti():
            cosupp.setdefault(i, set()).add(x)
    return supp, cosupp


def _duality_checks(c, F, label):
    DF = dualize(F)
    c(swap_check(F, DF), f"{label}: stalk/costalk swap")
    c(double_dual_check(F, dualize(DF)), f"{label}: DD")
    supp_D, _ = _cell_supports(DF)
    _, cosupp_F = _cell_supports(F)
    c(cosupp_F == {-j: S for j, S in supp_D.items()}, f"{label}: cosupp/supp")
    return DF


def criterion_5(c):
    n_models = 0
    for name, sd in fixture_spaces().items():
        DF = _duality_checks(c, sd.sheaf, name)
        n_models += 1
        if sd.site.compact:
            g = global_duality(sd.sheaf, DF)
            c(g["dims"] and g["quasi_iso"], f"{name}: global duality")
    for name in sorted(M.SITES):
        _duality_checks(c, CellularSheafComplex.constant(M.SITES[name]()), name)
        n_models += 1
    rng = random.Random(105)
    for site in (M.circle(), M.two_lines()[0]):
        for _ in range(50):
            _duality_checks(c, gen.rand_sheaf(rng, site, QQ), "random")
    return f"{n_models} bundled models, 100 random sheaves"


# 6 ---------------------------------------------------------------------------------

def criterion_6(c):
    cases = [("two_lines", True), ("nodal_cubic", True), ("cone_torus", True),
             ("cone_two_spheres", False)]
    witness = None
    for germ, want in cases:
        site, strat = M.GERMS[germ]()
        try:
            v = is_perverse(CellularSheafComplex.constant(site, -strat.dim), strat)
        except AssertionError:
            c(False, f"{germ}: formulations disagree")
            continue
        c(v.ok is want, f"{germ}: verdict")
        if not want:
            c(bool(v.witnesses), f"{germ}: no witness")
            witness = v.witnesses[0]
    rng = random.Random(106)
    for germ in ("two_lines", "nodal_cubic"):
        site, strat = M.GERMS[germ]()
        for _ in range(30):
            try:
                is_perverse(gen.rand_constructible(rng, site, strat, QQ), strat)
            except AssertionError:
                c(False, f"{germ}: formulations disagree on a random sheaf")
    return f"witness {witness}; 60 random constructible sheaves"


# 7 ---------------------------------------------------------------------------------

def criterion_7(c):
    site, strat = M.nodal_cubic_germ()
    table = ih(ICInput.constant(site, strat))
    c(table == {-1: 1, 1: 1}, f"nodal IH {table}")
    normal = hyper(CellularSheafComplex.constant(M.sphere2(), -1)).betti()
    c(table == normal, "normalization oracle differs")
    site, strat = M.two_lines()
    IC = deligne_ic(ICInput.constant(site, strat))
    c(IC.stalks[site.index["o"]].betti() == {-1: 2}, "two-lines IC stalk")
    B = sheaf_direct_sum(*[CellularSheafComplex.constant(site, -1, 1, M.branch_cells(site, k))
                           for k in (1, 2)])
    c(gen.rand_sheaf_map(random.Random(0), B, IC).is_quasi_iso(), "IC != sum of branches")
    res = ic_axiom_check(CellularSheafComplex.constant(site, -1), strat)
    c(not res["ok"], "k[1] passes the IC axioms on two lines")
    for germ in ("two_lines", "nodal_cubic", "cone_torus", "cone_two_spheres", "disk",
                 "sphere", "suspension_torus"):
        s, st = M.GERMS[germ]()
        c(ic_axiom_check(deligne_ic(ICInput.constant(s, st)), st)["ok"], f"{germ}: IC axioms")
    n = 0
    for name, sd in fixture_spaces().items():
        if sd.site.complex_model:
            K = CellularSheafComplex.constant(sd.site)
            for x in sd.site.cells:
                c(punctured_euler(K, x) == 0, f"{name}: punctured Euler")
                n += 1
    return f"IH {table}; {n} punctured stars"


# 8 ---------------------------------------------------------------------------------

def criterion_8(c):
    from test_quiver import constructors, factor_through_epi, factor_through_mono
    for f in (QQ, GF(7)):
        for P in constructors(f):
            ids = can_var_identities(P)
            c(P.validate()["ok"] and ids["var_can"] and ids["can_var"], "constructor")
    rng = random.Random(108)
    for i in range(200):
        P = gen.rand_quiver(rng, QQ if i % 2 else GF(5))
        ids = can_var_identities(P)
        c(P.validate()["relation"] and ids["var_can"] and ids["can_var"], "random object")
    for _ in range(30):
        P = gen.rand_quiver(rng, QQ)
        m, a = gen.rand_endomorphism(rng, P), gen.rand_endomorphism(rng, P)
        _, inc = kernel(m)
        _, inc2 = kernel(m @ a)
        c((m @ inc).is_zero() and factor_through_mono(a @ inc2, inc) is not None, "kernel")
        _, q = cokernel(m)
        _, q2 = cokernel(a @ m)
        c((q @ m).is_zero() and factor_through_epi(q2 @ a, q) is not None, "cokernel")
    K, i, q = warning_sequence()
    c(K.V == [0, 0] and K.W == 1 and (q @ i).is_zero(), "warning sequence")
    c(all(stalk_map(i).induced(k).is_zero() for k in (-1, 0)), "skyscraper not zero on stalks")
    c(stalk_map(q).induced(-1).rank() == 1, "quotient not injective on stalks")
    for _ in range(100):
        P = gen.rand_quiver(rng, QQ)
        c(kernel_support_theorem_check(gen.rand_endomorphism(rng, P))["ok"], "theorem check")
    return "200 random objects, 100 random endomorphisms"


# 9 ---------------------------------------------------------------------------------

def criterion_9(c):
    for a in range(2, 8):
        c(cyclic_point_datum(a).charpoly() == [QQ.one] * a, f"cyclic({a}) charpoly")
        c(lefschetz_number(cyclic_nearby_datum(a)) == 0, f"cyclic({a}) Lefschetz")
    from test_milnor import rand_datum
    rng = random.Random(109)
    biggest = 0
    for _ in range(30):
        P, Q = rand_datum(rng, QQ), rand_datum(rng, QQ)
        if not P.dims or not Q.dims:
            continue
        J = seb_thom_join(P, Q)
        TP = block_diag([P.T[k] for k in P.degrees()], QQ)
        TQ = block_diag([Q.T[k] for k in Q.degrees()], QQ)
        K = kron(TP, TQ)
        biggest = max(biggest, K.nrows)
        c(J.rank() == K.nrows and J.charpoly() == charpoly(K), "join vs brute force")
    for _ in range(50):
        branches = []
        for _ in range(rng.randint(1, 3)):
            n = rng.randint(1, 4)
            branches.append((n, gen.rand_invertible(rng, n, QQ)))
        want = sum((Matrix.identity(n) - h).nullspace().ncols for n, h in branches)
        c(betti_bound_section4(branches) == want, "betti bound")
    return f"joins up to rank {biggest}, 50 branch sets"


# 10 --------------------------------------------------------------------------------

def _run_cli(argv):
    out, err = _io.StringIO(), _io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue()


def criterion_10(c):
    manifest = json.loads((FIX / "expected" / "MANIFEST.json").read_text())
    n = 0
    for name, cmds in sorted(manifest.items()):
        for cmd in cmds:
            for fmt, ext in (("text", "txt"), ("json", "json")):
                want = (FIX / "expected" / f"{name}.{cmd.replace(' ', '_')}.{ext}").read_text()
                code, out = _run_cli(cmd.split() + ["--fixture", name, "--format", fmt])
                c(code == 0 and out == want, f"{name} {cmd} {fmt}")
                n += 1
    mal = json.loads((FIX / "malformed" / "EXPECTED.json").read_text())
    for name, spec in sorted(mal.items()):
        code, _ = _run_cli(spec["command"].split() + [str(FIX / "malformed" / f"{name}.json")])
        c(code == spec["exit"], f"malformed {name}: exit {code}")
    return f"{n} expected outputs, {len(mal)} malformed inputs"


CRITERIA = [
    (1, "triangle calculus", criterion_1, 10.0),
    (2, "sign conventions", criterion_2, None),
    (3, "derived morphisms", criterion_3, None),
    (4, "truncation", criterion_4, None),
    (5, "duality", criterion_5, 60.0),
    (6, "perversity", criterion_6, None),
    (7, "intersection cohomology", criterion_7, None),
    (8, "quiver category", criterion_8, None),
    (9, "Milnor calculus", criterion_9, None),
    (10, "CLI", criterion_10, None),
]


def run_criterion(n, title, fn, budget):
    c = Check()
    t0 = time.perf_counter()
    detail = fn(c)
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        c.failures.append(f"took {dt:.1f}s, budget {budget:.0f}s")
    if c.failures:
        detail += "; failures: " + ", ".join(sorted(set(c.failures))[:5])
    report(n, title, c.ok, detail, dt)
    return c


@pytest.mark.parametrize("n,title,fn,budget", CRITERIA, ids=[f"criterion_{n}" for n, *_ in CRITERIA])
def test_criterion(n, title, fn, budget, capsys):
    with capsys.disabled():
        print()
        c = run_criterion(n, title, fn, budget)
    assert c.ok, c.failures


if __name__ == "__main__":
    bad = sum(not run_criterion(*row).ok for row in CRITERIA)
    sys.exit(1 if bad else 0)
