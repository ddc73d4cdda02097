"""Command-line front end.

Exit status: 0 success, 2 unreadable input, 3 violated invariant,
4 unmet precondition of the requested computation.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import duality, io, milnor, perversity, quiver
from .complexes import ComplexError
from .field import FieldError, parse_field, use_field
from .milnor import MonodromyError
from .quiver import QuiverError
from .sheaves import (CellularSheafComplex, PreconditionError, SiteError, _cellular_total,
                      costalk, hyper)

EXIT_PARSE, EXIT_INVARIANT, EXIT_PRECONDITION = 2, 3, 4

QUIVER_SUBS = ["validate", "psi", "phi", "can-var", "kernel", "cokernel", "stalk", "costalk",
               "theorem-check"]


class Report:
    """Collects lines for text output and a dict for JSON output."""

    def __init__(self):
        self.lines = []
        self.data = {}

    def line(self, s=""):
        self.lines.append(s)

    def put(self, key, value):
        self.data[key] = value

    def render(self, fmt) -> str:
        if fmt == "json":
            return json.dumps(self.data, indent=2, sort_keys=True) + "\n"
        return "\n".join(self.lines) + "\n"


# formatting --------------------------------------------------------------------------

def table(b: dict) -> str:
    if not b:
        return "(0)"
    lo, hi = min(b), max(b)
    return "(" + ", ".join(f"{k}:{b.get(k, 0)}" for k in range(lo, hi + 1)) + ")"


def jtable(b: dict) -> dict:
    return {str(k): v for k, v in sorted(b.items())}


def mat_text(M) -> str:
    if M.nrows == 0 or M.ncols == 0:
        return f"[{M.nrows}x{M.ncols}]"
    f = M.field
    return "[" + "; ".join(" ".join(f.fmt(v) for v in r) for r in M.to_lists()) + "]"


def poly_text(coeffs, field) -> str:
    n = len(coeffs) - 1
    terms = []
    for i, c in enumerate(coeffs):
        if not c:
            continue
        e = n - i
        mon = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
        cs = field.fmt(c)
        if mon and cs == "1":
            terms.append(mon)
        elif mon and cs == "-1":
            terms.append("-" + mon)
        else:
            terms.append(cs + ("*" + mon if mon else ""))
    return " + ".join(terms).replace("+ -", "- ") or "0"


# loading -------------------------------------------------------------------------------

def fixture_dir():
    return resources.files("constructible") / "fixtures"


def fixture_names():
    return sorted(p.name[:-5] for p in fixture_dir().iterdir() if p.name.endswith(".json"))


def load(args, field):
    if args.fixture:
        path = fixture_dir() / f"{args.fixture}.json"
        if not path.is_file():
            raise io.SchemaError("--fixture", f"no bundled fixture {args.fixture!r}")
        text = path.read_text()
    else:
        if not args.input:
            raise io.SchemaError("input", "give an input file or --fixture")
        try:
            text = Path(args.input).read_text()
        except OSError as e:
            raise io.SchemaError(args.input, e.strerror or str(e)) from None
    return io.parse_document(io.load_text(text), field)


def _need(kind, want, cmd):
    if kind not in want:
        raise PreconditionError(f"'{cmd}' needs a {' or '.join(want)} document, got {kind}")


def _sheaf(sd: io.SpaceDoc, R: Report, default_degree=0):
    if sd.sheaf is not None:
        return sd.sheaf
    R.line(f"sheaf: constant rank 1 in degree {default_degree} (default)")
    return CellularSheafComplex.constant(sd.site, default_degree)


def _strat(sd: io.SpaceDoc, cmd):
    if sd.strat is None:
        raise PreconditionError(f"'{cmd}' needs a stratification")
    return sd.strat


def _ic_input(sd: io.SpaceDoc, field):
    strat = _strat(sd, "ih")
    coeffs = sd.coefficients or {"rank": 1, "twists": []}
    r = coeffs["rank"]
    if not coeffs["twists"]:
        return perversity.ICInput.constant(sd.site, strat, r, field)
    twists = {}
    for i, t in enumerate(coeffs["twists"]):
        p = f"$.coefficients.twists[{i}]"
        io._obj(t, p, ["face", "cell", "matrix"])
        twists[(t["face"], t["cell"])] = io.read_matrix(t["matrix"], r, r, field, f"{p}.matrix")
    return perversity.ICInput.local_system(sd.site, strat, r, twists, field)


def _cell_rows(site, fn):
    return [(site.names[c], fn(c)) for c in site.sorted_cells()]


# space commands -----------------------------------------------------------------------------

def cmd_validate_space(sd, R, field):
    site = sd.site
    by_dim = {}
    for c in site.cells:
        by_dim[site.dims[c]] = by_dim.get(site.dims[c], 0) + 1
    R.line(f"space {site.name}: {len(site)} cells " + table(by_dim).replace("(", "[").replace(")", "]")
           + (" compact" if site.compact else " non-compact"))
    R.put("cells", len(site))
    R.put("cells_by_dim", jtable(by_dim))
    R.put("compact", site.compact)
    if sd.strat is not None:
        st = sd.strat
        for n in st.names():
            cells, d = st.strata[n]
            R.line(f"stratum {n}: complex dim {d}, {len(cells)} cells")
        R.put("strata", {n: {"cdim": st.strata[n][1], "cells": len(st.strata[n][0])}
                         for n in st.names()})
    if sd.sheaf is not None:
        lo, hi = sd.sheaf.degree_range()
        R.line(f"sheaf: valid, degrees [{lo}, {hi}]")
        R.put("sheaf_degrees", [lo, hi])
    R.line("valid")
    R.put("valid", True)


def cmd_cohomology(sd, R, field):
    F = _sheaf(sd, R)
    site = sd.site
    H = hyper(F).betti()
    Hc = H if site.compact else _cellular_total(F, site.all_cells())[1].betti()
    R.line(f"H   {table(H)}")
    R.line(f"H_c {table(Hc)}")
    R.put("H", jtable(H))
    R.put("H_c", jtable(Hc))
    st = _cell_rows(site, lambda c: F.stalks[c].betti())
    co = _cell_rows(site, lambda c: costalk(F, c).betti())
    R.line("cell stalk costalk")
    for (n, a), (_, b) in zip(st, co):
        R.line(f"  {n} {table(a)} {table(b)}")
    R.put("stalk", {n: jtable(a) for n, a in st})
    R.put("costalk", {n: jtable(b) for n, b in co})


def cmd_dual(sd, R, field):
    F = _sheaf(sd, R)
    site = sd.site
    DF = duality.dualize(F)
    R.line("cell dual-stalk")
    rows = _cell_rows(site, lambda c: DF.stalks[c].betti())
    for n, b in rows:
        R.line(f"  {n} {table(b)}")
    R.put("dual_stalk", {n: jtable(b) for n, b in rows})
    dd = duality.double_dual_check(F)
    R.line(f"double dual: {'PASS' if dd else 'FAIL'}")
    R.put("double_dual", dd)
    if site.compact:
        g = duality.global_duality(F, DF)
        R.line(f"global duality: dims {'PASS' if g['dims'] else 'FAIL'}, "
               f"comparison map {'quasi-isomorphism' if g['quasi_iso'] else 'not a quasi-isomorphism'}")
        R.put("global_duality", {"dims": g["dims"], "quasi_iso": g["quasi_iso"],
                                 "H": jtable(g["H"]), "H_dual": jtable(g["H_dual"])})
    else:
        R.line("global duality: skipped (non-compact site)")
        R.put("global_duality", None)


def cmd_perverse(sd, R, field):
    strat = _strat(sd, "perverse-check")
    F = _sheaf(sd, R, -strat.dim)
    v = perversity.is_perverse(F, strat)
    R.line("perverse" if v.ok else "NOT perverse")
    for k, s, d in v.witnesses:
        R.line(f"  witness: {k} at stratum {s}, degree {d}")
    R.put("perverse", v.ok)
    R.put("witnesses", v.to_json()["witnesses"])


def cmd_ih(sd, R, field):
    inp = _ic_input(sd, field)
    IC = perversity.deligne_ic(inp)
    H = hyper(IC).betti()
    R.line(f"IH {table(H)}")
    R.put("IH", jtable(H))
    strat = inp.strat
    R.line("stratum IC-stalk")
    stalks = {}
    for n in strat.names():
        b = IC.stalks[perversity._probe(strat, n)].betti()
        stalks[n] = jtable(b)
        R.line(f"  {n} {table(b)}")
    R.put("IC_stalk", stalks)
    ax = perversity.ic_axiom_check(IC, strat)
    for k in ("axiom1", "axiom2", "axiom3", "perverse"):
        R.line(f"{k}: {'PASS' if ax[k] else 'FAIL'}")
    R.put("axioms", {k: ax[k] for k in ("axiom1", "axiom2", "axiom3", "perverse", "ok")})


SPACE_COMMANDS = {"validate": cmd_validate_space, "cohomology": cmd_cohomology,
                  "dual": cmd_dual, "perverse-check": cmd_perverse, "ih": cmd_ih}


# quiver commands -------------------------------------------------------------------------

def _quiver_obj(kind, obj):
    return obj if kind == "quiver" else obj.source


def _put_quiver(R, key, P):
    R.line(f"{key}: V={P.V} W={P.W}")
    R.line(f"  alpha {mat_text(P.alpha)}")
    R.line(f"  beta {mat_text(P.beta)}")
    R.put(key, io.quiver_to_json(P, header=False))


def quiver_command(sub, kind, obj, R):
    if sub in ("kernel", "cokernel", "theorem-check"):
        _need(kind, ["quiver_morphism"], f"quiver {sub}")
    P = _quiver_obj(kind, obj)
    if sub == "validate":
        v = P.validate()
        if kind == "quiver_morphism":
            obj.target.validate()
        for k in ("relation", "h_invertible", "T_tilde_invertible"):
            R.line(f"{k}: {'PASS' if v[k] else 'FAIL'}")
        R.line("valid" if v["ok"] else "INVALID")
        R.put("validate", v)
        if not v["ok"]:
            P.check()
    elif sub == "psi":
        P.check()
        n, H = quiver.psi(P)
        R.line(f"psi: dim {n}, monodromy {mat_text(H)}")
        R.put("psi", {"dim": n, "monodromy": io.write_matrix(H)})
    elif sub == "phi":
        P.check()
        n, T = quiver.phi(P)
        R.line(f"phi: dim {n}, monodromy {mat_text(T)}")
        R.put("phi", {"dim": n, "monodromy": io.write_matrix(T)})
    elif sub == "can-var":
        P.check()
        ids = quiver.can_var_identities(P)
        R.line(f"can {mat_text(P.alpha)}")
        R.line(f"var {mat_text(P.beta)}")
        R.line(f"var can = 1 - h: {'PASS' if ids['var_can'] else 'FAIL'}")
        R.line(f"can var = 1 - T~: {'PASS' if ids['can_var'] else 'FAIL'}")
        R.put("can", io.write_matrix(P.alpha))
        R.put("var", io.write_matrix(P.beta))
        R.put("identities", ids)
    elif sub in ("stalk", "costalk"):
        P.check()
        C = quiver.stalk_complex(P) if sub == "stalk" else quiver.costalk_complex(P)
        b = C.betti()
        R.line(f"{sub} {table(b)}")
        R.put(sub, jtable(b))
    elif sub == "kernel":
        K, _ = quiver.kernel(obj)
        _put_quiver(R, "kernel", K)
    elif sub == "cokernel":
        C, _ = quiver.cokernel(obj)
        _put_quiver(R, "cokernel", C)
    elif sub == "theorem-check":
        obj.source.check()
        r = quiver.kernel_support_theorem_check(obj)
        R.line(f"supp ker: branches {r['supp_ker']['branches']} origin {r['supp_ker']['origin']}")
        R.line(f"supp coker: branches {r['supp_coker']['branches']} "
               f"origin {r['supp_coker']['origin']}")
        R.line(f"s = {r['s']}")
        R.line("PASS" if r["ok"] else "FAIL")
        R.put("theorem", {k: v for k, v in r.items() if k != "details"})


# monodromy commands ------------------------------------------------------------------------

def _put_datum(R, key, P):
    f = P.field
    R.line(f"{key}: dims {table(P.dims)}")
    for k in P.degrees():
        R.line(f"  degree {k}: charpoly {poly_text(P.charpoly(k), f)}")
    lf = milnor.lefschetz_number(P)
    R.line(f"  Lefschetz number {f.fmt(lf)}")
    R.put(key, {"dims": jtable(P.dims),
                "charpoly": {str(k): [f.fmt(c) for c in P.charpoly(k)] for k in P.degrees()},
                "lefschetz": f.fmt(lf)})


def cmd_sebthom(kind, obj, R):
    if kind == "monodromy":
        factors = [obj]
    else:
        _need(kind, ["sebthom"], "sebthom")
        factors = obj
    if not factors:
        raise PreconditionError("nothing to join")
    J = factors[0]
    for P in factors[1:]:
        J = milnor.seb_thom_join(J, P)
    _put_datum(R, "join", J)


def cmd_betti_bound(kind, obj, R):
    _need(kind, ["betti_bound"], "betti-bound")
    per = []
    for i, (mu, h) in enumerate(obj):
        w = milnor.wang_ker_coker(mu, h)
        per.append(w["H0"])
        R.line(f"branch {i}: mu {mu}, dim ker(1-h) {w['H0']}, dim coker(1-h) {w['H1']}")
    b = milnor.betti_bound(obj)
    R.line(f"bound {b}")
    R.put("per_branch", per)
    R.put("bound", b)


# dispatch -------------------------------------------------------------------------------------

def run(args) -> Report:
    field = parse_field(args.field)
    R = Report()
    with use_field(field):
        kind, obj = load(args, field)
        cmd = args.command
        if cmd in SPACE_COMMANDS:
            if cmd == "validate" and kind != "space":
                if kind in ("quiver", "quiver_morphism"):
                    quiver_command("validate", kind, obj, R)
                else:
                    R.line(f"{kind}: valid")
                    R.put("valid", True)
                return R
            _need(kind, ["space"], cmd)
            SPACE_COMMANDS[cmd](obj, R, field)
        elif cmd == "quiver":
            _need(kind, ["quiver", "quiver_morphism"], "quiver")
            quiver_command(args.sub, kind, obj, R)
        elif cmd == "sebthom":
            cmd_sebthom(kind, obj, R)
        elif cmd == "betti-bound":
            cmd_betti_bound(kind, obj, R)
        elif cmd == "report":
            report(kind, obj, R, field)
    return R


def report(kind, obj, R, field):
    if kind == "space":
        steps = ["validate", "cohomology", "dual"]
        if obj.strat is not None:
            steps += ["perverse-check", "ih"]
        for s in steps:
            R.line(f"== {s}")
            sub = Report()
            SPACE_COMMANDS[s](obj, sub, field)
            R.lines += sub.lines
            R.put(s, sub.data)
    elif kind in ("quiver", "quiver_morphism"):
        subs = ["validate", "psi", "phi", "can-var", "stalk", "costalk"]
        if kind == "quiver_morphism":
            subs += ["kernel", "cokernel", "theorem-check"]
        for s in subs:
            R.line(f"== quiver {s}")
            sub = Report()
            quiver_command(s, kind, obj, sub)
            R.lines += sub.lines
            R.put(s, sub.data)
    elif kind in ("monodromy", "sebthom"):
        cmd_sebthom(kind, obj, R)
    else:
        cmd_betti_bound(kind, obj, R)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="input JSON document")
    common.add_argument("--fixture", help="use a bundled fixture instead of a file")
    common.add_argument("--field", default="q", help="q (default) or fp:<p>")
    common.add_argument("--format", choices=["text", "json"], default="text")
    p = argparse.ArgumentParser(prog="constructible",
                                description="Constructible complexes on finite cell complexes.")
    p.add_argument("--list-fixtures", action="store_true", help="print bundled fixture names")
    sub = p.add_subparsers(dest="command")
    for name, hlp in [("validate", "parse and check a document"),
                      ("cohomology", "hypercohomology, stalk and costalk tables"),
                      ("dual", "Verdier dual tables and duality checks"),
                      ("perverse-check", "perversity verdict with witnesses"),
                      ("ih", "intersection cohomology and IC axioms"),
                      ("sebthom", "join monodromy data"),
                      ("betti-bound", "Milnor fibre Betti bound from branch monodromies"),
                      ("report", "everything applicable to the document")]:
        sub.add_parser(name, parents=[common], help=hlp)
    q = sub.add_parser("quiver", help="quiver model of perverse sheaves on curve germs")
    q.add_argument("sub", choices=QUIVER_SUBS)
    for a in common._actions:
        if a.dest != "help":
            q._add_action(a)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_fixtures:
        print("\n".join(fixture_names()))
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_PARSE
    try:
        R = run(args)
    except (io.SchemaError, FieldError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (SiteError, ComplexError, QuiverError, MonodromyError) as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    sys.stdout.write(R.render(args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
