"""Regenerate the bundled fixtures and their expected CLI outputs.

    python3 tools/make_fixtures.py            # inputs and expected outputs
    python3 tools/make_fixtures.py --inputs   # inputs only
"""
from __future__ import annotations

import argparse
import contextlib
import io as _io
import json
from pathlib import Path

from constructible import cli, io, models, quiver
from constructible.field import QQ
from constructible.linalg import Matrix
from constructible.milnor import cyclic_point_datum
from constructible.sheaves import CellularSheafComplex

ROOT = Path(__file__).resolve().parents[1] / "src" / "constructible" / "fixtures"

SPACE_CMDS = ["validate", "cohomology", "dual"]
STRAT_CMDS = SPACE_CMDS + ["perverse-check", "ih"]


def space(site, strat=None, sheaf=None, description="", explicit=None):
    sd = io.SpaceDoc(site, strat, explicit, sheaf, None, description)
    if explicit is not None:
        return io.space_to_json(sd, explicit_sheaf=True)
    doc = io.space_to_json(sd)
    if sheaf is not None:
        doc["sheaf"] = sheaf
    return doc


def const(deg):
    return {"constant": {"degree": deg}}


def inputs():
    out = {}
    out["circle"] = (space(models.circle(), sheaf=const(0),
                           description="circle with two vertices"), SPACE_CMDS)
    out["torus"] = (space(models.torus(), sheaf=const(0)), SPACE_CMDS)
    out["sphere"] = (space(*models.sphere_curve(), sheaf=const(-1),
                           description="2-sphere as a smooth complex curve"), STRAT_CMDS)
    out["disk"] = (space(*models.disk_curve(), sheaf=const(-1)), STRAT_CMDS)
    out["two_lines"] = (space(*models.two_lines(), sheaf=const(-1),
                              description="two complex lines through a point"), STRAT_CMDS)
    out["nodal_cubic"] = (space(*models.nodal_cubic_germ(), sheaf=const(-1),
                                description="sphere with two points glued"), STRAT_CMDS)
    out["cone_torus"] = (space(*models.cone_torus(), sheaf=const(-2),
                               description="open cone over a 3-torus"), STRAT_CMDS)
    out["cone_two_spheres"] = (space(*models.cone_two_spheres(), sheaf=const(-2),
                                     description="open cone over two 3-spheres"), STRAT_CMDS)
    warn = models.warning_morphism(QQ).source
    out["warning_complex"] = (space(warn.site, None, None,
                                    "two-term complex k_X -> k_L1 + k_L2", explicit=warn),
                              ["validate", "cohomology"])
    circ = models.circle()
    tw = CellularSheafComplex.local_system(circ, 1, {("v0", "e1"): Matrix.from_lists([[-1]])})
    out["twisted_circle"] = (space(circ, None, None, "Moebius local system", explicit=tw),
                             SPACE_CMDS)
    C = quiver.constant(2)
    out["quiver_constant"] = (io.quiver_to_json(C), ["report"])
    out["quiver_pushforward"] = (io.quiver_to_json(quiver.full_pushforward([[["2"]], [["1"]]])),
                                 ["report"])
    out["quiver_endomorphism"] = (io.quiver_morphism_to_json(quiver.QuiverMorphism.zero(C, C)),
                                  ["report"])
    _, _, q = quiver.warning_sequence()
    out["quiver_warning"] = (io.quiver_morphism_to_json(q), ["quiver kernel", "quiver cokernel"])
    out["sebthom_cyclic"] = (io.sebthom_to_json([cyclic_point_datum(3), cyclic_point_datum(2)]),
                             ["sebthom"])
    swap = Matrix.from_lists([[0, 1], [1, 0]])
    out["betti_bound"] = (io.branches_to_json([(2, swap), (2, swap)]), ["betti-bound"])
    return out


MALFORMED = {
    "bad_json": ("{\"schema_version\": 1, \"kind\": \"space\",\n  \"cells\": [\n", "validate", 2),
    "unknown_field": ({"schema_version": 1, "kind": "space", "name": "x", "colour": "red",
                       "cells": [{"name": "p", "dim": 0}]}, "validate", 2),
    "bad_scalar": ({"schema_version": 1, "kind": "quiver", "V": [1], "h": [[["two"]]], "W": 0,
                    "alpha": [], "beta": [[]]}, "quiver validate", 2),
    "broken_incidence": ({"schema_version": 1, "kind": "space", "name": "bad_disk", "cells": [
        {"name": "a", "dim": 0}, {"name": "b", "dim": 0},
        {"name": "e1", "dim": 1, "faces": {"a": -1, "b": 1}},
        {"name": "e2", "dim": 1, "faces": {"a": -1, "b": 1}},
        {"name": "f", "dim": 2, "faces": {"e1": 1, "e2": 1}}]}, "validate", 3),
    "quiver_bad_relation": ({"schema_version": 1, "kind": "quiver", "V": [1], "h": [[["1"]]],
                             "W": 1, "alpha": [["1"]], "beta": [["1"]]}, "quiver validate", 3),
    "not_dense": ({"schema_version": 1, "kind": "space", "name": "segment_and_point", "cells": [
        {"name": "p", "dim": 0}, {"name": "a", "dim": 0}, {"name": "b", "dim": 0},
        {"name": "e", "dim": 1, "faces": {"a": -1, "b": 1}}],
        "strata": [{"name": "line", "cells": ["a", "b", "e"], "cdim": 1},
                   {"name": "pt", "cells": ["p"], "cdim": 0}]}, "ih", 4),
    "no_strata": ({"schema_version": 1, "kind": "space", "name": "circle", "cells": [
        {"name": "v", "dim": 0}, {"name": "w", "dim": 0},
        {"name": "e0", "dim": 1, "faces": {"v": -1, "w": 1}},
        {"name": "e1", "dim": 1, "faces": {"v": 1, "w": -1}}]}, "perverse-check", 4),
}


def run_cli(argv):
    buf = _io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    return code, buf.getvalue()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--inputs", action="store_true")
    a = ap.parse_args()
    manifest = {}
    for name, (doc, cmds) in inputs().items():
        (ROOT / f"{name}.json").write_text(io.dumps(doc))
        manifest[name] = cmds
    (ROOT / "expected" / "MANIFEST.json").write_text(io.dumps(manifest))
    mal = {}
    for name, (doc, cmd, code) in MALFORMED.items():
        text = doc if isinstance(doc, str) else io.dumps(doc)
        (ROOT / "malformed" / f"{name}.json").write_text(text)
        mal[name] = {"command": cmd, "exit": code}
    (ROOT / "malformed" / "EXPECTED.json").write_text(io.dumps(mal))
    if a.inputs:
        return
    for name, cmds in manifest.items():
        for c in cmds:
            for fmt in ("text", "json"):
                code, out = run_cli(c.split() + ["--fixture", name, "--format", fmt])
                if code:
                    raise SystemExit(f"{name} {c}: exit {code}")
                ext = "txt" if fmt == "text" else "json"
                (ROOT / "expected" / f"{name}.{c.replace(' ', '_')}.{ext}").write_text(out)


if __name__ == "__main__":
    main()
