"""Strict, versioned JSON documents for sites, sheaves, quivers and monodromy data.

Every document carries ``schema_version`` and ``kind``.  Matrices are
row-major lists of strings holding exact rationals such as ``"3/2"``; their
shapes are implied by the surrounding dimensions.  Unknown keys are errors.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .complexes import ChainMap, CochainComplex
from .field import Field, FieldError, active_field
from .linalg import Matrix
from .milnor import MonodromyDatum
from .quiver import QuiverMorphism, QuiverPervObject
from .sheaves import CellSite, CellularSheafComplex, Stratification

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """A document does not follow the schema; ``path`` locates the problem."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# low-level readers -----------------------------------------------------------------

def _obj(x, path, required, optional=()):
    if not isinstance(x, dict):
        raise SchemaError(path, "expected an object")
    extra = set(x) - set(required) - set(optional)
    if extra:
        raise SchemaError(path, f"unknown field(s) {sorted(extra)}")
    missing = [k for k in required if k not in x]
    if missing:
        raise SchemaError(path, f"missing field(s) {missing}")
    return x


def _int(x, path, lo=None):
    if not isinstance(x, int) or isinstance(x, bool):
        raise SchemaError(path, "expected an integer")
    if lo is not None and x < lo:
        raise SchemaError(path, f"expected an integer >= {lo}")
    return x


def _bool(x, path):
    if not isinstance(x, bool):
        raise SchemaError(path, "expected true or false")
    return x


def _str(x, path):
    if not isinstance(x, str):
        raise SchemaError(path, "expected a string")
    return x


def _list(x, path):
    if not isinstance(x, list):
        raise SchemaError(path, "expected an array")
    return x


def _degree_key(k, path):
    try:
        return int(k)
    except ValueError:
        raise SchemaError(path, f"degree key {k!r} is not an integer") from None


def read_matrix(x, nrows, ncols, field: Field, path) -> Matrix:
    rows = _list(x, path)
    if len(rows) != nrows:
        raise SchemaError(path, f"expected {nrows} rows, found {len(rows)}")
    data = []
    for i, r in enumerate(rows):
        r = _list(r, f"{path}[{i}]")
        if len(r) != ncols:
            raise SchemaError(f"{path}[{i}]", f"expected {ncols} entries, found {len(r)}")
        out = []
        for j, v in enumerate(r):
            if not isinstance(v, str):
                raise SchemaError(f"{path}[{i}][{j}]", "entries are strings like \"3/2\"")
            try:
                out.append(field(v))
            except (ValueError, ZeroDivisionError, FieldError) as e:
                raise SchemaError(f"{path}[{i}][{j}]", f"bad scalar {v!r}: {e}") from None
        data.append(out)
    return Matrix.from_lists(data, ncols=ncols, field=field)


def write_matrix(M: Matrix):
    f = M.field
    return [[f.fmt(v) for v in r] for r in M.to_lists()]


def _header(doc, path, kind):
    v = doc.get("schema_version")
    if v != SCHEMA_VERSION:
        raise SchemaError(f"{path}.schema_version", f"expected {SCHEMA_VERSION}, found {v!r}")
    if doc.get("kind") != kind:
        raise SchemaError(f"{path}.kind", f"expected {kind!r}, found {doc.get('kind')!r}")


# spaces -----------------------------------------------------------------------------

@dataclass
class SpaceDoc:
    site: CellSite
    strat: Stratification | None = None
    sheaf: CellularSheafComplex | None = None
    sheaf_spec: dict | None = None
    coefficients: dict | None = None  # IC coefficients: {"rank", "twists"}
    description: str = ""


def parse_space(doc, field: Field | None = None) -> SpaceDoc:
    f = field if field is not None else active_field()
    _obj(doc, "$", ["schema_version", "kind", "name", "cells"],
         ["description", "compact", "complex_model", "strata", "sheaf", "coefficients"])
    _header(doc, "$", "space")
    name = _str(doc["name"], "$.name")
    names, dims, faces = [], [], {}
    for i, c in enumerate(_list(doc["cells"], "$.cells")):
        p = f"$.cells[{i}]"
        _obj(c, p, ["name", "dim"], ["faces"])
        names.append(_str(c["name"], f"{p}.name"))
        dims.append(_int(c["dim"], f"{p}.dim", 0))
        fs = _obj(c.get("faces", {}), f"{p}.faces", [], list(c.get("faces", {})))
        faces[c["name"]] = {k: _int(v, f"{p}.faces.{k}") for k, v in fs.items()}
    site = CellSite(names, dims, faces,
                    compact=_bool(doc.get("compact", True), "$.compact"),
                    complex_model=_bool(doc.get("complex_model", False), "$.complex_model"),
                    name=name)
    out = SpaceDoc(site, description=_str(doc.get("description", ""), "$.description"))
    if "strata" in doc:
        strata = {}
        for i, s in enumerate(_list(doc["strata"], "$.strata")):
            p = f"$.strata[{i}]"
            _obj(s, p, ["name", "cells", "cdim"])
            cells = [_str(c, f"{p}.cells") for c in _list(s["cells"], f"{p}.cells")]
            strata[_str(s["name"], f"{p}.name")] = (cells, _int(s["cdim"], f"{p}.cdim", 0))
        out.strat = Stratification.build(site, strata)
    if "sheaf" in doc:
        out.sheaf_spec = doc["sheaf"]
        out.sheaf = parse_sheaf(doc["sheaf"], site, f, "$.sheaf")
    if "coefficients" in doc:
        c = _obj(doc["coefficients"], "$.coefficients", [], ["rank", "twists"])
        out.coefficients = {"rank": _int(c.get("rank", 1), "$.coefficients.rank", 1),
                            "twists": _list(c.get("twists", []), "$.coefficients.twists")}
    return out


def parse_sheaf(x, site: CellSite, f: Field, path="$.sheaf") -> CellularSheafComplex:
    _obj(x, path, [], ["constant", "stalks", "restrictions"])
    if "constant" in x:
        if "stalks" in x or "restrictions" in x:
            raise SchemaError(path, "give either 'constant' or explicit stalks")
        c = _obj(x["constant"], f"{path}.constant", ["degree"], ["rank", "cells"])
        cells = c.get("cells")
        if cells is not None:
            cells = [_str(n, f"{path}.constant.cells") for n in _list(cells, f"{path}.constant.cells")]
        return CellularSheafComplex.constant(site, _int(c["degree"], f"{path}.constant.degree"),
                                             _int(c.get("rank", 1), f"{path}.constant.rank", 0),
                                             cells, f)
    stalks = [CochainComplex.zero(f) for _ in site.cells]
    given = _obj(x.get("stalks", {}), f"{path}.stalks", [], list(x.get("stalks", {})))
    for cname, sd in given.items():
        p = f"{path}.stalks.{cname}"
        if cname not in site.index:
            raise SchemaError(p, "unknown cell")
        _obj(sd, p, ["dims"], ["d"])
        dd = {_degree_key(k, p): _int(v, f"{p}.dims.{k}", 0) for k, v in sd["dims"].items()}
        diffs = {}
        for k, M in _obj(sd.get("d", {}), f"{p}.d", [], list(sd.get("d", {}))).items():
            q = _degree_key(k, p)
            diffs[q] = read_matrix(M, dd.get(q + 1, 0), dd.get(q, 0), f, f"{p}.d.{k}")
        stalks[site.index[cname]] = CochainComplex(dd, diffs, f)
    restr = {}
    for i, r in enumerate(_list(x.get("restrictions", []), f"{path}.restrictions")):
        p = f"{path}.restrictions[{i}]"
        _obj(r, p, ["face", "cell", "maps"])
        s, t = _str(r["face"], f"{p}.face"), _str(r["cell"], f"{p}.cell")
        if s not in site.index or t not in site.index:
            raise SchemaError(p, "unknown cell")
        A, B = stalks[site.index[s]], stalks[site.index[t]]
        comps = {}
        for k, M in _obj(r["maps"], f"{p}.maps", [], list(r["maps"])).items():
            q = _degree_key(k, p)
            comps[q] = read_matrix(M, B.dim(q), A.dim(q), f, f"{p}.maps.{k}")
        restr[(s, t)] = ChainMap(A, B, comps)
    return CellularSheafComplex(site, stalks, restr, f)


def site_to_json(site: CellSite) -> dict:
    cells = []
    for i in site.cells:
        c = {"name": site.names[i], "dim": site.dims[i]}
        if site.faces[i]:
            c["faces"] = {site.names[j]: s for j, s in sorted(site.faces[i].items())}
        cells.append(c)
    return {"cells": cells, "compact": site.compact, "complex_model": site.complex_model}


def sheaf_to_json(F: CellularSheafComplex) -> dict:
    site = F.site
    stalks = {}
    for c in site.cells:
        C = F.stalks[c]
        if not C.dims:
            continue
        e = {"dims": {str(k): n for k, n in sorted(C.dims.items())}}
        ds = {str(k): write_matrix(C.diff(k)) for k in sorted(C.dims)
              if C.dim(k + 1) and not C.diff(k).is_zero()}
        if ds:
            e["d"] = ds
        stalks[site.names[c]] = e
    restr = []
    for (s, t) in sorted(F.restr, key=lambda st: (site._key(st[0]), site._key(st[1]))):
        m = F.restr[(s, t)]
        maps = {str(k): write_matrix(m.comp(k)) for k in sorted(F.stalks[s].dims)
                if F.stalks[t].dim(k) and not m.comp(k).is_zero()}
        if maps:
            restr.append({"face": site.names[s], "cell": site.names[t], "maps": maps})
    return {"stalks": stalks, "restrictions": restr}


def space_to_json(sd: SpaceDoc, explicit_sheaf: bool = False) -> dict:
    site = sd.site
    doc = {"schema_version": SCHEMA_VERSION, "kind": "space", "name": site.name}
    if sd.description:
        doc["description"] = sd.description
    doc.update(site_to_json(site))
    if sd.strat is not None:
        doc["strata"] = [{"name": n, "cells": [site.names[c] for c in
                                               site.sorted_cells(sd.strat.strata[n][0])],
                          "cdim": sd.strat.strata[n][1]} for n in sorted(sd.strat.strata)]
    if sd.sheaf is not None:
        if sd.sheaf_spec is not None and "constant" in sd.sheaf_spec and not explicit_sheaf:
            doc["sheaf"] = sd.sheaf_spec
        else:
            doc["sheaf"] = sheaf_to_json(sd.sheaf)
    if sd.coefficients is not None:
        doc["coefficients"] = sd.coefficients
    return doc


# quivers ------------------------------------------------------------------------------

def parse_quiver(x, f: Field, path="$") -> QuiverPervObject:
    _obj(x, path, ["V", "h", "W", "alpha", "beta"],
         ["schema_version", "kind", "irreducible"])
    if "kind" in x or "schema_version" in x:
        _header(x, path, "quiver")
    V = [_int(v, f"{path}.V", 0) for v in _list(x["V"], f"{path}.V")]
    hs = _list(x["h"], f"{path}.h")
    if len(hs) != len(V):
        raise SchemaError(f"{path}.h", "one monodromy per branch is required")
    h = [read_matrix(m, v, v, f, f"{path}.h[{i}]") for i, (m, v) in enumerate(zip(hs, V))]
    W = _int(x["W"], f"{path}.W", 0)
    n = sum(V)
    irr = x.get("irreducible")
    return QuiverPervObject(V, h, W, read_matrix(x["alpha"], W, n, f, f"{path}.alpha"),
                            read_matrix(x["beta"], n, W, f, f"{path}.beta"),
                            None if irr is None else _bool(irr, f"{path}.irreducible"))


def quiver_to_json(P: QuiverPervObject, header=True) -> dict:
    d = {"V": list(P.V), "h": [write_matrix(m) for m in P.h], "W": P.W,
         "alpha": write_matrix(P.alpha), "beta": write_matrix(P.beta)}
    if P.irreducible is not None:
        d["irreducible"] = P.irreducible
    if header:
        d = {"schema_version": SCHEMA_VERSION, "kind": "quiver", **d}
    return d


def parse_quiver_morphism(x, f: Field, path="$") -> QuiverMorphism:
    _obj(x, path, ["schema_version", "kind", "source", "tau", "eta"], ["target"])
    _header(x, path, "quiver_morphism")
    P = parse_quiver(x["source"], f, f"{path}.source")
    Q = P if "target" not in x else parse_quiver(x["target"], f, f"{path}.target")
    taus = _list(x["tau"], f"{path}.tau")
    if len(taus) != P.d:
        raise SchemaError(f"{path}.tau", "one map per branch is required")
    tau = [read_matrix(m, b, a, f, f"{path}.tau[{i}]")
           for i, (m, a, b) in enumerate(zip(taus, P.V, Q.V))]
    eta = read_matrix(x["eta"], Q.W, P.W, f, f"{path}.eta")
    return QuiverMorphism(P, Q, tau, eta)


def quiver_morphism_to_json(m: QuiverMorphism) -> dict:
    d = {"schema_version": SCHEMA_VERSION, "kind": "quiver_morphism",
         "source": quiver_to_json(m.source, header=False),
         "tau": [write_matrix(t) for t in m.tau], "eta": write_matrix(m.eta)}
    if m.target is not m.source:
        d["target"] = quiver_to_json(m.target, header=False)
    return d


# monodromy data --------------------------------------------------------------------------

def parse_monodromy(x, f: Field, path="$") -> MonodromyDatum:
    _obj(x, path, ["dims", "T"], ["schema_version", "kind"])
    if "kind" in x or "schema_version" in x:
        _header(x, path, "monodromy")
    dims = {_degree_key(k, path): _int(v, f"{path}.dims.{k}", 0)
            for k, v in _obj(x["dims"], f"{path}.dims", [], list(x["dims"])).items()}
    Ts = _obj(x["T"], f"{path}.T", [], list(x["T"]))
    T = {}
    for k, M in Ts.items():
        q = _degree_key(k, path)
        if q not in dims:
            raise SchemaError(f"{path}.T.{k}", "monodromy in a degree without a dimension")
        T[q] = read_matrix(M, dims[q], dims[q], f, f"{path}.T.{k}")
    return MonodromyDatum(dims, T)


def monodromy_to_json(P: MonodromyDatum, header=True) -> dict:
    d = {"dims": {str(k): n for k, n in sorted(P.dims.items())},
         "T": {str(k): write_matrix(P.T[k]) for k in P.degrees()}}
    if header:
        d = {"schema_version": SCHEMA_VERSION, "kind": "monodromy", **d}
    return d


def parse_sebthom(x, f: Field):
    _obj(x, "$", ["schema_version", "kind", "factors"])
    _header(x, "$", "sebthom")
    return [parse_monodromy(m, f, f"$.factors[{i}]")
            for i, m in enumerate(_list(x["factors"], "$.factors"))]


def sebthom_to_json(factors) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "sebthom",
            "factors": [monodromy_to_json(P, header=False) for P in factors]}


def parse_branches(x, f: Field):
    _obj(x, "$", ["schema_version", "kind", "branches"])
    _header(x, "$", "betti_bound")
    out = []
    for i, b in enumerate(_list(x["branches"], "$.branches")):
        p = f"$.branches[{i}]"
        _obj(b, p, ["mu", "h"])
        mu = _int(b["mu"], f"{p}.mu", 0)
        out.append((mu, read_matrix(b["h"], mu, mu, f, f"{p}.h")))
    return out


def branches_to_json(branches) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "betti_bound",
            "branches": [{"mu": mu, "h": write_matrix(h)} for mu, h in branches]}


# dispatch ------------------------------------------------------------------------------------

PARSERS = {
    "space": parse_space,
    "quiver": lambda x, f: parse_quiver(x, f),
    "quiver_morphism": lambda x, f: parse_quiver_morphism(x, f),
    "monodromy": lambda x, f: parse_monodromy(x, f),
    "sebthom": parse_sebthom,
    "betti_bound": parse_branches,
}


def load_text(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno} column {e.colno}", e.msg) from None


def parse_document(doc, field: Field | None = None):
    """``(kind, parsed object)`` for any supported document."""
    f = field if field is not None else active_field()
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    kind = doc.get("kind")
    if kind not in PARSERS:
        raise SchemaError("$.kind", f"unknown document kind {kind!r}")
    return kind, PARSERS[kind](doc, f)


def to_document(kind, obj) -> dict:
    return {"space": space_to_json, "quiver": quiver_to_json,
            "quiver_morphism": quiver_morphism_to_json, "monodromy": monodromy_to_json,
            "sebthom": sebthom_to_json, "betti_bound": branches_to_json}[kind](obj)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


__all__ = ["SchemaError", "SpaceDoc", "parse_document", "to_document", "load_text", "dumps",
           "read_matrix", "write_matrix"]
