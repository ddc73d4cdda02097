"""Time the compiled and pure-Python elimination kernels on the same inputs.

    python3 benchmarks/bench_kernels.py --sizes 40 80 160 --prime 32003
"""
from __future__ import annotations

import argparse
import json
import random
import time

import numpy as np
from gmpy2 import mpq

from constructible import _kernels_py

try:
    from constructible import _kernels
except ImportError:  # extension not built
    _kernels = None


def sparse_rows(rng, n, p, density):
    rows = []
    for _ in range(n):
        row = {}
        for j in range(n):
            if rng.random() < density:
                v = rng.randrange(1, p) if p else mpq(rng.randint(-9, 9), rng.randint(1, 5))
                if v:
                    row[j] = v
        rows.append(row)
    return rows


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(sizes, p, density, repeat, seed):
    rng = random.Random(seed)
    results = []
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    for n in sizes:
        nq = min(n, 60)  # exact rationals blow up quickly; keep them small
        rows_p, rows_q = sparse_rows(rng, n, p, density), sparse_rows(rng, nq, 0, density)
        dense = np.array([[rng.randrange(p) for _ in range(n)] for _ in range(n)], dtype=np.int64)
        cases = {
            "rref_sparse mod p": (n, lambda m: m.rref_sparse(rows_p, n, p)),
            "rref_sparse Q": (nq, lambda m: m.rref_sparse(rows_q, nq, 0)),
            "rref_dense_modp": (n, lambda m: m.rref_dense_modp(dense.copy(), p)),
        }
        for name, (size, case) in cases.items():
            if name == "rref_sparse Q" and any(r["kernel"] == name and r["n"] == size
                                               for r in results):
                continue
            row = {"kernel": name, "n": size}
            outs = []
            for label, mod in backends:
                t, out = best_of(lambda: case(mod), repeat)
                row[label] = t
                outs.append(out)
            row["agree"] = all(o == outs[0] for o in outs)
            if "cython" in row:
                row["speedup"] = row["python"] / row["cython"] if row["cython"] else float("inf")
            results.append(row)
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[40, 80, 160])
    ap.add_argument("--prime", type=int, default=32003)
    ap.add_argument("--density", type=float, default=0.2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print raw results as JSON")
    args = ap.parse_args(argv)
    res = run(args.sizes, args.prime, args.density, args.repeat, args.seed)
    if args.json:
        print(json.dumps(res, indent=2))
        return 0
    if _kernels is None:
        print("compiled extension not available; timing the pure backend only")
    print(f"{'kernel':<20}{'n':>6}{'python s':>12}{'cython s':>12}{'speedup':>10}  agree")
    for r in res:
        cy = f"{r['cython']:.4f}" if "cython" in r else "-"
        sp = f"{r['speedup']:.1f}x" if "speedup" in r else "-"
        print(f"{r['kernel']:<20}{r['n']:>6}{r['python']:>12.4f}{cy:>12}{sp:>10}  {r['agree']}")
    return 0 if all(r["agree"] for r in res) else 1


if __name__ == "__main__":
    raise SystemExit(main())
