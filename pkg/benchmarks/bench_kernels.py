#!/usr/bin/env python3
"""Compiled vs pure table kernels on catalog-sized multiplication tables.

Runs every kernel with both backends on the same inputs, checks the
results agree element for element, and prints best-of-N wall times.

    python3 benchmarks/bench_kernels.py [--reps 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from profusion._kernels import _pure

try:
    from profusion._kernels import _core
except ImportError:
    _core = None

from profusion.catalog import dihedral8, gl3f2, sl2f3, symmetric
from profusion.group import direct_product, sylow_p


def subjects():
    out = [
        ("D8", dihedral8()),
        ("S4", symmetric(4)),
        ("SL2F3", sl2f3()),
        ("GL3F2", gl3f2()),
    ]
    sb = direct_product([symmetric(4), sl2f3()])[0]
    out.append(("S4xSL2F3", sb))
    return out


def workload(G):
    """One representative call per kernel, on this group's table."""
    table = G.table
    n = G.order
    inv = G.inv
    syl = sylow_p(G, 2)
    mask = np.zeros(n, dtype=bool)
    mask[syl.members] = True
    cand = np.arange(n, dtype=np.int32)
    gens = syl.members[: max(2, len(syl.members) // 4)].astype(np.int32)
    seed = gens[:2]
    g = int(cand[n // 3])
    return [
        ("closure", lambda k: k.closure(table, 0, seed)),
        ("filter_conjugation", lambda k: k.filter_conjugation(table, inv, cand, gens, mask)),
        ("filter_centralizing", lambda k: k.filter_centralizing(table, cand, gens)),
        ("conjugate_members", lambda k: k.conjugate_members(table, inv, g, syl.members)),
        ("element_orders", lambda k: k.element_orders(table, 0)),
    ]


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    if _core is None:
        print("compiled backend unavailable; timing the pure backend alone")
    backends = [("pure", _pure)] + ([("compiled", _core)] if _core else [])

    print(f"{'group':>10} {'kernel':>20} " + " ".join(f"{b:>12}" for b, _ in backends)
          + ("  speedup" if _core else ""))
    for name, G in subjects():
        for kname, call in workload(G):
            times = {}
            results = {}
            for bname, mod in backends:
                times[bname], results[bname] = best_of(lambda m=mod: call(m), args.reps)
            if _core is not None and not np.array_equal(results["pure"], results["compiled"]):
                raise SystemExit(f"backend mismatch in {kname} on {name}")
            row = f"{name:>10} {kname:>20} " + " ".join(
                f"{times[b] * 1e6:>10.1f}us" for b, _ in backends
            )
            if _core is not None:
                row += f"  {times['pure'] / max(times['compiled'], 1e-9):>6.1f}x"
            print(row)
    print("all backend results agree" if _core else "pure backend only")


if __name__ == "__main__":
    main()
