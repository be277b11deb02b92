"""Time the ideal-count oracle with and without numba.

    python bench/bench_kernels.py --d 17 --X 12000 --repeat 3
"""
import argparse
import time

import numpy as np

from sicstark import _kernels
from sicstark.lfun import class_counts
from sicstark.quadfield import make_field
from sicstark.rayclass import build_ray_class_group


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=11)
    ap.add_argument("--X", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    ctx = make_field(a.d)
    G = build_ray_class_group(ctx)
    args = (ctx.D, ctx.D % 4 == 1, float(ctx.fundamental_unit.embed(1)), a.X, a.d, pow(ctx.f, -1, a.d),
            G.class_table(), G.N)
    rows = []
    t0 = time.perf_counter()
    ref = class_counts(ctx, G, a.X).counts
    rows.append(("prime-ideal walk", time.perf_counter() - t0))
    paths = [("numpy", False)] + ([("numba", True)] if _kernels.HAVE_NUMBA else [])
    for name, flag in paths:
        if flag:
            _kernels.count_by_elements(*args[:3], 50, *args[4:], use_numba=True)  # compile
        best = float("inf")
        for _ in range(a.repeat):
            t0 = time.perf_counter()
            out = _kernels.count_by_elements(*args, use_numba=flag)
            best = min(best, time.perf_counter() - t0)
        assert np.array_equal(out, ref), name
        rows.append(("elements/" + name, best))
    print("d=%d X=%d" % (a.d, a.X))
    for name, t in rows:
        print("  %-18s %8.3f s" % (name, t))


if __name__ == "__main__":
    main()
