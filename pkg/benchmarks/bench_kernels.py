"""Time the pure-Python kernels against the compiled ones.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]
"""
from __future__ import annotations

import argparse
import random
import sys
import timeit

from knnxai import kernels


def workloads(rng: random.Random):
    n = 16
    pos = [rng.getrandbits(n) for _ in range(40)]
    neg = [rng.getrandbits(n) for _ in range(40)]
    qs = [rng.getrandbits(n) for _ in range(200)]
    x = qs[0]
    target = 1 - kernels.python_backend.hamming_label(x, pos, neg, 3)

    dim = 6
    G = [[rng.uniform(-1, 1) for _ in range(dim)] for _ in range(30)]
    h = [rng.uniform(-1, 0) for _ in G]
    xq = [rng.uniform(-3, 3) for _ in range(dim)]

    gdim = 4
    pts = [[rng.randint(0, 20) for _ in range(gdim)] for _ in range(12)]
    labels = [i % 2 for i in range(len(pts))]
    gx = [rng.randint(0, 20) for _ in range(gdim)]
    values = [sorted({gx[i]} | {p[i] for p in pts}, key=lambda v, i=i: (abs(v - gx[i]), v)) for i in range(gdim)]
    dists = [sum(abs(a - b) for a, b in zip(p, gx)) for p in pts]
    gtarget = 1 - kernels.python_backend._label([d for d, c in zip(dists, labels) if c],
                                                [d for d, c in zip(dists, labels) if not c], 1)

    return {
        "hamming_label x200": lambda be: [be.hamming_label(q, pos, neg, 3) for q in qs],
        "first_flip size<=3": lambda be: [be.first_flip(x, pos, neg, n, 3, s, target, 10**7) for s in range(4)],
        "hildreth 30x6": lambda be: be.hildreth(G, h, xq, 1e-10, 20000),
        "l1_grid_search 4-D": lambda be: be.l1_grid_search(values, gx, pts, labels, 1, gtarget, 80, 10**7),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = kernels.available()
    if "cython" not in backends:
        print("compiled backend unavailable (not built, or KNNXAI_PURE_PYTHON is set); timing Python only",
              file=sys.stderr)
    work = workloads(random.Random(args.seed))
    names = list(backends)
    print(f"{'kernel':24s}" + "".join(f"{b:>12s}" for b in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in work.items():
        times = []
        for b in names:
            be = backends[b]
            times.append(min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat)))
        row = f"{label:24s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
