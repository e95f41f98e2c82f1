"""Time the compiled elimination kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--sizes 8,16,32,64] [--repeat 5]

Both backends are imported directly, so the environment switch is not needed.
Results are checked for equality before timings are reported.
"""

import argparse
import random
import statistics
import time

from ptower import _pykernels

try:
    from ptower import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def random_rows(rng, nrows, ncols, q):
    return [[rng.randrange(q) for _ in range(ncols)] for _ in range(nrows)]


def timed(fn, *args, repeat=5):
    out = []
    result = None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn(*args)
        out.append(time.perf_counter() - t)
    return result, statistics.median(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="8,16,32,64")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled backend not built; run `pip install -e . --no-build-isolation`")
        return 1
    rng = random.Random(args.seed)
    cases = [("howell", 2, 4), ("howell", 3, 3), ("rank", 2, 1), ("rank", 5, 1)]
    print(f"{'kernel':8} {'p^n':>6} {'size':>5} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for size in (int(s) for s in args.sizes.split(",")):
        for kind, p, n in cases:
            q = p ** n
            rows = random_rows(rng, size, size, q)
            if kind == "howell":
                a, tp = timed(_pykernels.howell, rows, p, n, repeat=args.repeat)
                b, tc = timed(_kernels.howell, rows, p, n, repeat=args.repeat)
            else:
                a, tp = timed(_pykernels.rank_mod_p, rows, size, p, repeat=args.repeat)
                b, tc = timed(_kernels.rank_mod_p, rows, size, p, repeat=args.repeat)
            if a != b:
                raise SystemExit(f"backends disagree on {kind} p={p} n={n} size={size}")
            print(f"{kind:8} {f'{p}^{n}':>6} {size:>5} {tp * 1e3:10.3f} {tc * 1e3:12.3f} {tp / tc:8.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
