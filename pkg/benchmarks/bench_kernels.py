"""Time the compiled and pure-Python agglomeration kernels side by side.

    python3 benchmarks/bench_kernels.py --sizes 200 500 1000 --repeats 3
"""
import argparse
import time

import numpy as np

from ultrametric import kernels
from ultrametric.agglomerate import cluster, constrained_cluster


def best_time(fn, repeats):
    out = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--criteria", nargs="+", default=["single", "average", "ward", "median", "constrained"])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the Python fallback is available")
    print(f"{'n':>6} {'criterion':>12} " + " ".join(f"{b + ' s':>12}" for b in backends)
          + (f" {'speedup':>8}" if len(backends) == 2 else ""))
    for n in args.sizes:
        x = np.random.default_rng(args.seed).random((n, 5))
        for crit in args.criteria:
            times = []
            for be in backends:
                if crit == "constrained":
                    fn = lambda: constrained_cluster(x, backend=be)  # noqa: E731
                else:
                    fn = lambda: cluster(x, crit, backend=be)  # noqa: E731
                times.append(best_time(fn, args.repeats))
            line = f"{n:>6} {crit:>12} " + " ".join(f"{t:>12.4f}" for t in times)
            if len(times) == 2:
                line += f" {times[1] / times[0]:>7.1f}x"
            print(line)


if __name__ == "__main__":
    main()
