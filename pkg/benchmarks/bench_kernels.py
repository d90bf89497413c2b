"""Time the compiled and pure-Python kernels side by side.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from projquasi.kernels import BACKENDS
from projquasi.numcore import random_spd


def cases(n, rng):
    H = random_spd(n, rng)
    s, y, v = rng.standard_normal((3, n))
    y = y + 4 * s
    m = 10
    S = rng.standard_normal((m, n))
    Y = S @ random_spd(n, rng)
    g = rng.standard_normal(n)
    p, q = random_spd(n, rng), random_spd(n, rng)
    return {
        "oblique_rank_update": lambda k: k.oblique_rank_update(H, s, y, v),
        "two_loop": lambda k: k.two_loop(S, Y, S, g, 1.0),
        "gauss_kl": lambda k: k.gauss_kl(p, q),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if "cython" not in BACKENDS:
        print("compiled backend not built; timing python only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>5}" + "".join(f"{b + ' (us)':>16}" for b in BACKENDS) + f"{'speedup':>10}")
    for n in (5, 20, 100):
        for name, call in cases(n, rng).items():
            times = {}
            for b, mod in BACKENDS.items():
                times[b] = min(timeit.repeat(lambda: call(mod), number=args.repeat, repeat=3)) / args.repeat * 1e6
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<22}{n:>5}" + "".join(f"{t:>16.2f}" for t in times.values()) + f"{speed:>10.2f}")


if __name__ == "__main__":
    main()
