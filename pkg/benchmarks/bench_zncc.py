#!/usr/bin/env python3
"""Benchmark the compiled correlation kernel against the numpy fallback.

Times the full masked correlation surface (all translations) on sensor-sized
patches, for the unrotated and a rotated (masked) candidate, plus one full
rotation-sweep score. Run after an editable install:

    python3 benchmarks/bench_zncc.py [--size 70] [--repeats 5]
"""

import argparse
import math
import time

import numpy as np

from smallprint import (Image, ZnccConfig, compiled_backend_available,
                        rotate_image, zncc_score)
from smallprint.zncc import correlation_surface


def time_surface(e, c, backend, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        correlation_surface(e, c, 0.25, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=70)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    e = Image(rng.random((args.size, args.size)))
    c = Image(rng.random((args.size, args.size)))
    c_rot = rotate_image(c, math.radians(20.0))

    backends = ["python"]
    if compiled_backend_available():
        backends.insert(0, "compiled")
    else:
        print("compiled kernel not built; timing the python backend only")

    print(f"correlation surface on {args.size}x{args.size} patches "
          f"(best of {args.repeats}):")
    results = {}
    for backend in backends:
        t_plain = time_surface(e, c, backend, args.repeats)
        t_masked = time_surface(e, c_rot, backend, args.repeats)
        results[backend] = (t_plain, t_masked)
        print(f"  {backend:9s}  unmasked {t_plain * 1e3:8.2f} ms   "
              f"rotated-mask {t_masked * 1e3:8.2f} ms")
    if len(results) == 2:
        pu, pm = results["python"]
        cu, cm = results["compiled"]
        print(f"  speedup    unmasked {pu / cu:8.2f} x    "
              f"rotated-mask {pm / cm:8.2f} x")

    for backend in backends:
        t0 = time.perf_counter()
        zncc_score(e, c, ZnccConfig(), backend=backend)
        print(f"full 13-angle score, {backend}: "
              f"{time.perf_counter() - t0:.3f} s")


if __name__ == "__main__":
    main()
