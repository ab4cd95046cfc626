"""Compare the numba kernels with the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeat 5]
Each kernel is warmed up once so JIT compilation is not timed.
"""

import argparse
import time

import numpy as np

from metallic_geom import kernels
from metallic_geom._compile import program
from metallic_geom.fixtures import get


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    f6 = get("F6")
    prog = program(tuple(e for row in f6.J.re for e in row))
    pts = f6.samples(20_000)
    yield "run_program (F6 J, 20k points)", lambda jit: kernels.run_program(prog, pts, use_jit=jit)

    rm = np.random.default_rng(0).normal(size=(4, 4, 4, 4))
    g = np.eye(4)
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=(2, 100_000, 4))
    yield "sectional_batch (100k planes)", lambda jit: kernels.sectional_batch(rm, g, u, v, use_jit=jit)

    grid = np.sin(np.linspace(0, 2 * np.pi, 512 * 512, endpoint=False)) ** 2
    yield "trapezoid_mean (512^2 grid)", lambda jit: kernels.trapezoid_mean(grid, use_jit=jit)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba unavailable: only the numpy path runs")
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases():
        ref = np.asarray(fn(False))
        t_np = best_of(lambda: fn(False), args.repeat)
        if kernels.HAVE_NUMBA:
            diff = float(np.abs(np.asarray(fn(True)) - ref).max())
            t_jit = best_of(lambda: fn(True), args.repeat)
            print(f"{name:34s} {t_np * 1e3:11.2f} {t_jit * 1e3:11.2f} {t_np / t_jit:8.1f} {diff:11.2e}")
        else:
            print(f"{name:34s} {t_np * 1e3:11.2f} {'-':>11s}")


if __name__ == "__main__":
    main()
