"""Benchmark the compiled kernels against the pure-Python reference.

Usage: python benchmarks/compare_backends.py [--repeats N]

Prints per-kernel timings for both backends and the speedup, and checks
that outputs are bit-identical on the benchmark inputs.
"""

import argparse
import time

import numpy as np

from skybridge import kernels


def _time(fn, args_list, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best / len(args_list)


def make_inputs(seed=0):
    rng = np.random.default_rng(seed)
    waterfill_args = []
    maxmin_args = []
    greedy_args = []
    for _ in range(200):
        n = int(rng.integers(2, 64))
        waterfill_args.append((10.0 ** rng.uniform(-4, 4, n),
                               float(10.0 ** rng.uniform(-2, 2))))
        maxmin_args.append((float(rng.uniform(0, 50 * n)),
                            rng.uniform(0, 10, n)))
    for _ in range(50):
        n_u = int(rng.integers(20, 200))
        n_s = int(rng.integers(4, 64))
        greedy_args.append((
            10.0 ** rng.uniform(-2, 3, (n_u, n_s)),
            (rng.random((n_u, n_s)) < 0.8).astype(np.uint8),
            10.0 ** rng.uniform(6, 7.5, n_s),
            np.where(rng.random(n_s) < 0.2, np.inf,
                     10.0 ** rng.uniform(6, 9, n_s)),
            np.zeros(n_u),
            rng.integers(1, n_u + 1, n_s).astype(np.int64),
            True,
        ))
    return {"waterfill": waterfill_args, "maxmin_share": maxmin_args,
            "greedy_assign": greedy_args}


def verify_identical(pure, fast, inputs):
    for name, args_list in inputs.items():
        for args in args_list:
            a = getattr(pure, name)(*args)
            b = getattr(fast, name)(*args)
            if name == "greedy_assign":
                assert (a[0] == b[0]).all() and (a[1] == b[1]).all()
            else:
                assert (a == b).all()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    pure = kernels.get_backend("pure")
    try:
        fast = kernels.get_backend("fast")
    except ImportError:
        raise SystemExit("compiled backend not built; reinstall the package")

    inputs = make_inputs()
    verify_identical(pure, fast, inputs)
    print("outputs bit-identical across backends")
    print(f"{'kernel':<16}{'pure (us)':>12}{'fast (us)':>12}{'speedup':>10}")
    for name, args_list in inputs.items():
        tp = _time(getattr(pure, name), args_list, args.repeats) * 1e6
        tf = _time(getattr(fast, name), args_list, args.repeats) * 1e6
        print(f"{name:<16}{tp:>12.1f}{tf:>12.1f}{tp / tf:>9.1f}x")


if __name__ == "__main__":
    main()
