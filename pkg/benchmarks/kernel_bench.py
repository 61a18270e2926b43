"""Benchmark the jit-compiled float64 kernels against their pure-numpy
twins.

Run as:  python3 benchmarks/kernel_bench.py [--m EDGES] [--n VERTICES]

The numpy twins are always available as the _np_* functions, so both
variants are timed in one process; setting STREAMOPT_NO_NUMBA=1 before
import is the production switch and selects the same numpy code paths.
"""

import argparse
import time

import numpy as np

from streamopt import _kernels


def _time(fn, *args, repeat=200):
    fn(*args)  # warm up (jit compilation happens here)
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=20000, help="edge count")
    ap.add_argument("--n", type=int, default=2000, help="vertex count")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    m, n = args.m, args.n
    u = rng.integers(0, n // 2, size=m)
    v = rng.integers(n // 2, n, size=m)
    b = rng.uniform(0.0, 1.0, size=m)
    x = np.concatenate([rng.uniform(2.0, 3.0, n // 2), rng.uniform(-3.0, -2.0, n - n // 2)])
    w = rng.uniform(0.5, 2.0, size=m)
    y = rng.normal(size=n)
    pinv = rng.normal(size=(n, n))
    pinv = pinv @ pinv.T / n

    pairs = [
        ("edge_slacks", _kernels.edge_slacks, _kernels._np_edge_slacks, (u, v, b, x)),
        ("edge_weights", _kernels.edge_weights, _kernels._np_edge_weights, (u, v, b, x)),
        (
            "lap_matvec",
            lambda *a: _kernels.lap_matvec(u, v, w, y, np.zeros(n)),
            lambda *a: _kernels._np_lap_matvec(u, v, w, y, np.zeros(n)),
            (),
        ),
        (
            "grad_accumulate",
            lambda *a: _kernels.grad_accumulate(u, v, b, x, np.zeros(n)),
            lambda *a: _kernels._np_grad_accumulate(u, v, b, x, np.zeros(n)),
            (),
        ),
        (
            "resistance_scores",
            _kernels.resistance_scores,
            _kernels._np_resistance_scores,
            (u, v, w, pinv),
        ),
    ]

    jit_label = "numba" if _kernels.USE_NUMBA else "numpy (numba disabled)"
    print(f"m={m} n={n}   active kernel set: {jit_label}")
    print(f"{'kernel':<20}{'active (us)':>14}{'numpy twin (us)':>18}{'speedup':>10}")
    for name, fast, ref, fargs in pairs:
        out_fast = np.asarray(fast(*fargs))
        out_ref = np.asarray(ref(*fargs))
        if not np.allclose(out_fast, out_ref, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: kernel variants disagree")
        tf = _time(fast, *fargs)
        tr = _time(ref, *fargs)
        print(f"{name:<20}{tf * 1e6:>14.2f}{tr * 1e6:>18.2f}{tr / tf:>10.2f}x")


if __name__ == "__main__":
    main()
