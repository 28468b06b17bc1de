"""Benchmark the numba-compiled kernels against the pure-numpy fallbacks.

Both implementations always exist; this script times each pair on
representative shapes, checks they agree, and reports the speedup. Run:

    python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ganspectra import kernels
from ganspectra.rng import SplitMix64


def timeit(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description="numba vs numpy kernel benchmark")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--side", type=int, default=256)
    args = parser.parse_args()

    if not kernels.NUMBA_ENABLED:
        print("numba path is not active (missing numba or GANSPECTRA_DISABLE_NUMBA set);")
        print("nothing to compare.")
        return 1

    rng = SplitMix64(17)
    s = args.side
    img = rng.randoms(s * s).reshape(s, s)
    g = rng.randoms(s * s).reshape(s, s)
    k = rng.randoms(9).reshape(3, 3) - 0.5

    cases = [
        ("conv2d circular", kernels._conv2d_circular_nb, kernels._conv2d_circular_np, (img, k, 1, 1)),
        ("conv2d zero", kernels._conv2d_zero_nb, kernels._conv2d_zero_np, (img, k, 1, 1)),
        ("conv input grad", kernels._conv2d_input_grad_nb, kernels._conv2d_input_grad_np, (g, k, 1, 1)),
        ("conv kernel grad", kernels._conv2d_kernel_grad_nb, kernels._conv2d_kernel_grad_np, (img, g, 3, 3, 1, 1)),
        ("resize bilinear", kernels._resize_bilinear_nb, kernels._resize_bilinear_np, (img, s // 2, s // 2)),
    ]

    kernels.warmup()
    print(f"side={s}, repeats={args.repeats} (best of)")
    print(f"{'kernel':<18} {'numba':>10} {'numpy':>10} {'speedup':>8}  agree")
    for name, nb, np_fn, case_args in cases:
        got_nb = nb(*case_args)
        got_np = np_fn(*case_args)
        agree = np.allclose(got_nb, got_np, atol=1e-12)
        t_nb = timeit(nb, case_args, args.repeats)
        t_np = timeit(np_fn, case_args, args.repeats)
        print(f"{name:<18} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
