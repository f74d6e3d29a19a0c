"""Benchmark the compiled convolution kernel against the numpy fallback.

The branch convolution is the hot loop of sentence-CNN training (it runs
once per branch per sentence per epoch), so this is the one kernel shipped
as a C extension. Usage:

    python benchmarks/bench_kernels.py [--filters 100] [--embed-dim 256]

Prints timing for both implementations across sentence lengths and checks
they agree numerically.
"""

import argparse
import time

import numpy as np

from archpairs.textcnn import kernels, kernels_py


def time_impl(fn, x, w, b, repeats):
    fn(x, w, b)  # warm-up
    start = time.perf_counter()
    for _ in range(repeats):
        fn(x, w, b)
    return (time.perf_counter() - start) / repeats


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--filters", type=int, default=100)
    parser.add_argument("--embed-dim", type=int, default=256)
    parser.add_argument("--kernel-size", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    if kernels.IMPLEMENTATION != "cython":
        print("compiled kernel not available in this build; "
              "timing the numpy fallback against itself")

    rng = np.random.default_rng(0)
    w = rng.normal(size=(args.filters, args.kernel_size, args.embed_dim))
    b = rng.normal(size=args.filters)

    print(f"filters={args.filters} kernel={args.kernel_size} d={args.embed_dim} "
          f"(selected implementation: {kernels.IMPLEMENTATION})")
    print(f"{'T':>6} {'numpy (ms)':>12} {'selected (ms)':>14} {'speedup':>8}")
    for t in (4, 16, 64, 256):
        x = rng.normal(size=(t, args.embed_dim))
        t_py = time_impl(kernels_py.branch_forward, x, w, b, args.repeats)
        t_sel = time_impl(kernels.branch_forward, x, w, b, args.repeats)

        p_sel, _, a_sel = kernels.branch_forward(x, w, b)
        p_py, _, a_py = kernels_py.branch_forward(x, w, b)
        assert np.allclose(p_sel, p_py, atol=1e-10), "implementations disagree"
        assert np.array_equal(a_sel, a_py), "active masks disagree"

        print(f"{t:>6} {t_py * 1e3:>12.3f} {t_sel * 1e3:>14.3f} "
              f"{t_py / t_sel:>8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
