"""Compiled vs numpy kernels on long simulations.

Usage: ``python benchmarks/bench_kernels.py [--horizon 100000] [--repeat 5]``
"""

import argparse
import timeit

import numpy as np

from dsge_select import kernels, nk_model, select_bk


def _fa_sized(rng, n_s, n_j, k):
    a = rng.normal(size=(n_s, n_s))
    r = 0.9 * a / np.max(np.abs(np.linalg.eigvals(a)))
    return (r, rng.normal(size=(n_s, k)), rng.normal(size=(n_j, n_s)), rng.normal(size=(n_j, k)),
            np.zeros(n_s), np.zeros(n_j))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    sol = select_bk(nk_model()).solution
    cases = {
        "nk (1 state, 2 jumps)": (sol.r, sol.q_imp, sol.p, sol.g_imp, sol.k_s, sol.k_j),
        "medium (6 states, 10 jumps)": _fa_sized(rng, 6, 10, 3),
    }
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"horizon={args.horizon} repeat={args.repeat} (best of)")
    for label, mats in cases.items():
        eps = rng.normal(size=(args.horizon, mats[1].shape[1]))
        s0 = np.zeros(mats[0].shape[0])
        times = {}
        for b in backends:
            fn = lambda: kernels.simulate_lss(*mats, eps, s0, impl=b)  # noqa: E731
            times[b] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        line = "  ".join(f"{b}={t * 1e3:8.2f} ms" for b, t in times.items())
        if "cython" in times:
            line += f"  speedup={times['python'] / times['cython']:.1f}x"
        print(f"{label:30s} {line}")


if __name__ == "__main__":
    main()
