"""Benchmark the compiled kernels against the numpy/scipy fallback.

Times the two hot kernels at production sizes and one end-to-end wave solve
per backend.  Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from sdwave import _kernels, dispersion, model, profile
from sdwave._kernels import _ref

try:
    from sdwave._kernels import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_exp_conv(mod, n):
    rng = np.random.default_rng(0)
    H = rng.uniform(0.0, 3.0, n)
    return timeit(mod.exp_conv_pair, H, 0.01, -1.7, 2.9, 0.0, float(H[-1]))


def bench_tridiag(mod, n):
    rng = np.random.default_rng(1)
    lower = np.full(n - 1, -0.4)
    upper = np.full(n - 1, -0.4)
    diag = np.full(n, 1.8)
    rhs = rng.uniform(0.0, 1.0, n)
    return timeit(mod.solve_tridiagonal, lower, diag, upper, rhs)


def bench_solve(backend_mod):
    # route the solver through one backend by patching the kernel module
    saved = (_kernels.exp_conv_pair, _kernels.solve_tridiagonal)
    _kernels.exp_conv_pair = backend_mod.exp_conv_pair
    _kernels.solve_tridiagonal = backend_mod.solve_tridiagonal
    try:
        m = model.ModelSpec(d=1.0, birth=model.RickerBirth(2.0),
                            delay=model.RationalDelay(0.2, 0.7))
        ctx = dispersion.CharacteristicContext.from_model(m)
        c = 1.2 * dispersion.critical_speed(ctx).c_star
        t0 = time.perf_counter()
        sol = profile.solve_monotone(m, c, profile.SolverConfig(h=0.01))
        dt = time.perf_counter() - t0
        return dt, sol.iterations
    finally:
        _kernels.exp_conv_pair, _kernels.solve_tridiagonal = saved


def main():
    backends = [("numpy", _ref)]
    if _core is not None:
        backends.append(("cython", _core))
    print(f"active backend at import: {_kernels.BACKEND}")
    print()
    print(f"{'kernel':<26}{'n':>10}" +
          "".join(f"{name:>14}" for name, _ in backends) + f"{'ratio':>9}")
    for n in (10_000, 100_000, 1_000_000):
        times = [bench_exp_conv(mod, n) for _, mod in backends]
        ratio = times[0] / times[-1] if len(times) > 1 else 1.0
        print(f"{'exp_conv_pair':<26}{n:>10}" +
              "".join(f"{t * 1e3:>11.3f} ms" for t in times) + f"{ratio:>8.2f}x")
    for n in (10_000, 100_000, 1_000_000):
        times = [bench_tridiag(mod, n) for _, mod in backends]
        ratio = times[0] / times[-1] if len(times) > 1 else 1.0
        print(f"{'solve_tridiagonal':<26}{n:>10}" +
              "".join(f"{t * 1e3:>11.3f} ms" for t in times) + f"{ratio:>8.2f}x")
    print()
    for name, mod in backends:
        dt, iters = bench_solve(mod)
        print(f"end-to-end wave solve [{name:>6}]: {dt:.2f} s "
              f"({iters} iterations)")


if __name__ == "__main__":
    main()
