"""Compare the compiled kernel backend against the pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gpelab import _kernels_py
from gpelab.grid import Grid2D

try:
    from gpelab import _core
except ImportError:
    _core = None


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_shooting(impl):
    # full bisection-resolution trajectory at the production step size
    return _time(impl.shoot_trajectory, 2.2062008653, 2e-3, 20.0, 3e-4)


def bench_flow(impl, n=256):
    grid = Grid2D(12.0, n)
    rng = np.random.default_rng(0)
    u = np.abs(rng.standard_normal((n, n)))
    other = np.abs(rng.standard_normal((n, n)))
    expv = np.exp(-0.01 * grid.radius_from((0.0, 0.0)) ** 2)
    return _time(impl.flow_predictor, u, expv, other**2, 10.0, 1.0, 0.01, repeat=20)


def bench_overlap(impl, n=256):
    rng = np.random.default_rng(1)
    u = np.abs(rng.standard_normal((n, n)))
    v = np.abs(rng.standard_normal((n, n)))
    return _time(impl.quartic_overlap, u, v, repeat=20)


def main():
    rows = [
        ("shoot_trajectory (r=20, h=2e-3)", bench_shooting),
        ("flow_predictor (256x256)", bench_flow),
        ("quartic_overlap (256x256)", bench_overlap),
    ]
    print(f"{'kernel':<34} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for label, bench in rows:
        t_py = bench(_kernels_py)
        if _core is not None:
            t_c = bench(_core)
            print(f"{label:<34} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms {t_py / t_c:>7.1f}x")
        else:
            print(f"{label:<34} {t_py * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")


if __name__ == "__main__":
    main()
