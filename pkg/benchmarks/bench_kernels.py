"""Compare the numba kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 3]

The first numba call includes compilation (cached on disk afterwards); it is
reported separately from the steady-state timings.
"""

import argparse
import time

import numpy as np
from scipy.spatial import cKDTree

from corrmate import kernels
from corrmate.bers import build
from corrmate.circle import FactorCircleMap, conjugacy_turns
from corrmate.correspondence import Correspondence, classify_points, pixel_grid


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--angles", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    C = Correspondence(build("a", 1, 4))
    Z = pixel_grid((-2.5, 2.5, -2.5, 2.5), args.size, args.size).ravel()
    Fm = FactorCircleMap.from_np(1, 4)
    rng = np.random.default_rng(0)
    thetas = rng.uniform(size=args.angles)
    num, den = C.R.num.astype(complex), C.R.den.astype(complex)
    choices = rng.integers(0, 2 * C.d, size=(16, args.steps // 16))

    cases = {
        f"classify {args.size}^2": lambda b: classify_points(C, Z, 200, backend=b)[0],
        f"conjugacy {args.angles} angles": lambda b: conjugacy_turns(Fm, thetas, 40, backend=b),
        f"chaos {args.steps} steps": lambda b: kernels.get(b).chaos_walks(num, den, choices, 1 + 0j, complex(C.r_inf)),
    }
    print(f"{'kernel':<28}{'numpy [s]':>12}{'numba [s]':>12}{'first numba':>14}{'speedup':>10}  agree")
    for name, fn in cases.items():
        t0 = time.perf_counter()
        first = fn("numba")
        t_first = time.perf_counter() - t0
        t_np, out_np = _time(lambda: fn("numpy"), args.repeat)
        t_nb, out_nb = _time(lambda: fn("numba"), args.repeat)
        if out_np.dtype.kind == "u":
            agree = f"{np.mean(out_np == out_nb):.4f}"
        elif name.startswith("chaos"):
            # root order differs between solvers, so compare the clouds, not the walks
            a, b = out_np.ravel(), out_nb.ravel()
            dist, _ = cKDTree(np.c_[a.real, a.imag]).query(np.c_[b.real, b.imag])
            agree = f"cover {np.mean(dist < 0.02):.3f}"
        else:
            agree = f"{np.max(np.abs(out_np - out_nb)):.1e}"
        del first
        print(f"{name:<28}{t_np:>12.3f}{t_nb:>12.3f}{t_first:>14.3f}{t_np / t_nb:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
