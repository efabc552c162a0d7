"""Compare the numba and numpy backends: one rhs evaluation and one DP5(4) step.

    python3 benchmarks/bench_backends.py --sizes 50 100 200 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lindblad_kt.grid import build_grid
from lindblad_kt.initial import InitialSpec
from lindblad_kt.integrator import _Stepper
from lindblad_kt.model import Potential
from lindblad_kt.params import PhysicalParams, derive_coefficients
from lindblad_kt.solver import Problem


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(n: int, backend: str, repeat: int) -> tuple[float, float]:
    grid = build_grid(40.0, n)
    coeffs = derive_coefficients(PhysicalParams(470.0, 300.0, 0.5))
    prob = Problem(grid, coeffs, Potential.box(), backend=backend)
    s0 = prob.initial_state(InitialSpec("box_eigenstate", n=10).density(40.0))
    u = s0.u.copy()
    out = np.empty_like(u)
    t_rhs = best_of(lambda: prob.rhs_fn(0.0, u, out), repeat)
    st = _Stepper(prob.rhs_fn, prob.boundary_fn, 1e-8, 1e-8, grid.interior, backend=backend)
    t_step = best_of(lambda: st.step(0.0, u, 1e-4), repeat)
    return t_rhs, t_step


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'N':>5} {'backend':>8} {'rhs [ms]':>10} {'step [ms]':>10}")
    for n in args.sizes:
        res = {}
        for backend in ("numpy", "numba"):
            res[backend] = bench(n, backend, args.repeat)
            print(f"{n:>5} {backend:>8} {1e3 * res[backend][0]:>10.3f} {1e3 * res[backend][1]:>10.3f}")
        speed = res["numpy"][1] / res["numba"][1]
        print(f"{n:>5} {'speedup':>8} {res['numpy'][0] / res['numba'][0]:>10.1f} {speed:>10.1f}")


if __name__ == "__main__":
    main()
