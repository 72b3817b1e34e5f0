"""Benchmark the numba kernels against the pure-numpy fallback.

The backend is chosen at import time by RICCIDISK_PURE_NUMPY, so this
driver spawns one subprocess per backend and compares wall times for the
flow inner loop pieces (curvature evaluation, boundary ghost closure, a
full RK4 step) and the deterministic reduction.

Usage: python benchmarks/bench_kernels.py [n_r] [n_theta]
"""

import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from riccidisk import _kernels
from riccidisk.flow import FlowState, step
from riccidisk.grid import GridSpec, build_grid
from riccidisk.initial_data import CapParams, PerturbationParams, perturbed_cap

n_r, n_theta = int(sys.argv[1]), int(sys.argv[2])
grid = build_grid(GridSpec(n_r, n_theta))
mode = 2 if n_theta > 1 else 0
m = perturbed_cap(CapParams(0.5), PerturbationParams(0.05, mode), grid)
u = np.ascontiguousarray(m.u)
ghost = np.ascontiguousarray(m.u_ghost)
flat = (u * grid.w_vol).ravel()

def bench(fn, reps):
    fn()  # warm up (numba compilation)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps

dt = 1.0e-9
state = FlowState(0.0, m)
results = {
    "backend": "numba" if _kernels.USING_NUMBA else "numpy",
    "curvature": bench(lambda: _kernels.curvature(u, ghost, grid.r, grid.dr, grid.dtheta), 200),
    "ghost_closure": bench(lambda: _kernels.curvature_neumann_ghost(u, grid.r, grid.dr, grid.dtheta), 200),
    "kahan_sum": bench(lambda: _kernels.kahan_sum(flat), 200),
    "rk4_step": bench(lambda: step(state, dt), 50),
}
print(json.dumps(results))
"""


def run_backend(pure_numpy, n_r, n_theta):
    env = dict(os.environ, RICCIDISK_PURE_NUMPY="1" if pure_numpy else "0")
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(n_r), str(n_theta)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    n_r = int(sys.argv[1]) if len(sys.argv) > 1 else 128
    n_theta = int(sys.argv[2]) if len(sys.argv) > 2 else 64
    print(f"grid {n_r} x {n_theta}")
    numba_res = run_backend(False, n_r, n_theta)
    numpy_res = run_backend(True, n_r, n_theta)
    print(f"{'kernel':<16}{'numba [us]':>12}{'numpy [us]':>12}{'speedup':>9}")
    for key in ("curvature", "ghost_closure", "kahan_sum", "rk4_step"):
        tb, tn = numba_res[key], numpy_res[key]
        print(f"{key:<16}{tb * 1e6:>12.1f}{tn * 1e6:>12.1f}{tn / tb:>9.2f}")


if __name__ == "__main__":
    main()
