#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the fused residual + Jacobian assembly (the Newton hot loop) and a full
end-to-end solve with each backend.  Run after building the extension:

    python setup.py build_ext --inplace
    python benchmarks/kernel_benchmark.py
"""

import os
import sys
import timeit

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from wedgecmc._kernels import _reference

try:
    from wedgecmc._kernels import _speedups
except ImportError:
    _speedups = None


def time_assembly(impl, nodes, repeats=30):
    w = 1.3 + 0.2 * np.sin(np.linspace(0.0, 6.0, nodes))
    tanh_sig = np.tanh(np.linspace(-2.0, 2.0, nodes))[1:-1]
    h = 5.0 / nodes

    def run():
        impl.wedge_interior(w, h, 2)
        impl.collar_interior(w, h, 2, tanh_sig)

    best = min(timeit.repeat(run, number=1, repeat=repeats))
    return best


def time_solve(backend_env):
    code = (
        "import time, numpy as np\n"
        "from wedgecmc import model as M, solver as S\n"
        "m = M.single_wedge_model(2, 1.0, 2.0, 3.0)\n"
        "cfg = S.SolverConfig(points_per_unit=256.0)\n"
        "S.solve_cmc_leaf(m, -1000.0, cfg)\n"
        "t0 = time.perf_counter()\n"
        "for _ in range(3):\n"
        "    f = S.solve_cmc_leaf(m, -1000.0, cfg)\n"
        "    assert f.converged\n"
        "print((time.perf_counter() - t0) / 3)\n"
    )
    env = dict(os.environ)
    env.update(backend_env)
    env["PYTHONPATH"] = os.path.join(os.path.dirname(__file__), "..", "src")
    import subprocess

    out = subprocess.run(
        [sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True
    )
    return float(out.stdout.strip().splitlines()[-1])


def main():
    print(f"{'nodes':>9}  {'numpy (ms)':>12}  {'compiled (ms)':>14}  {'speedup':>8}")
    for nodes in (10_000, 100_000, 1_000_000):
        t_ref = time_assembly(_reference, nodes) * 1e3
        if _speedups is None:
            print(f"{nodes:>9}  {t_ref:>12.3f}  {'(not built)':>14}  {'-':>8}")
            continue
        t_c = time_assembly(_speedups, nodes) * 1e3
        print(f"{nodes:>9}  {t_ref:>12.3f}  {t_c:>14.3f}  {t_ref / t_c:>8.2f}x")
    print()
    t_py = time_solve({"WEDGECMC_PURE": "1"})
    print(f"end-to-end solve (lambda=1000), numpy backend:    {t_py:.2f} s")
    if _speedups is not None:
        t_co = time_solve({"WEDGECMC_PURE": ""})
        print(f"end-to-end solve (lambda=1000), compiled backend: {t_co:.2f} s")


if __name__ == "__main__":
    main()
