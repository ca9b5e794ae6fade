"""Timing comparison between the compiled and pure-Python serving kernels."""

from __future__ import annotations

import time

import numpy as np

from ranorch.netsim import _kernel_py

try:
    from ranorch.netsim import _kernel_cy
except ImportError:           # extension not built
    _kernel_cy = None


def _workload(num_ues: int, steps: int, seed: int = 0):
    rng = np.random.Generator(np.random.PCG64(seed))
    assigned = rng.integers(0, 4, size=(steps, num_ues)).astype(np.int64)
    se = rng.uniform(0.2, 5.5, size=(steps, num_ues))
    arrivals = (rng.integers(0, 8, size=(steps, num_ues)) * 400).astype(np.int64)
    return assigned, se, arrivals


def _time_kernel(kernel, num_ues: int, steps: int) -> tuple[float, int]:
    assigned, se, arrivals = _workload(num_ues, steps)
    buf = np.zeros(num_ues, dtype=np.int64)
    hol = np.zeros(num_ues, dtype=np.int64)
    total = 0
    start = time.perf_counter()
    for t in range(steps):
        eff, _ = kernel.step_kernel(buf, hol, assigned[t], se[t], arrivals[t],
                                    360_000.0, 0.001, 400, 200_000, 20)
        total += int(eff.sum())
    return time.perf_counter() - start, total


def run_bench(steps: int = 20000, num_ues: int = 12) -> list[str]:
    lines = []
    py_time, py_total = _time_kernel(_kernel_py, num_ues, steps)
    lines.append(f"python kernel: {steps} steps in {py_time:.3f}s "
                 f"({steps / py_time:.0f} steps/s)")
    if _kernel_cy is None:
        lines.append("cython kernel: not built")
        return lines
    cy_time, cy_total = _time_kernel(_kernel_cy, num_ues, steps)
    lines.append(f"cython kernel: {steps} steps in {cy_time:.3f}s "
                 f"({steps / cy_time:.0f} steps/s)")
    lines.append(f"speedup: {py_time / cy_time:.2f}x")
    lines.append(f"served-bits agreement: {'exact' if py_total == cy_total else 'MISMATCH'}")
    return lines
