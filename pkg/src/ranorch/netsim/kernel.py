"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set RANORCH_KERNEL=python or RANORCH_KERNEL=cython to force a backend.
Both backends produce bit-identical results; see bench/kernel_bench.py for
the speed comparison.
"""

from __future__ import annotations

import os

_forced = os.environ.get("RANORCH_KERNEL", "").lower()

if _forced == "python":
    from ranorch.netsim._kernel_py import step_kernel
    KERNEL_BACKEND = "python"
elif _forced == "cython":
    from ranorch.netsim._kernel_cy import step_kernel  # noqa: F811
    KERNEL_BACKEND = "cython"
else:
    try:
        from ranorch.netsim._kernel_cy import step_kernel  # noqa: F811
        KERNEL_BACKEND = "cython"
    except ImportError:
        from ranorch.netsim._kernel_py import step_kernel  # noqa: F811
        KERNEL_BACKEND = "python"

__all__ = ["step_kernel", "KERNEL_BACKEND"]
