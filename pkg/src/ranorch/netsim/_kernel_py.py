"""Pure-Python (numpy) fallback for the per-TTI buffer/serving update.

Must stay numerically identical to the Cython kernel: same float64
operation order for the served-bits product, integer bit accounting
everywhere else.
"""

from __future__ import annotations

import numpy as np


def step_kernel(
    buf: np.ndarray,            # int64, in/out: buffer bits per UE
    hol: np.ndarray,            # int64, in/out: head-of-line delay (TTIs)
    assigned: np.ndarray,       # int64: RBGs assigned to each UE this TTI
    se: np.ndarray,             # float64: spectral efficiency per UE
    arrivals: np.ndarray,       # int64: arriving bits per UE this TTI
    rbg_bandwidth_hz: float,
    tti_duration_s: float,
    packet_size_bits: int,
    buffer_capacity_bits: int,
    max_latency_ttis: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance buffers one TTI; returns (effective served bits, dropped bits)."""
    raw = ((assigned * rbg_bandwidth_hz) * se) * tti_duration_s
    rounded = packet_size_bits * np.floor(raw / packet_size_bits).astype(np.int64)
    eff = np.minimum(rounded, buf)

    buf += arrivals - eff
    overflow = np.maximum(buf - buffer_capacity_bits, 0)
    buf -= overflow

    expired = np.where(
        (hol >= max_latency_ttis) & (buf > 0),
        np.minimum(packet_size_bits, buf),
        0,
    )
    buf -= expired
    drops = overflow + expired

    np.copyto(hol, np.where(buf > 0, np.minimum(hol + 1, max_latency_ttis), 0))
    return eff, drops
