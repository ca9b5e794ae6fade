# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-TTI buffer/serving update; mirrors _kernel_py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def step_kernel(
    cnp.int64_t[::1] buf,
    cnp.int64_t[::1] hol,
    cnp.int64_t[::1] assigned,
    double[::1] se,
    cnp.int64_t[::1] arrivals,
    double rbg_bandwidth_hz,
    double tti_duration_s,
    long packet_size_bits,
    long buffer_capacity_bits,
    long max_latency_ttis,
):
    cdef Py_ssize_t n = buf.shape[0]
    cdef Py_ssize_t i
    cdef double raw
    cdef cnp.int64_t rounded, eff_i, overflow, expired

    eff_arr = np.zeros(n, dtype=np.int64)
    drop_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] eff = eff_arr
    cdef cnp.int64_t[::1] drops = drop_arr

    for i in range(n):
        raw = ((assigned[i] * rbg_bandwidth_hz) * se[i]) * tti_duration_s
        rounded = packet_size_bits * <cnp.int64_t>floor(raw / packet_size_bits)
        eff_i = rounded if rounded < buf[i] else buf[i]
        eff[i] = eff_i

        buf[i] += arrivals[i] - eff_i
        overflow = buf[i] - buffer_capacity_bits
        if overflow < 0:
            overflow = 0
        buf[i] -= overflow

        expired = 0
        if hol[i] >= max_latency_ttis and buf[i] > 0:
            expired = packet_size_bits if packet_size_bits < buf[i] else buf[i]
            buf[i] -= expired
        drops[i] = overflow + expired

        if buf[i] > 0:
            hol[i] = hol[i] + 1 if hol[i] + 1 < max_latency_ttis else max_latency_ttis
        else:
            hol[i] = 0

    return eff_arr, drop_arr
