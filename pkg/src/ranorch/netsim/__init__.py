"""TTI-stepped slicing simulator: traffic, buffers, link model, KPI accounting."""

from ranorch.netsim.kpi import (
    UeState,
    buffer_occupancy,
    check_slice_qos,
    count_allocations,
    fifth_percentile,
    longterm_throughput,
    packet_loss_rate,
)
from ranorch.netsim.kernel import KERNEL_BACKEND, step_kernel
from ranorch.netsim.simulator import KpiSample, NetworkState, Simulator

__all__ = [
    "UeState",
    "buffer_occupancy",
    "check_slice_qos",
    "count_allocations",
    "fifth_percentile",
    "longterm_throughput",
    "packet_loss_rate",
    "KERNEL_BACKEND",
    "step_kernel",
    "KpiSample",
    "NetworkState",
    "Simulator",
]
