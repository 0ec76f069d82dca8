"""Runtime memory management for heterogeneous platforms, simulated.

The compiled core exposes location-tracked data handles (hete_malloc /
hete_free / hete_sync / fragment), two heap marking schemes, and a task-graph
runtime that dispatches under either the host-centric reference protocol or
the flag-driven rimms protocol.
"""

from hetmem._core import (
    BitsetHeap,
    BuiltApp,
    Dag,
    DataHandle,
    Error,
    Kernel,
    Mode,
    NextFitHeap,
    Platform,
    Schedule,
    Task,
    build_2fft,
    build_2fzf,
    build_3zip,
    build_pd,
    build_rc,
    build_sar,
    measure_flag_check_ns,
    output_checksum,
    preset_json,
    preset_names,
    release_app,
    run_app_pass,
    run_dag,
    scenario_pool,
)

HOST_DOMAIN = 0

__all__ = [
    "BitsetHeap",
    "BuiltApp",
    "Dag",
    "DataHandle",
    "Error",
    "HOST_DOMAIN",
    "Kernel",
    "Mode",
    "NextFitHeap",
    "Platform",
    "Schedule",
    "Task",
    "build_2fft",
    "build_2fzf",
    "build_3zip",
    "build_pd",
    "build_rc",
    "build_sar",
    "measure_flag_check_ns",
    "output_checksum",
    "preset_json",
    "preset_names",
    "release_app",
    "run_app_pass",
    "run_dag",
    "scenario_pool",
]
