"""Trace-driven simulator of an implicit-ID dangling pointer eliminator.

Heap objects get power-of-two sizes and pointers carry a size tag, so the
base address of any object (its implicit ID) falls out of any interior
pointer by truncation.  Pointer stores are tracked into per-object logs,
deduplicated by a direct-mapped cache, and ``free`` is delayed until no
stored reference to the object remains.
"""

from dangsim.engine import Engine, EngineConfig, StatsReport, run_trace
from dangsim.errors import DangSimError
from dangsim.logstore import CompressionMode
from dangsim.traceio import parse, render

__all__ = [
    "CompressionMode",
    "DangSimError",
    "Engine",
    "EngineConfig",
    "StatsReport",
    "parse",
    "render",
    "run_trace",
]

__version__ = "0.1.0"
