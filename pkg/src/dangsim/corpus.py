"""Hand-written use-after-free / double-free traces.

Each base scenario exists twice: as written (low heap, direct-mapped
metadata) and with every allocation forced into the high heap, where
metadata goes through the hashed table.  Every trace ends in expectations.
"""

import re
from pathlib import Path

from dangsim import traceio

_BASE = {
    "uaf_read_stack": """
        alloc a 32
        storei a+8 42
        store stack:0 a
        free a
        load a+8 42          # read after free sees the old contents
        load stack:0 a
        expect-live a
        storei stack:0 0
        flush
        expect-released a
    """,
    "uaf_write_deferred": """
        alloc a 64
        store global:1 a
        free a
        storei a+0x10 7      # store after free lands in the parked object
        load a+0x10 7
        expect-live a
        store global:1 null
        flush
        expect-released a
    """,
    "double_free_unreferenced": """
        alloc a 24
        free a
        expect-released a
        free a               # counted, not fatal
        expect-released a
    """,
    "double_free_referenced": """
        alloc a 24
        store global:0 a
        free a
        free a
        expect-live a
        storei global:0 0
        flush
        expect-released a
    """,
    "double_free_after_reuse": """
        alloc a 16
        free a
        alloc b 16           # reuses a's range
        free a               # stale name: must not touch b
        expect-live b
        store stack:3 b
        free b
        expect-live b
        storei stack:3 0
        flush
        expect-released b
    """,
    "free_then_realloc_alias": """
        alloc a 16
        storei a+0 5
        store stack:0 a
        realloc a b 64
        expect-live a        # stack:0 still points at the old block
        expect-live b
        load b+0 5
        load stack:0 a
        load a+0 5
        storei stack:0 0
        flush
        expect-released a
        expect-live b
    """,
    "realloc_unreferenced": """
        alloc a 128
        storei a+0 1
        storei a+0x78 2
        realloc a b 16
        expect-released a
        load b+0 1
        expect-live b
    """,
    "realloc_copies_pointers": """
        alloc x 16
        alloc a 32
        store a+8 x
        realloc a b 64
        expect-released a
        free x
        expect-live x        # the copy at b+8 is tracked
        load b+8 x
        storei b+8 0
        flush
        expect-released x
    """,
    "heap_rooted_deferral": """
        alloc objA 64
        alloc c 16
        store objA+8 c
        free c
        expect-live c
        free objA
        expect-released objA
        expect-released c    # released with its root
    """,
    "heap_rooted_chain": """
        alloc a 32
        alloc b 32
        alloc c 32
        store a+0 b
        store b+0 c
        free c
        free b
        expect-live b
        expect-live c
        free a
        expect-released a
        expect-released b
        expect-released c
    """,
    "heap_root_then_stack": """
        alloc objA 64
        alloc c 16
        store objA+0x10 c
        free c
        store stack:1 c      # dangling pointer stored after free
        free objA
        expect-released objA
        expect-live c        # moved to the period list
        storei stack:1 0
        period
        expect-released c
    """,
    "mixed_referrers": """
        alloc h 64
        alloc c 16
        store h+0 c
        store stack:2 c
        free c
        expect-live c
        storei h+0 0
        period
        expect-live c
        store stack:2 null
        period
        expect-released c
        expect-live h
    """,
    "overwrite_then_flush": """
        alloc a 40
        store global:3 a
        free a
        expect-live a
        storei global:3 5
        flush
        expect-released a
    """,
    "pointer_replaced": """
        alloc a 16
        alloc b 16
        store stack:0 a
        free a
        store stack:0 b
        period
        expect-released a
        expect-live b
    """,
    "interior_pointer": """
        alloc a 100
        store stack:2 a+0x40
        free a+0x10          # interior free resolves to the object
        expect-live a
        load a+0x40
        storei stack:2 0
        period
        expect-released a
    """,
    "self_reference": """
        alloc a 32
        store a+8 a
        free a
        expect-live a
        storei a+8 0
        flush
        expect-released a
    """,
    "cycle_retained": """
        alloc a 32
        alloc b 32
        store a+0 b
        store b+0 a
        free a
        free b
        flush
        expect-live a        # unreachable cycles are kept, never freed early
        expect-live b
    """,
    "many_locations": """
        alloc a 16
        alloc h 64
        store stack:0 a
        store stack:1 a+8
        store global:0 a
        store h+0 a
        store h+0x28 a
        free a
        storei stack:0 0
        storei stack:1 0
        storei global:0 0
        storei h+0 0
        period
        expect-live a
        storei h+0x28 0
        period
        expect-released a
    """,
    "stale_log_over_reuse": """
        alloc h 64
        alloc x 16
        store h+8 x
        free h               # h's words vanish; x's log keeps h+8
        expect-released h
        alloc g 64           # same range as h
        storei g+8 9
        free x
        expect-released x
        expect-live g
    """,
    "uaf_through_heap_pointer": """
        alloc list 64
        alloc node 16
        store list+0 node
        storei node+8 99
        free node
        load node+8 99
        load list+0 node
        expect-live node
        store list+0 null
        free list
        flush
        expect-released node
        expect-released list
    """,
}


def _dedent(text):
    lines = [ln.strip() for ln in text.strip().splitlines()]
    return "\n".join(lines) + "\n"


def _high_variant(text):
    return re.sub(r"^(alloc \S+ \S+)", r"\1 high", text, flags=re.M)


def cwe416_corpus():
    """Named traces: every base scenario plus its high-heap twin."""
    traces = {}
    for name, body in _BASE.items():
        text = _dedent(body)
        traces[name] = text
        traces[name + "_high"] = _high_variant(text)
    return traces


def write_corpus(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in cwe416_corpus().items():
        traceio.parse(text)
        path = out / f"{name}.trace"
        path.write_text(text)
        paths.append(path)
    return paths
