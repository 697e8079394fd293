"""Object-metadata address table: implicit ID -> log.

IDs below ``2**direct_bits`` index a direct table at ``id >> 4``; the table
is paged and pages appear on first touch, so a sparse heap costs memory in
proportion to the IDs actually used.  IDs above the boundary go through a
Fibonacci multiplicative hash into a sign-tagged table whose colliding
objects share one log, reference-counted by the log's ``nums``.
"""

import random
from typing import NamedTuple

from dangsim import logstore
from dangsim.errors import AccountingBug, DuplicateID

PAGE_BITS = 16
_FIB64 = 0x9E3779B97F4A7C15


class PagedArray:
    """Fixed logical length, pages of ``2**PAGE_BITS`` slots built lazily."""

    def __init__(self, length):
        self.length = length
        self.pages = {}

    def __getitem__(self, i):
        page = self.pages.get(i >> PAGE_BITS)
        if page is None:
            return None
        return page[i & ((1 << PAGE_BITS) - 1)]

    def __setitem__(self, i, value):
        if not 0 <= i < self.length:
            raise IndexError(i)
        page = self.pages.get(i >> PAGE_BITS)
        if page is None:
            page = self.pages[i >> PAGE_BITS] = [None] * (1 << PAGE_BITS)
        page[i & ((1 << PAGE_BITS) - 1)] = value


class TableEntry(NamedTuple):
    sign: int
    log: logstore.LogHandle


class AddressTable:
    def __init__(self, direct_bits=32, hash_bits=20, program_sign=None, seed=0, lanes=1):
        if not 16 <= direct_bits <= 46:
            raise ValueError(f"direct_bits must lie in [16, 46], got {direct_bits}")
        if not 8 <= hash_bits <= 30:
            raise ValueError(f"hash_bits must lie in [8, 30], got {hash_bits}")
        if program_sign is None:
            program_sign = random.Random(seed).randrange(1, 256)
        if not 0 < program_sign < 256:
            raise ValueError("program_sign must be a nonzero 8-bit value")
        self.direct_bits = direct_bits
        self.hash_bits = hash_bits
        self.program_sign = program_sign
        self.lanes = lanes
        self.direct = PagedArray(1 << (direct_bits - 4))
        self.hashed = PagedArray(1 << hash_bits)

    def is_direct(self, obj_id):
        return obj_id < (1 << self.direct_bits)

    def slot_of(self, obj_id):
        if self.is_direct(obj_id):
            return obj_id >> 4
        return (((obj_id >> 4) * _FIB64) & 0xFFFF_FFFF_FFFF_FFFF) >> (64 - self.hash_bits)

    def register(self, obj_id):
        """Attach a log to a fresh object; returns ``(log, shared)``."""
        slot = self.slot_of(obj_id)
        if self.is_direct(obj_id):
            if self.direct[slot] is not None:
                raise DuplicateID(f"direct slot for {obj_id:#x} already occupied")
            log = self.direct[slot] = logstore.LogHandle(self.lanes)
            return log, False
        entry = self.hashed[slot]
        if entry is not None and entry.sign:
            entry.log.nums += 1
            return entry.log, True
        log = logstore.LogHandle(self.lanes)
        self.hashed[slot] = TableEntry(self.program_sign, log)
        return log, False

    def lookup(self, obj_id):
        slot = self.slot_of(obj_id)
        if self.is_direct(obj_id):
            return self.direct[slot]
        entry = self.hashed[slot]
        if entry is None or not entry.sign:
            return None
        return entry.log

    def entry(self, obj_id):
        """Raw hash-table entry for a high ID (None if never touched)."""
        return self.hashed[self.slot_of(obj_id)]

    def unregister(self, obj_id):
        """Drop one owner; returns True when the log itself was released."""
        slot = self.slot_of(obj_id)
        if self.is_direct(obj_id):
            log = self.direct[slot]
            if log is None:
                raise AccountingBug(f"unregister of unknown id {obj_id:#x}")
            self.direct[slot] = None
            log.nums -= 1
            logstore.release(log)
            return True
        entry = self.hashed[slot]
        if entry is None or not entry.sign:
            raise AccountingBug(f"unregister of unknown id {obj_id:#x}")
        log = entry.log
        if log.nums <= 0:
            raise AccountingBug(f"nums underflow at hash slot {slot:#x}")
        log.nums -= 1
        if log.nums:
            return False
        self.hashed[slot] = TableEntry(0, None)
        logstore.release(log)
        return True
