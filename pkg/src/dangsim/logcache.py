"""Direct-mapped Log Cache: "has (pointee, location) already been logged?"

The slot index is ``(pointee_id ^ location_key) mod 2**index_bits``.  A slot
keeps the full (pointee, key) pair and a hit requires both to match; keeping
only the location (``tag_only=True``) lets two pointees congruent modulo the
table size alias each other, which is exposed here for testing but unsound.
"""

import random

from dangsim.logstore import CompressionMode
from dangsim.simspace import WORD, SimSpace


def loc_key(loc, mode: CompressionMode, space: SimSpace = None):
    if loc % WORD:
        raise ValueError(f"location {loc:#x} is not word aligned")
    if mode.is_off:
        return loc
    if mode.is_full:
        rec = space.container_of(loc) if space is not None else None
        return rec.id if rec is not None else loc
    return loc & ~(mode.block_bytes - 1)


class LogCache:
    def __init__(self, index_bits=20, tag_only=False, spurious_hit_rate=0.0, seed=0):
        if not 4 <= index_bits <= 28:
            raise ValueError(f"index_bits must lie in [4, 28], got {index_bits}")
        self.index_bits = index_bits
        self.mask = (1 << index_bits) - 1
        self.tag_only = tag_only
        self.spurious_hit_rate = spurious_hit_rate
        self._fault_rng = random.Random(seed ^ 0x5EED)
        # only filled slots are materialized, so clearing costs at most the
        # number of fills since the previous clear
        self._slots = {}
        self.hits = 0
        self.misses = 0
        self.spurious = 0

    def index(self, pointee_id, key):
        return (pointee_id ^ key) & self.mask

    def probe(self, pointee_id, key):
        """Probe with a precomputed location key; fill on miss."""
        idx = (pointee_id ^ key) & self.mask
        slot = self._slots.get(idx)
        if slot is not None and slot[1] == key and (
            self.tag_only or slot[0] == pointee_id
        ):
            self.hits += 1
            return True
        if self.spurious_hit_rate and self._fault_rng.random() < self.spurious_hit_rate:
            self.spurious += 1
            self.hits += 1
            return True
        self._slots[idx] = (pointee_id, key)
        self.misses += 1
        return False

    def slot(self, idx):
        """``(pointee_id, key)`` held at ``idx``, or None when invalid."""
        return self._slots.get(idx)

    def probe_and_fill(self, pointee_id, loc, mode: CompressionMode, space: SimSpace = None):
        return self.probe(pointee_id, loc_key(loc, mode, space))

    def invalidate_all(self):
        self._slots.clear()
