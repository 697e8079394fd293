"""Brute-force reference oracle.

Sweeps every mapped word of the simulated space and reports which ones hold
a pointer whose implicit ID equals a given object.  It never looks at logs,
caches or compression state, which is what makes it a usable ground truth
for the engine's log-driven verification.
"""

from typing import NamedTuple

from dangsim import minfat
from dangsim.simspace import SimSpace, State


class SweepResult(NamedTuple):
    obj_id: int
    addresses: list


class Oracle:
    def __init__(self, space: SimSpace):
        self.space = space
        self.words_scanned = 0
        self.failures = []

    def sweep(self, obj_id) -> SweepResult:
        hits = []
        words = self.space.mapped_words()
        self.words_scanned += len(words)
        for addr, value in words:
            if value.is_pointer and minfat.id_of(value.word) == obj_id:
                hits.append(addr)
        hits.sort()
        return SweepResult(obj_id, hits)

    def referencers(self):
        """Map every pointee ID to the sorted addresses referencing it."""
        refs = {}
        words = self.space.mapped_words()
        self.words_scanned += len(words)
        for addr, value in words:
            if value.is_pointer:
                refs.setdefault(minfat.id_of(value.word), []).append(addr)
        for addrs in refs.values():
            addrs.sort()
        return refs

    def check_release(self, obj_id):
        ok = not self.sweep(obj_id).addresses
        if not ok:
            self.failures.append(obj_id)
        return ok

    def still_referenced(self):
        """IDs of user-freed, unreleased objects that some mapped word points at."""
        refs = self.referencers()
        return {
            rec.id
            for rec in self.space.objects.values()
            if rec.state is State.USER_FREED and rec.id in refs
        }
