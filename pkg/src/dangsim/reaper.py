"""Delayed free.

``free`` never releases an object that memory still points at.  The object
becomes UserFreed and is verified against its log: with no live reference it
is released at once; if every reference sits inside other heap objects it
waits on the container of the lowest-addressed reference (and is re-checked
when that container is released); otherwise it joins the period list, which
is re-checked whenever it grows past the threshold.
"""

import enum
from collections import deque
from typing import NamedTuple, Optional

from dangsim import logstore, minfat
from dangsim.errors import InvalidFree, PrematureFree
from dangsim.simspace import ObjectRecord, State

PERIOD = "period"


class Outcome(enum.Enum):
    RELEASED = "released"
    DEFERRED_PERIOD = "deferred-period"
    DEFERRED_HEAP = "deferred-heap"
    DOUBLE_FREE = "double-free"


class FreeResult(NamedTuple):
    outcome: Outcome
    root: Optional[ObjectRecord] = None


class Reaper:
    def __init__(self, space, table, cache, mode, period_threshold=1000,
                 oracle=None, strict_audit=True):
        self.space = space
        self.table = table
        self.cache = cache
        self.mode = mode
        self.period_threshold = period_threshold
        self.oracle = oracle
        self.strict_audit = strict_audit
        self.period_list = {}  # id -> record, in insertion order
        self._pending = deque()
        self._cascading = False

        self.n_free_calls = 0
        self.n_released = 0
        self.n_double_free = 0
        self.n_verify = 0
        self.n_candidates = 0
        self.n_period_passes = 0
        self.n_audit_failures = 0

    # -- verification -----------------------------------------------------

    def verify_object(self, rec):
        """Addresses currently holding a pointer into ``rec``, in log order."""
        self.n_verify += 1
        obj_id = rec.id
        seen = set()
        refs = []
        for entry in rec.log.entries():
            span = logstore.expand(entry, self.mode, self.space)
            if not span:
                continue
            self.n_candidates += len(span)
            for addr, value in self.space.words_in(span.start, span.stop):
                if value.is_pointer and addr not in seen and minfat.id_of(value.word) == obj_id:
                    seen.add(addr)
                    refs.append(addr)
        return refs

    # -- free path --------------------------------------------------------

    def resolve(self, ptr):
        try:
            rec = self.space.objects.get(minfat.id_of(ptr))
        except minfat.NotAPointer:
            rec = None
        if rec is None:
            raise InvalidFree(f"free of {ptr:#x}, which names no registered object")
        return rec

    def on_free(self, target):
        """Handle a user ``free``; ``target`` is a tagged pointer or a record."""
        rec = target if isinstance(target, ObjectRecord) else self.resolve(target)
        self.n_free_calls += 1
        if rec.state is not State.LIVE:
            self.n_double_free += 1
            return FreeResult(Outcome.DOUBLE_FREE)
        rec.state = State.USER_FREED
        result = self._dispatch(rec)
        if len(self.period_list) > self.period_threshold:
            self.periodical_free()
        return result

    def _dispatch(self, rec):
        refs = self.verify_object(rec)
        if not refs:
            self.release_now(rec)
            return FreeResult(Outcome.RELEASED)
        root = self._heap_root(rec, refs)
        if root is not None:
            root.deferred.append(rec)
            rec.listed_on = root
            return FreeResult(Outcome.DEFERRED_HEAP, root)
        self.period_list[rec.id] = rec
        rec.listed_on = PERIOD
        return FreeResult(Outcome.DEFERRED_PERIOD)

    def _heap_root(self, rec, refs):
        # self-references and stack/global references go to the period list
        for addr in refs:
            holder = self.space.container_of(addr)
            if holder is None or holder is rec:
                return None
        return self.space.container_of(min(refs))

    def _detach(self, rec):
        where = rec.listed_on
        if where == PERIOD:
            del self.period_list[rec.id]
        elif where is not None:
            where.deferred.remove(rec)
        rec.listed_on = None

    def release_now(self, rec):
        self._release_one(rec)
        if self._cascading:
            return
        self._cascading = True
        try:
            while self._pending:
                child = self._pending.popleft()
                if child.state is State.USER_FREED and child.listed_on is None:
                    self._dispatch(child)
        finally:
            self._cascading = False

    def _release_one(self, rec):
        if self.oracle is not None and not self.oracle.check_release(rec.id):
            self.n_audit_failures += 1
            if self.strict_audit:
                raise PrematureFree(rec.id, self.oracle.sweep(rec.id).addresses)
        self._detach(rec)
        children, rec.deferred = rec.deferred, []
        for child in children:
            child.listed_on = None
        self._pending.extend(children)
        self.space.release(rec)
        if self.table.unregister(rec.id):
            # a later object reusing this ID gets a fresh, empty log
            self.cache.invalidate_all()
        self.n_released += 1

    # -- periodic and final settlement ------------------------------------

    def periodical_free(self):
        self.n_period_passes += 1
        released = 0
        for rec in list(self.period_list.values()):
            if rec.listed_on != PERIOD or rec.state is not State.USER_FREED:
                continue
            if not self.verify_object(rec):
                self.release_now(rec)
                released += 1
        return released

    def flush_all(self):
        while True:
            if self.period_list:
                self.periodical_free()
            changed = False
            waiting = sorted(
                (r for r in self.space.objects.values() if r.state is State.USER_FREED),
                key=lambda r: r.id,
            )
            for rec in waiting:
                if rec.state is State.USER_FREED and not self.verify_object(rec):
                    self.release_now(rec)
                    changed = True
            if not changed:
                return

    def retained(self):
        return {r.id for r in self.space.objects.values() if r.state is State.USER_FREED}
