"""Event engine: track -> search -> handle.

Every pointer store first probes the Log Cache with (pointee ID, location
key); only a miss pays for the metadata-table lookup and the log append.
``free`` goes to the reaper.  The counters follow the per-pointer overhead
breakdown: ``verifying`` counts redundancy probes, ``searching`` counts
table lookups, ``logging`` counts appends and ``handling`` counts candidate
words examined when verifying freed objects.
"""

from dataclasses import dataclass, field, fields
import json

from dangsim import logstore, minfat
from dangsim.addrtable import AddressTable
from dangsim.errors import DangSimError, InternalBug, TraceError
from dangsim.logcache import LogCache, loc_key
from dangsim.logstore import CompressionMode
from dangsim.oracle import Oracle
from dangsim.reaper import Outcome, Reaper
from dangsim.simspace import Placement, SimSpace, SimValue, State
from dangsim import traceio as T


@dataclass(frozen=True)
class EngineConfig:
    compression: CompressionMode = logstore.OFF
    cache_bits: int = 20
    direct_bits: int = 32
    hash_bits: int = 20
    period_threshold: int = 1000
    placement: Placement = Placement.LOW
    seed: int = 0
    oracle_check: bool = False
    final_flush: bool = True
    # test levers
    spurious_hit_rate: float = 0.0
    tag_only_cache: bool = False
    strict_audit: bool = True


@dataclass
class StatsReport:
    n_obj: int = 0
    n_ptr_stores: int = 0
    n_logged: int = 0
    dup_hits: int = 0
    dup_rate: float = 0.0
    n_data_stores: int = 0
    n_untracked_ptr_stores: int = 0
    n_loads: int = 0
    n_uaf_loads: int = 0
    n_free_calls: int = 0
    n_released: int = 0
    n_retained_at_end: int = 0
    n_double_free: int = 0
    n_realloc: int = 0
    n_shared_registrations: int = 0
    searching: int = 0
    verifying: int = 0
    logging: int = 0
    handling: int = 0
    n_verify_calls: int = 0
    n_period_passes: int = 0
    n_audit_failures: int = 0
    oracle_words_scanned: int = 0
    config: dict = field(default_factory=dict)

    def counters(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "config"}

    def to_text(self):
        lines = [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                 for k, v in self.counters().items()]
        lines += [f"config.{k}={v}" for k, v in self.config.items()]
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps({"config": self.config, "stats": self.counters()}, indent=2)


class Engine:
    def __init__(self, config: EngineConfig = EngineConfig()):
        self.config = config
        self.mode = config.compression
        self.space = SimSpace(config.direct_bits)
        self.table = AddressTable(config.direct_bits, config.hash_bits, seed=config.seed)
        self.cache = LogCache(config.cache_bits, tag_only=config.tag_only_cache,
                              spurious_hit_rate=config.spurious_hit_rate, seed=config.seed)
        self.oracle = Oracle(self.space)
        self.reaper = Reaper(
            self.space, self.table, self.cache, self.mode,
            period_threshold=config.period_threshold,
            oracle=self.oracle if config.oracle_check else None,
            strict_audit=config.strict_audit,
        )
        self.stats = StatsReport()
        self.names = {}

    # -- primitive operations ---------------------------------------------

    def allocate(self, size, placement=None):
        rec, ptr = self.space.allocate(size, placement or self.config.placement)
        rec.log, shared = self.table.register(rec.id)
        self.stats.n_obj += 1
        self.stats.n_shared_registrations += shared
        return rec, ptr

    def on_store(self, loc, value: SimValue):
        self.space.write_word(loc, value)
        st = self.stats
        if not value.is_pointer:
            st.n_data_stores += 1
            return
        pid = minfat.id_of(value.word)
        if pid not in self.space.objects:
            st.n_untracked_ptr_stores += 1
            return
        st.n_ptr_stores += 1
        st.verifying += 1
        key = loc_key(loc, self.mode, self.space)
        if self.cache.probe(pid, key):
            st.dup_hits += 1
            return
        st.searching += 1
        log = self.table.lookup(pid)
        if log is None:
            raise InternalBug(f"no log for registered object {pid:#x}")
        logstore.append(log, logstore.LogEntry(self.mode.entry_kind, key))
        st.logging += 1
        st.n_logged += 1

    def on_load(self, loc):
        self.stats.n_loads += 1
        holder = self.space.container_of(loc)
        if holder is None and not self.space.in_fixed_window(loc):
            raise DangSimError(f"load from unmapped address {loc:#x}")
        if holder is not None and holder.state is State.USER_FREED:
            self.stats.n_uaf_loads += 1
        return self.space.read_word(loc)

    def on_free(self, target):
        return self.reaper.on_free(target)

    def on_realloc(self, old, new_size):
        """Allocate, copy, then free ``old``; returns ``(new_record, new_ptr)``.

        ``old`` is a record or a tagged pointer.  Copied pointer words go
        through ``on_store`` so the new locations are tracked.
        """
        if not hasattr(old, "state"):
            old = self.reaper.resolve(old)
        if old.state is not State.LIVE:
            raise DangSimError(f"realloc of non-live object {old.id:#x}")
        rec, ptr = self.allocate(new_size, old.placement)
        limit = min(old.size, rec.size)
        for addr in sorted(old.written):
            off = addr - old.id
            if off < limit:
                self.on_store(rec.id + off, self.space.read_word(addr))
        self.stats.n_realloc += 1
        self.on_free(old)
        return rec, ptr

    def periodical_free(self):
        return self.reaper.periodical_free()

    def flush_all(self):
        self.reaper.flush_all()

    # -- trace replay -----------------------------------------------------

    def _record(self, name, index):
        rec = self.names[name]
        if rec.state is State.RELEASED:
            raise TraceError(index, f"object {name!r} was already released")
        return rec

    def _addr(self, loc, index):
        if loc.area == "stack":
            return self.space.stack_addr(loc.offset)
        if loc.area == "global":
            return self.space.global_addr(loc.offset)
        return self._record(loc.name, index).id + loc.offset

    def _pointer(self, expr, index):
        rec = self._record(expr.name, index)
        return minfat.encode(rec.id, rec.B) + expr.offset

    def _expect_value(self, got, expected, index):
        if expected == T.ABSENT:
            ok = got is None
        elif isinstance(expected, T.PtrExpr):
            ok = got is not None and got.is_pointer and got.word == self._pointer(expected, index)
        elif expected == 0:
            ok = got is None or (not got.is_pointer and got.word == 0)
        else:
            ok = got is not None and not got.is_pointer and got.word == expected & minfat.WORD_MASK
        if not ok:
            raise TraceError(index, f"load expected {expected!r}, got {got!r}")

    def step(self, index, ev):
        if isinstance(ev, T.Alloc):
            placement = Placement.HIGH if ev.high else None
            self.names[ev.name], _ = self.allocate(ev.size, placement)
        elif isinstance(ev, T.Store):
            value = SimValue.pointer(self._pointer(ev.ptr, index)) if ev.ptr else SimValue.data(0)
            self.on_store(self._addr(ev.loc, index), value)
        elif isinstance(ev, T.StoreData):
            self.on_store(self._addr(ev.loc, index), SimValue.data(ev.value))
        elif isinstance(ev, T.Load):
            got = self.on_load(self._addr(ev.loc, index))
            if ev.expected is not None:
                self._expect_value(got, ev.expected, index)
        elif isinstance(ev, T.Free):
            # the record, not the address, so a stale name cannot free a reuser
            rec = self.names[ev.ptr.name]
            self.on_free(rec)
        elif isinstance(ev, T.Realloc):
            old = self._record(ev.name, index)
            self.names[ev.new_name], _ = self.on_realloc(old, ev.size)
        elif isinstance(ev, T.Period):
            self.periodical_free()
        elif isinstance(ev, T.Flush):
            self.flush_all()
        elif isinstance(ev, T.ExpectLive):
            state = self.names[ev.name].state
            if state is State.RELEASED:
                raise TraceError(index, f"expected {ev.name!r} to be resident, it was released")
        elif isinstance(ev, T.ExpectReleased):
            state = self.names[ev.name].state
            if state is not State.RELEASED:
                raise TraceError(index, f"expected {ev.name!r} released, it is {state.value}")
        else:
            raise TypeError(f"not a trace event: {ev!r}")

    def run(self, events):
        for index, ev in enumerate(events):
            try:
                self.step(index, ev)
            except TraceError:
                raise
            except DangSimError as exc:
                raise TraceError(index, f"{type(exc).__name__}: {exc}") from exc
        if self.config.final_flush:
            self.flush_all()
            if self.config.oracle_check:
                self.check_settlement()
        return self.report()

    def check_settlement(self):
        retained = self.reaper.retained()
        expected = self.oracle.still_referenced()
        if retained != expected:
            raise InternalBug(
                f"settlement mismatch: engine retains {sorted(map(hex, retained))}, "
                f"oracle sees references to {sorted(map(hex, expected))}"
            )

    def report(self):
        st = self.stats
        r = self.reaper
        st.n_free_calls = r.n_free_calls
        st.n_released = r.n_released
        st.n_double_free = r.n_double_free
        st.handling = r.n_candidates
        st.n_verify_calls = r.n_verify
        st.n_period_passes = r.n_period_passes
        st.n_audit_failures = r.n_audit_failures
        st.n_retained_at_end = len(r.retained())
        st.oracle_words_scanned = self.oracle.words_scanned
        st.dup_rate = 1 - st.n_logged / st.n_ptr_stores if st.n_ptr_stores else 0.0
        c = self.config
        st.config = {
            "compression": str(c.compression),
            "cache_bits": c.cache_bits,
            "direct_bits": c.direct_bits,
            "hash_bits": c.hash_bits,
            "period_threshold": c.period_threshold,
            "placement": c.placement.value,
            "seed": c.seed,
            "oracle_check": c.oracle_check,
            "final_flush": c.final_flush,
        }
        return st


def run_trace(trace, config: EngineConfig = EngineConfig()):
    """Replay a trace (text or parsed events) and return its StatsReport."""
    events = T.parse(trace) if isinstance(trace, str) else trace
    return Engine(config).run(events)
