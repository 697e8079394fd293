import pytest

from dangsim import minfat
from dangsim.engine import Engine, EngineConfig, run_trace
from dangsim.errors import TraceError, WildStore
from dangsim.logstore import FULL, OFF
from dangsim.reaper import Outcome
from dangsim.simspace import SimValue, State


def ptr(rec, off=0):
    return SimValue.pointer(minfat.encode(rec.id, rec.B) + off)


def test_store_pipeline(engine):
    a, _ = engine.allocate(48)
    slot = engine.space.stack_addr(0)
    engine.on_store(slot, ptr(a))
    assert a.log.entry_count == 1
    engine.on_store(slot, ptr(a))
    assert a.log.entry_count == 1
    st = engine.stats
    assert (st.n_ptr_stores, st.n_logged, st.dup_hits, st.searching) == (2, 1, 1, 1)
    engine.on_store(slot, SimValue.data(3))
    assert engine.reaper.verify_object(a) == []
    assert st.n_data_stores == 1


def test_wild_store_propagates(engine):
    with pytest.raises(WildStore):
        engine.on_store(0x123450, SimValue.data(1))


def test_realloc_unreferenced(engine):
    a, _ = engine.allocate(32)
    engine.on_store(a.id, SimValue.data(11))
    engine.on_store(a.id + 24, SimValue.data(12))
    b, _ = engine.on_realloc(a, 64)
    assert a.state is State.RELEASED
    assert engine.space.read_word(b.id) == SimValue.data(11)
    assert engine.space.read_word(b.id + 24) == SimValue.data(12)


def test_realloc_keeps_referenced_old(engine):
    a, _ = engine.allocate(32)
    engine.on_store(engine.space.global_addr(0), ptr(a))
    b, _ = engine.on_realloc(minfat.encode(a.id, a.B), 16)
    assert a.state is State.USER_FREED and b.state is State.LIVE


def test_realloc_tracks_copied_pointers(mode):
    eng = Engine(EngineConfig(compression=mode, oracle_check=True))
    x, _ = eng.allocate(64)
    y, _ = eng.allocate(16)
    a, _ = eng.allocate(64)
    eng.on_store(a.id + 8, ptr(x, 0x18))
    eng.on_store(a.id + 40, ptr(y))
    b, _ = eng.on_realloc(a, 128)
    for target, off in ((x, 8), (y, 40)):
        assert eng.oracle.sweep(target.id).addresses == [b.id + off]
        assert eng.reaper.verify_object(target) == [b.id + off]
    assert eng.on_free(x).outcome is Outcome.DEFERRED_HEAP


def test_loads(engine):
    a, _ = engine.allocate(32)
    engine.on_store(a.id, SimValue.data(9))
    engine.on_store(engine.space.stack_addr(0), ptr(a))
    engine.on_free(a)
    assert engine.on_load(a.id) == SimValue.data(9)
    assert engine.stats.n_uaf_loads == 1


FIG8 = """
alloc obj 16
alloc buf 128
store buf+0x28 obj
store buf+0x40 obj
"""


@pytest.mark.parametrize("mode, dup", [(FULL, 0.5), (OFF, 0.0)])
def test_adjacent_store_dup_rate(mode, dup):
    assert run_trace(FIG8, EngineConfig(compression=mode)).dup_rate == dup


def test_empty_trace():
    report = run_trace("")
    assert all(v == 0 for v in report.counters().values())


def test_expect_failure_reports_index():
    with pytest.raises(TraceError) as info:
        run_trace("alloc a 16\nstore stack:0 a\nfree a\nexpect-released a\n")
    assert info.value.index == 3


def test_use_of_released_name_is_a_trace_error():
    with pytest.raises(TraceError) as info:
        run_trace("alloc a 16\nfree a\nload a+0\n")
    assert info.value.index == 2
    with pytest.raises(TraceError):
        run_trace("alloc a 16\nfree a\nstore stack:0 a\n")


def test_load_expectations():
    run_trace("alloc a 16\nload a+8 absent\nload a+8 null\nstorei a+8 -1\n"
              "load a+8 0xffffffffffffffff\nstore stack:0 a+4\nload stack:0 a+4\n")
    with pytest.raises(TraceError):
        run_trace("alloc a 16\nstorei a+8 1\nload a+8 2\n")
    with pytest.raises(TraceError):
        run_trace("alloc a 16\nalloc b 16\nstore stack:0 a\nload stack:0 b\n")


def test_no_final_flush():
    trace = "alloc a 16\nstore stack:0 a\nfree a\nstorei stack:0 0\n"
    assert run_trace(trace, EngineConfig(final_flush=False)).n_retained_at_end == 1
    assert run_trace(trace).n_retained_at_end == 0


def test_counter_identity_and_stats_text():
    report = run_trace(FIG8 + "store stack:0 obj\nfree obj\nfree obj\n",
                       EngineConfig(compression=FULL))
    assert report.n_ptr_stores == report.n_logged + report.dup_hits
    assert report.searching == report.logging == report.n_logged
    assert report.n_double_free == 1
    text = report.to_text()
    assert "dup_rate=0.33333333333333337\n" in text
    assert "config.compression=full\n" in text
