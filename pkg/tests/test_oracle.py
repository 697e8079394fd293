import pytest

from dangsim import minfat
from dangsim.engine import Engine, EngineConfig
from dangsim.errors import PrematureFree
from dangsim.simspace import SimValue


def ptr(rec):
    return SimValue.pointer(minfat.encode(rec.id, rec.B))


def test_sweep(engine):
    a, _ = engine.allocate(32)
    g = engine.space.global_addr(7)
    engine.on_store(g, ptr(a))
    assert engine.oracle.sweep(a.id).addresses == [g]
    engine.on_store(g, SimValue.data(0))
    assert engine.oracle.sweep(a.id).addresses == []


def test_sweep_skips_released_words(engine):
    a, _ = engine.allocate(32)
    h, _ = engine.allocate(64)
    engine.on_store(h.id + 8, ptr(a))
    engine.on_free(h)
    assert engine.oracle.sweep(a.id).addresses == []


def test_check_release_is_idempotent(engine):
    a, _ = engine.allocate(32)
    assert engine.oracle.check_release(a.id) is True
    engine.on_store(engine.space.stack_addr(0), ptr(a))
    assert engine.oracle.check_release(a.id) is False
    assert engine.oracle.check_release(a.id) is False


def test_skipped_append_is_caught(monkeypatch):
    eng = Engine(EngineConfig(oracle_check=True))
    a, _ = eng.allocate(32)
    import dangsim.engine
    monkeypatch.setattr(dangsim.engine.logstore, "append", lambda log, entry: None)
    eng.on_store(eng.space.stack_addr(0), ptr(a))
    with pytest.raises(PrematureFree) as info:
        eng.on_free(a)
    assert info.value.refs == [eng.space.stack_addr(0)]
    assert eng.oracle.failures == [a.id]


def test_verify_is_subset_of_sweep_and_equal(engine, mode):
    eng = Engine(EngineConfig(compression=mode))
    objs = [eng.allocate(size)[0] for size in (16, 64, 256, 16, 1024)]
    locs = [eng.space.stack_addr(3), eng.space.global_addr(1)] + [
        o.id + off for o in objs[1:3] for off in range(0, o.size, 24) if off % 8 == 0]
    for k, loc in enumerate(locs):
        eng.on_store(loc, ptr(objs[k % len(objs)]))
    eng.on_store(locs[0], SimValue.data(0))
    for o in objs:
        got = eng.reaper.verify_object(o)
        assert set(got) == set(eng.oracle.sweep(o.id).addresses)
