import pytest
from hypothesis import given, settings, strategies as st

from dangsim import traceio as T
from dangsim.corpus import cwe416_corpus
from dangsim.engine import EngineConfig, run_trace
from dangsim.errors import ParseError
from dangsim.logstore import FULL, OFF


def test_parse_basic():
    events = T.parse("alloc a 48\nstore stack:0 a\nfree a\nflush\nexpect-live a")
    assert events == [
        T.Alloc("a", 48), T.Store(T.Loc("stack", None, 0), T.PtrExpr("a")),
        T.Free(T.PtrExpr("a")), T.Flush(), T.ExpectLive("a"),
    ]


def test_parse_storei_and_comments():
    events = T.parse("# header\nalloc a 16 high  # trailing\n\nstorei a+8 42\n")
    assert events == [T.Alloc("a", 16, True), T.StoreData(T.Loc("heap", "a", 8), 42)]


@pytest.mark.parametrize("text, line, col", [
    ("store stack:0 b", 1, 15),
    ("alloc a 16\nstore a+4 a", 2, 7),
    ("alloc a 16\nstore a+16 a", 2, 7),
    ("alloc a 16\nalloc a 32", 2, 7),
    ("alloc a 0", 1, 9),
    ("bogus", 1, 1),
    ("alloc a 16\nstore stack:131072 a", 2, 7),
    ("alloc a 16\nfree null", 2, 6),
    ("alloc a 16 low", 1, 12),
    ("period now", 1, None),
])
def test_parse_errors(text, line, col):
    with pytest.raises(ParseError) as info:
        T.parse(text)
    assert info.value.line == line
    assert info.value.column == col


def test_realloc_defines_name():
    events = T.parse("alloc a 16\nrealloc a b 100\nstore b+0x60 a\n")
    assert events[1] == T.Realloc("a", "b", 100)
    with pytest.raises(ParseError):
        T.parse("alloc a 16\nrealloc a b 16\nstore b+0x10 a\n")


def test_corpus_roundtrip():
    for text in cwe416_corpus().values():
        events = T.parse(text)
        assert T.parse(T.render(events)) == events


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(T.PATTERNS))
def test_generated_roundtrip(seed, pattern):
    text = T.generate(T.WorkloadSpec(pattern, 12, 60, seed))
    events = T.parse(text)
    assert T.parse(T.render(events)) == events
    assert text == T.generate(T.WorkloadSpec(pattern, 12, 60, seed))


def test_workload_spec_validation():
    with pytest.raises(ValueError):
        T.WorkloadSpec("io-bound", 1, 1)
    with pytest.raises(ValueError):
        T.WorkloadSpec("mixed", 0, 1)


@pytest.mark.parametrize("pattern", T.PATTERNS)
def test_tiny_workloads_run(pattern):
    run_trace(T.generate(T.WorkloadSpec(pattern, 1, 1, 0)), EngineConfig(oracle_check=True))


def test_compression_separates_workloads():
    mem = T.generate(T.WorkloadSpec("mem-intensive", 8, 20000, 1))
    full = run_trace(mem, EngineConfig(compression=FULL)).dup_rate
    off = run_trace(mem, EngineConfig(compression=OFF)).dup_rate
    assert full > off
    comp = T.generate(T.WorkloadSpec("compute-intensive", 500, 5000, 1))
    full = run_trace(comp, EngineConfig(compression=FULL)).dup_rate
    off = run_trace(comp, EngineConfig(compression=OFF)).dup_rate
    assert abs(full - off) < 0.05


def test_corpus_shape():
    corpus = cwe416_corpus()
    assert len(corpus) >= 32
    for name, text in corpus.items():
        last = T.parse(text)[-1]
        assert isinstance(last, (T.ExpectLive, T.ExpectReleased)), name
        if name.endswith("_high"):
            assert all(ev.high for ev in T.parse(text) if isinstance(ev, T.Alloc))
