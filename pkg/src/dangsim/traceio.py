"""Text trace format, parser, renderer and synthetic workload generators.

One event per line, ``#`` starts a comment::

    alloc NAME SIZE [high]
    store LOC PTREXPR          # pointer store; PTREXPR ::= NAME[+OFF] | null
    storei LOC INT             # non-pointer store
    load LOC [EXPECTED]        # EXPECTED ::= INT | PTREXPR | null | absent
    free PTREXPR
    realloc NAME NAME2 SIZE    # NAME2 = realloc(NAME, SIZE)
    period
    flush
    expect-live NAME
    expect-released NAME

``LOC ::= stack:K | global:K | NAME[+OFF]``.  Offsets are byte offsets in
decimal or hex; location offsets must be 8-aligned.
"""

import random
import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

from dangsim import minfat
from dangsim.errors import ParseError
from dangsim.simspace import SLOT_LIMIT, WORD


class Loc(NamedTuple):
    area: str  # "stack", "global" or "heap"
    name: Optional[str]
    offset: int

    def render(self):
        if self.area == "heap":
            return _ptr_text(self.name, self.offset, force_offset=True)
        return f"{self.area}:{self.offset}"


class PtrExpr(NamedTuple):
    name: str
    offset: int = 0

    def render(self):
        return _ptr_text(self.name, self.offset)


def _ptr_text(name, offset, force_offset=False):
    if offset or force_offset:
        return f"{name}+{offset:#x}"
    return name


ABSENT = "absent"


@dataclass(frozen=True)
class Alloc:
    name: str
    size: int
    high: bool = False


@dataclass(frozen=True)
class Store:
    loc: Loc
    ptr: Optional[PtrExpr]  # None stores null


@dataclass(frozen=True)
class StoreData:
    loc: Loc
    value: int


@dataclass(frozen=True)
class Load:
    loc: Loc
    # None: no check; int; PtrExpr; ABSENT
    expected: Union[None, int, PtrExpr, str] = None


@dataclass(frozen=True)
class Free:
    ptr: PtrExpr


@dataclass(frozen=True)
class Realloc:
    name: str
    new_name: str
    size: int


@dataclass(frozen=True)
class Period:
    pass


@dataclass(frozen=True)
class Flush:
    pass


@dataclass(frozen=True)
class ExpectLive:
    name: str


@dataclass(frozen=True)
class ExpectReleased:
    name: str


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_TOKEN = re.compile(r"\S+")


class _Parser:
    def __init__(self):
        self.sizes = {}
        self.line = 0
        self.tokens = []

    def fail(self, msg, tok_index=None):
        col = None
        if tok_index is not None and tok_index < len(self.tokens):
            col = self.tokens[tok_index].start() + 1
        raise ParseError(msg, self.line, col)

    def text(self, i):
        return self.tokens[i].group()

    def int_at(self, i, what):
        try:
            return int(self.text(i), 0)
        except ValueError:
            self.fail(f"expected {what}, got {self.text(i)!r}", i)

    def new_name(self, i):
        name = self.text(i)
        if not _NAME.match(name) or name in ("null", ABSENT):
            self.fail(f"bad object name {name!r}", i)
        if name in self.sizes:
            self.fail(f"object {name!r} already defined", i)
        return name

    def size_at(self, i):
        size = self.int_at(i, "a size")
        try:
            return size, minfat.size_class(size).alloc_size
        except minfat.SizeOutOfRange as exc:
            self.fail(str(exc), i)

    def name_offset(self, i):
        tok = self.text(i)
        name, plus, off = tok.partition("+")
        if name not in self.sizes:
            if not _NAME.match(name):
                self.fail(f"malformed reference {tok!r}", i)
            self.fail(f"unknown object {name!r}", i)
        offset = 0
        if plus:
            try:
                offset = int(off, 0)
            except ValueError:
                self.fail(f"bad offset in {tok!r}", i)
        if not 0 <= offset < self.sizes[name]:
            self.fail(f"offset {offset:#x} outside {name!r} ({self.sizes[name]} bytes)", i)
        return name, offset

    def loc(self, i):
        tok = self.text(i)
        area, colon, k = tok.partition(":")
        if colon and area in ("stack", "global"):
            try:
                slot = int(k, 0)
            except ValueError:
                self.fail(f"bad slot in {tok!r}", i)
            if not 0 <= slot < SLOT_LIMIT:
                self.fail(f"slot {slot} outside [0, {SLOT_LIMIT})", i)
            return Loc(area, None, slot)
        name, offset = self.name_offset(i)
        if offset % WORD:
            self.fail(f"location offset {offset:#x} is not 8-aligned", i)
        return Loc("heap", name, offset)

    def ptr(self, i):
        if self.text(i) == "null":
            return None
        return PtrExpr(*self.name_offset(i))

    def expected(self, i):
        tok = self.text(i)
        if tok == ABSENT:
            return ABSENT
        if tok == "null":
            return 0
        if tok[0].isdigit() or tok[0] == "-":
            return self.int_at(i, "a value")
        return PtrExpr(*self.name_offset(i))

    def arity(self, lo, hi=None):
        n = len(self.tokens) - 1
        hi = lo if hi is None else hi
        if not lo <= n <= hi:
            want = str(lo) if lo == hi else f"{lo}-{hi}"
            self.fail(f"{self.text(0)!r} takes {want} operand(s), got {n}")

    def event(self):
        op = self.text(0)
        if op == "alloc":
            self.arity(2, 3)
            name = self.new_name(1)
            size, alloc_size = self.size_at(2)
            high = False
            if len(self.tokens) == 4:
                if self.text(3) != "high":
                    self.fail(f"expected 'high', got {self.text(3)!r}", 3)
                high = True
            self.sizes[name] = alloc_size
            return Alloc(name, size, high)
        if op == "store":
            self.arity(2)
            return Store(self.loc(1), self.ptr(2))
        if op == "storei":
            self.arity(2)
            return StoreData(self.loc(1), self.int_at(2, "an integer"))
        if op == "load":
            self.arity(1, 2)
            expected = self.expected(2) if len(self.tokens) == 3 else None
            return Load(self.loc(1), expected)
        if op == "free":
            self.arity(1)
            ptr = self.ptr(1)
            if ptr is None:
                self.fail("free of null", 1)
            return Free(ptr)
        if op == "realloc":
            self.arity(3)
            old, _ = self.name_offset(1)
            new = self.new_name(2)
            size, alloc_size = self.size_at(3)
            self.sizes[new] = alloc_size
            return Realloc(old, new, size)
        if op == "period":
            self.arity(0)
            return Period()
        if op == "flush":
            self.arity(0)
            return Flush()
        if op in ("expect-live", "expect-released"):
            self.arity(1)
            name, offset = self.name_offset(1)
            if offset:
                self.fail("expectations take a bare object name", 1)
            return ExpectLive(name) if op == "expect-live" else ExpectReleased(name)
        self.fail(f"unknown event {op!r}", 0)

    def parse(self, text):
        events = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            self.line = lineno
            self.tokens = list(_TOKEN.finditer(raw.split("#", 1)[0]))
            if self.tokens:
                events.append(self.event())
        return events


def parse(text):
    return _Parser().parse(text)


def render_event(ev):
    if isinstance(ev, Alloc):
        return f"alloc {ev.name} {ev.size}" + (" high" if ev.high else "")
    if isinstance(ev, Store):
        return f"store {ev.loc.render()} {ev.ptr.render() if ev.ptr else 'null'}"
    if isinstance(ev, StoreData):
        return f"storei {ev.loc.render()} {ev.value}"
    if isinstance(ev, Load):
        if ev.expected is None:
            return f"load {ev.loc.render()}"
        exp = ev.expected.render() if isinstance(ev.expected, PtrExpr) else ev.expected
        return f"load {ev.loc.render()} {exp}"
    if isinstance(ev, Free):
        return f"free {ev.ptr.render()}"
    if isinstance(ev, Realloc):
        return f"realloc {ev.name} {ev.new_name} {ev.size}"
    if isinstance(ev, Period):
        return "period"
    if isinstance(ev, Flush):
        return "flush"
    if isinstance(ev, ExpectLive):
        return f"expect-live {ev.name}"
    if isinstance(ev, ExpectReleased):
        return f"expect-released {ev.name}"
    raise TypeError(f"not a trace event: {ev!r}")


def render(events):
    return "".join(render_event(ev) + "\n" for ev in events)


# -- synthetic workloads ------------------------------------------------------

PATTERNS = ("compute-intensive", "mem-intensive", "mixed")


@dataclass(frozen=True)
class WorkloadSpec:
    pattern: str
    objects: int
    stores: int
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; pick one of {PATTERNS}")
        if self.objects < 1 or self.stores < 1:
            raise ValueError("objects and stores must both be >= 1")


def generate(spec: WorkloadSpec) -> str:
    rng = random.Random(spec.seed)
    gen = {
        "mem-intensive": _mem_intensive,
        "compute-intensive": _compute_intensive,
        "mixed": _mixed,
    }[spec.pattern]
    header = f"# {spec.pattern} objects={spec.objects} stores={spec.stores} seed={spec.seed}\n"
    return header + render(gen(spec, rng))


MEM_CONTAINER_BYTES = 1 << 16


def _mem_intensive(spec, rng):
    """Few large containers holding many pointers to a small pointee set."""
    n_cont = max(1, spec.objects // 2)
    n_pointee = spec.objects - n_cont
    slots = MEM_CONTAINER_BYTES // WORD
    events = []
    containers = []
    for i in range(n_cont):
        containers.append(f"c{i}")
        events.append(Alloc(f"c{i}", MEM_CONTAINER_BYTES))
    counter = 0
    pointees = []
    for _ in range(n_pointee):
        pointees.append(f"p{counter}")
        events.append(Alloc(f"p{counter}", rng.choice((16, 24, 32, 48))))
        counter += 1
    if not pointees:
        pointees = list(containers)
    # a handful of pointee turnovers spread over the run
    turnover = set(rng.sample(range(1, spec.stores), min(4, spec.stores - 1))) if n_pointee else set()
    for i in range(spec.stores):
        if i in turnover:
            victim = rng.randrange(len(pointees))
            events.append(Free(PtrExpr(pointees[victim])))
            fresh = f"p{counter}"
            counter += 1
            events.append(Alloc(fresh, rng.choice((16, 24, 32, 48))))
            pointees[victim] = fresh
        r = rng.random()
        target = PtrExpr(rng.choice(pointees))
        if r < 0.01:
            events.append(Store(Loc("stack", None, rng.randrange(64)), target))
            continue
        loc = Loc("heap", rng.choice(containers), WORD * rng.randrange(slots))
        if r < 0.04:
            events.append(StoreData(loc, rng.randrange(1 << 16)))
        else:
            events.append(Store(loc, target))
    for name in pointees[: len(pointees) // 2]:
        events.append(Free(PtrExpr(name)))
    events.append(Free(PtrExpr(containers[0])))
    events.append(Period())
    return events


def _compute_intensive(spec, rng):
    """Many small objects; every pointer goes once to its own stack/global slot."""
    events = []
    live = []
    next_slot = 0
    allocated = 0
    used = []  # slots holding pointers, oldest first
    for i in range(spec.stores):
        while allocated < spec.objects and allocated * spec.stores <= i * spec.objects:
            name = f"o{allocated}"
            events.append(Alloc(name, rng.choice((8, 16, 24, 32, 40, 64))))
            live.append(name)
            allocated += 1
        if not live:
            name = f"o{allocated}"
            events.append(Alloc(name, 16))
            live.append(name)
            allocated += 1
        area = "stack" if next_slot % 2 == 0 else "global"
        slot = (next_slot // 2) % SLOT_LIMIT
        next_slot += 1
        loc = Loc(area, None, slot)
        events.append(Store(loc, PtrExpr(rng.choice(live))))
        used.append(loc)
        if len(used) > 32 and rng.random() < 0.5:
            # the oldest locals die
            events.append(StoreData(used.pop(0), 0))
        if len(live) > 8 and rng.random() < 0.2:
            victim = live.pop(rng.randrange(len(live) - 4))
            events.append(Free(PtrExpr(victim)))
    for name in live[: len(live) // 2]:
        events.append(Free(PtrExpr(name)))
    return events


def _mixed(spec, rng):
    """Random mix of every event kind over both heap regions."""
    events = []
    sizes = {}
    live = []
    freed = []
    counter = 0

    def new_name():
        nonlocal counter
        counter += 1
        return f"m{counter - 1}"

    def alloc():
        name = new_name()
        size = rng.choice((1, 8, 16, 24, 40, 64, 100, 128, 256, 1000))
        events.append(Alloc(name, size, rng.random() < 0.4))
        sizes[name] = minfat.size_class(size).alloc_size
        live.append(name)

    def any_loc():
        r = rng.random()
        if r < 0.25 or not live:
            return Loc("stack", None, rng.randrange(16))
        if r < 0.4:
            return Loc("global", None, rng.randrange(16))
        name = rng.choice(live)
        return Loc("heap", name, WORD * rng.randrange(min(sizes[name] // WORD, 8)))

    def ptr_to_live():
        name = rng.choice(live)
        off = rng.randrange(sizes[name]) if rng.random() < 0.3 else 0
        return PtrExpr(name, off)

    for _ in range(min(2, spec.objects)):
        alloc()
    for _ in range(spec.stores):
        r = rng.random()
        if not live or (r < 0.12 and counter < spec.objects):
            alloc()
        elif r < 0.50:
            events.append(Store(any_loc(), ptr_to_live()))
        elif r < 0.62:
            loc = any_loc()
            if rng.random() < 0.5:
                events.append(StoreData(loc, rng.randrange(1000)))
            else:
                events.append(Store(loc, None))
        elif r < 0.68:
            events.append(Load(any_loc()))
        elif r < 0.84:
            name = live.pop(rng.randrange(len(live)))
            freed.append(name)
            off = rng.randrange(sizes[name]) if rng.random() < 0.2 else 0
            events.append(Free(PtrExpr(name, off)))
        elif r < 0.87 and freed:
            events.append(Free(PtrExpr(rng.choice(freed))))
        elif r < 0.92 and counter < spec.objects:
            old = live.pop(rng.randrange(len(live)))
            new = new_name()
            size = rng.choice((8, 32, 64, 200))
            events.append(Realloc(old, new, size))
            sizes[new] = minfat.size_class(size).alloc_size
            freed.append(old)
            live.append(new)
        elif r < 0.97:
            events.append(Period())
        else:
            events.append(Flush())
    return events
