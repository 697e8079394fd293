"""Sparse simulated 64-bit address space with a power-of-two heap.

Memory is a map from 8-byte-aligned word addresses to ``SimValue``.  Four
fixed windows exist: a low heap starting at 0x10000 (directly indexed by the
metadata table), a high heap starting at ``2**direct_bits`` (hashed), and
stack and global windows parked above any heap ID.

Objects move Live -> UserFreed -> Released.  A UserFreed object stays mapped
(reads keep returning the last stored value); release unmaps its words and
returns its range to a per-size-class free list.
"""

import enum
import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from dangsim import minfat
from dangsim.errors import AlignmentError, InternalBug, OutOfSimMemory, WildStore

WORD = 8

HEAP_LOW_BASE = 0x10000
HEAP_HIGH_LIMIT = 1 << 46
STACK_BASE = 1 << 46
STACK_SIZE = 1 << 20
GLOBAL_BASE = (1 << 46) + (1 << 21)
GLOBAL_SIZE = 1 << 20
SLOT_LIMIT = STACK_SIZE // WORD


class Kind(enum.Enum):
    POINTER = "ptr"
    DATA = "data"


class SimValue(NamedTuple):
    kind: Kind
    word: int

    @classmethod
    def pointer(cls, word):
        if not minfat.is_pointer(word):
            raise minfat.NotAPointer(f"{word:#x} is not a tagged heap pointer")
        return cls(Kind.POINTER, word)

    @classmethod
    def data(cls, value):
        return cls(Kind.DATA, value & minfat.WORD_MASK)

    @property
    def is_pointer(self):
        return self.kind is Kind.POINTER


class State(enum.Enum):
    LIVE = "live"
    USER_FREED = "user-freed"
    RELEASED = "released"


class Placement(enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(eq=False)
class ObjectRecord:
    id: int
    B: int
    placement: Placement
    state: State = State.LIVE
    log: object = None
    # objects whose release waits on this one (ref_heap_free_list rooted here)
    deferred: list = field(default_factory=list)
    # None, the string "period", or the ObjectRecord this one is deferred on
    listed_on: object = None
    written: set = field(default_factory=set, repr=False)

    @property
    def size(self):
        return 1 << self.B

    @property
    def end(self):
        return self.id + (1 << self.B)

    def __contains__(self, addr):
        return self.id <= addr < self.end


class _Region:
    def __init__(self, name, lo, hi):
        self.name = name
        self.lo = lo
        self.hi = hi
        self.bump = lo
        self.free = {}  # B -> min-heap of released bases

    def take(self, B):
        pool = self.free.get(B)
        if pool:
            return heapq.heappop(pool)
        size = 1 << B
        base = (self.bump + size - 1) & ~(size - 1)
        if base + size > self.hi:
            raise OutOfSimMemory(f"{self.name} heap exhausted for a 2**{B} object")
        self.bump = base + size
        return base

    def give_back(self, base, B):
        heapq.heappush(self.free.setdefault(B, []), base)


class SimSpace:
    def __init__(self, direct_bits=32):
        if not 16 <= direct_bits <= 46:
            raise ValueError(f"direct_bits must lie in [16, 46], got {direct_bits}")
        self.direct_bits = direct_bits
        self.regions = {
            Placement.LOW: _Region("Heap-Low", HEAP_LOW_BASE, 1 << direct_bits),
            Placement.HIGH: _Region("Heap-High", 1 << direct_bits, HEAP_HIGH_LIMIT),
        }
        self.objects = {}  # id -> ObjectRecord, non-Released only
        self._words = {}
        self._exps = Counter()

    # -- allocation -------------------------------------------------------

    def allocate(self, size, placement=Placement.LOW):
        B, _ = minfat.size_class(size)
        base = self.regions[placement].take(B)
        rec = ObjectRecord(base, B, placement)
        if base in self.objects:
            raise InternalBug(f"allocator handed out live base {base:#x}")
        self.objects[base] = rec
        self._exps[B] += 1
        return rec, minfat.encode(base, B)

    def release(self, rec):
        """Unmap ``rec`` and recycle its range."""
        if rec.state is State.RELEASED:
            raise InternalBug(f"object {rec.id:#x} released twice")
        for addr in rec.written:
            del self._words[addr]
        rec.written = set()
        rec.state = State.RELEASED
        del self.objects[rec.id]
        self._exps[rec.B] -= 1
        if not self._exps[rec.B]:
            del self._exps[rec.B]
        self.regions[rec.placement].give_back(rec.id, rec.B)

    # -- classification ---------------------------------------------------

    def container_of(self, addr) -> Optional[ObjectRecord]:
        # objects are aligned to their size: probe each exponent in use
        for b in self._exps:
            rec = self.objects.get(addr & ~((1 << b) - 1))
            if rec is not None and rec.B == b:
                return rec
        return None

    @staticmethod
    def in_fixed_window(addr):
        return (STACK_BASE <= addr < STACK_BASE + STACK_SIZE
                or GLOBAL_BASE <= addr < GLOBAL_BASE + GLOBAL_SIZE)

    def region_of(self, addr):
        if STACK_BASE <= addr < STACK_BASE + STACK_SIZE:
            return "Stack"
        if GLOBAL_BASE <= addr < GLOBAL_BASE + GLOBAL_SIZE:
            return "Global"
        for region in self.regions.values():
            if region.lo <= addr < region.hi:
                return region.name
        return None

    # -- word access ------------------------------------------------------

    def write_word(self, addr, value: SimValue):
        if addr % WORD:
            raise AlignmentError(f"store to unaligned address {addr:#x}")
        if self.in_fixed_window(addr):
            self._words[addr] = value
            return
        rec = self.container_of(addr)
        if rec is None:
            raise WildStore(f"store to unmapped address {addr:#x}")
        self._words[addr] = value
        rec.written.add(addr)

    def read_word(self, addr) -> Optional[SimValue]:
        if addr % WORD:
            raise AlignmentError(f"load from unaligned address {addr:#x}")
        return self._words.get(addr)

    def words_in(self, lo, hi):
        """Yield ``(addr, value)`` for mapped words in ``[lo, hi)``."""
        n = (hi - lo) // WORD
        if n > 64:
            rec = self.container_of(lo)
            if rec is not None and hi <= rec.end and len(rec.written) < n:
                for addr in sorted(rec.written):
                    if lo <= addr < hi:
                        yield addr, self._words[addr]
                return
        words = self._words
        for addr in range(lo, hi, WORD):
            v = words.get(addr)
            if v is not None:
                yield addr, v

    def mapped_words(self):
        return self._words.items()

    @staticmethod
    def stack_addr(k):
        if not 0 <= k < SLOT_LIMIT:
            raise ValueError(f"stack slot {k} out of range")
        return STACK_BASE + WORD * k

    @staticmethod
    def global_addr(k):
        if not 0 <= k < SLOT_LIMIT:
            raise ValueError(f"global slot {k} out of range")
        return GLOBAL_BASE + WORD * k
