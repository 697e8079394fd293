"""Per-object(-group) logs of dangling-pointer candidate locations.

A log is append-only while any of its owners is unreleased.  Hash-colliding
objects share a single log, counted by ``nums``; verification re-reads memory
and compares IDs, so sharing never causes an object to be retained for a
location that actually points elsewhere.

Entries carry one of three key kinds matching the compression mode in force
when they were written: a raw word address, a block-aligned key standing for
a run of words, or the ID of the heap object containing the location.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple

from dangsim.errors import AccountingBug, UseAfterRelease
from dangsim.simspace import WORD, SimSpace


class EntryKind(enum.Enum):
    RAW = "raw"
    BLOCK = "block"
    CONTAINER = "container"


class LogEntry(NamedTuple):
    kind: EntryKind
    key: int


@dataclass(frozen=True)
class CompressionMode:
    """``off``, ``block:<words>`` or ``full``.

    ``block_words`` is 0 for off, the block length in words for block mode,
    and None for full (whole-container) compression.
    """

    block_words: int | None = 0

    @classmethod
    def parse(cls, text):
        text = text.strip().lower()
        if text == "off":
            return cls(0)
        if text == "full":
            return cls(None)
        if text.startswith("block:"):
            try:
                words = int(text[len("block:"):], 0)
            except ValueError:
                raise ValueError(f"bad block size in compression mode {text!r}") from None
            return cls.block(words)
        raise ValueError(f"unknown compression mode {text!r}")

    @classmethod
    def block(cls, words):
        if words < 1 or words & (words - 1):
            raise ValueError(f"block size must be a power of two words, got {words}")
        return cls(words)

    @property
    def is_off(self):
        return self.block_words == 0

    @property
    def is_full(self):
        return self.block_words is None

    @property
    def block_bytes(self):
        return WORD * self.block_words if self.block_words else 0

    @property
    def entry_kind(self):
        if self.is_full:
            return EntryKind.CONTAINER
        return EntryKind.RAW if self.is_off else EntryKind.BLOCK

    def __str__(self):
        if self.is_full:
            return "full"
        return "off" if self.is_off else f"block:{self.block_words}"


OFF = CompressionMode(0)
FULL = CompressionMode(None)


class LogHandle:
    __slots__ = ("nums", "lanes", "lane", "released")

    def __init__(self, lanes=1):
        self.nums = 1
        self.lanes = [[] for _ in range(lanes)]
        self.lane = 0
        self.released = False

    @property
    def entry_count(self):
        return sum(len(lane) for lane in self.lanes)

    def entries(self):
        for lane in self.lanes:
            yield from lane

    def __repr__(self):
        state = "released" if self.released else f"nums={self.nums}"
        return f"<LogHandle {state} entries={self.entry_count}>"


def append(log: LogHandle, entry: LogEntry):
    if log.released:
        raise UseAfterRelease(f"append {entry} to a released log")
    log.lanes[log.lane].append(entry)


def expand(entry: LogEntry, mode: CompressionMode, space: SimSpace):
    """Word addresses an entry may stand for, as a ``range``.

    ``mode`` supplies the block length for block keys; the other kinds are
    self-describing.
    """
    kind, key = entry
    if kind is EntryKind.RAW:
        return range(key, key + WORD, WORD)
    if kind is EntryKind.BLOCK:
        return range(key, key + mode.block_bytes, WORD)
    if space.in_fixed_window(key):
        # stack/global locations have no container and are logged raw
        return range(key, key + WORD, WORD)
    rec = space.objects.get(key)
    if rec is None:
        return range(0)
    return range(rec.id, rec.end, WORD)


def release(log: LogHandle):
    if log.nums:
        raise AccountingBug(f"releasing log still owned by {log.nums} object(s)")
    if log.released:
        raise UseAfterRelease("log released twice")
    log.lanes = []
    log.released = True
