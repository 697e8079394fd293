"""MinFat tagged pointers.

A heap pointer is a 64-bit word whose top 6 bits hold ``B``, the log2 of the
(power-of-two) allocation size, and whose low 58 bits hold the plain address.
Allocations are aligned to their size, so clearing the low ``B`` bits of any
interior address yields the object base, which doubles as the object ID.
"""

from typing import NamedTuple

from dangsim.errors import AlignmentError, NotAPointer, SizeOutOfRange

TAG_SHIFT = 58
TAG_BITS = 6
ADDR_MASK = (1 << TAG_SHIFT) - 1
WORD_MASK = (1 << 64) - 1

MIN_EXP = 4
MAX_EXP = 46
MAX_BASE = 1 << 48


class SizeClass(NamedTuple):
    B: int
    alloc_size: int


def size_class(requested: int) -> SizeClass:
    if requested < 1 or requested > (1 << MAX_EXP):
        raise SizeOutOfRange(f"size {requested} outside [1, 2**{MAX_EXP}]")
    # ceil(log2(n)) for n >= 1
    b = max(MIN_EXP, (requested - 1).bit_length())
    return SizeClass(b, 1 << b)


def encode(base: int, B: int) -> int:
    if not MIN_EXP <= B <= MAX_EXP:
        raise SizeOutOfRange(f"exponent {B} outside [{MIN_EXP}, {MAX_EXP}]")
    if base < 0 or base >= MAX_BASE:
        raise AlignmentError(f"base {base:#x} outside the 48-bit address space")
    if base & ((1 << B) - 1):
        raise AlignmentError(f"base {base:#x} not aligned to 2**{B}")
    return (B << TAG_SHIFT) | base


def tag_of(p: int) -> int:
    return (p >> TAG_SHIFT) & ((1 << TAG_BITS) - 1)


def strip(p: int) -> int:
    return p & ADDR_MASK


def is_pointer(p: int) -> bool:
    return tag_of(p) >= MIN_EXP


def id_of(p: int) -> int:
    """Implicit object ID: the address field with its low ``B`` bits cleared."""
    b = tag_of(p)
    if b < MIN_EXP:
        raise NotAPointer(f"word {p:#x} carries tag {b}, not a heap pointer")
    return p & ADDR_MASK & ~((1 << b) - 1)


def with_tag(addr: int, B: int) -> int:
    """Tag an arbitrary (possibly interior) address without alignment checks."""
    return ((B & 0x3F) << TAG_SHIFT) | (addr & ADDR_MASK)
