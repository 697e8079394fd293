import pytest

from dangsim.addrtable import PAGE_BITS, AddressTable
from dangsim.errors import AccountingBug, DuplicateID

# colliding high IDs, found by brute-force search from 2**32 in steps of 16
COLLIDE_8 = (0x1_0000_0000, 0x1_0000_0900)
COLLIDE_20 = (0x1_0000_0000, 0x1_0148_ADD0)


def test_direct_register_lookup_unregister():
    t = AddressTable(32, 20, seed=1)
    log, shared = t.register(0x10000)
    assert t.slot_of(0x10000) == 0x1000
    assert not shared and log.nums == 1
    assert t.lookup(0x10000) is log
    assert t.lookup(0x10010) is None
    assert t.unregister(0x10000) is True
    assert log.released
    assert t.lookup(0x10000) is None


def test_direct_duplicate():
    t = AddressTable()
    t.register(0x10000)
    with pytest.raises(DuplicateID):
        t.register(0x10000)


@pytest.mark.parametrize("bits, pair", [(8, COLLIDE_8), (20, COLLIDE_20)])
def test_frozen_collisions_match_brute_force(bits, pair):
    t = AddressTable(32, bits)
    a, b = pair
    assert t.slot_of(a) == t.slot_of(b)
    assert all(t.slot_of(c) != t.slot_of(a) for c in range(a + 16, b, 16))


def test_hash_sharing_lifecycle():
    t = AddressTable(32, 20, program_sign=0x5A)
    a, b = COLLIDE_20
    log_a, shared_a = t.register(a)
    log_b, shared_b = t.register(b)
    assert not shared_a and shared_b
    assert log_a is log_b and log_a.nums == 2
    assert t.lookup(b) is log_a
    assert t.entry(a).sign == 0x5A
    assert t.unregister(a) is False
    assert log_a.nums == 1 and not log_a.released
    assert t.unregister(b) is True
    assert t.entry(a).sign == 0
    assert log_a.released
    assert t.lookup(a) is None


def test_distinct_hash_slots_do_not_share():
    t = AddressTable(32, 20)
    _, s1 = t.register(1 << 32)
    _, s2 = t.register((1 << 32) + 16)
    assert not s1 and not s2


def test_unregister_unknown():
    t = AddressTable()
    with pytest.raises(AccountingBug):
        t.unregister(0x10000)
    with pytest.raises(AccountingBug):
        t.unregister(1 << 33)


def test_program_sign_is_seeded_and_nonzero():
    signs = {AddressTable(seed=s).program_sign for s in range(200)}
    assert 0 not in signs and len(signs) > 1
    assert AddressTable(seed=7).program_sign == AddressTable(seed=7).program_sign


def test_direct_pages_materialize_lazily():
    t = AddressTable(40, 20)
    ids = [0x10000 + (k << 24) for k in range(50)]
    for i in ids:
        t.register(i)
    assert len(t.direct.pages) <= len(ids)
    assert t.direct.length == 1 << 36
    assert len(t.direct.pages) * (1 << PAGE_BITS) < t.direct.length


def test_nums_matches_enumeration():
    t = AddressTable(32, 8)
    ids = [(1 << 32) + 16 * k for k in range(600)]
    for i in ids:
        t.register(i)
    for i in ids[::3]:
        t.unregister(i)
    alive = [i for k, i in enumerate(ids) if k % 3]
    per_slot = {}
    for i in alive:
        per_slot[t.slot_of(i)] = per_slot.get(t.slot_of(i), 0) + 1
    for slot, count in per_slot.items():
        assert t.hashed[slot].log.nums == count


@pytest.mark.parametrize("kw", [dict(direct_bits=15), dict(direct_bits=47),
                                dict(hash_bits=7), dict(hash_bits=31),
                                dict(program_sign=256)])
def test_config_bounds(kw):
    with pytest.raises(ValueError):
        AddressTable(**kw)
