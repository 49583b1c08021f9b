import random

import pytest

from pcfdp.errors import EmptyInterval
from pcfdp.noi import NOISet, noi_closest_larger, noi_insert


def naive_closest(intervals, z):
    cands = [(b, a) for a, b in intervals if b >= z]
    return None if not cands else (min(cands)[1], min(cands)[0])


def build(*ivs):
    s = NOISet()
    for a, b in ivs:
        noi_insert(s, a, b)
    return s


def test_empty_set_finds_nothing():
    assert noi_closest_larger(NOISet(), 3.0)[2] is False


def test_closest_larger_examples():
    s = build((1, 2), (5, 7))
    assert noi_closest_larger(s, 3) == (5, 7, True)
    assert noi_closest_larger(s, 1.5) == (1, 2, True)
    assert noi_closest_larger(s, 8)[2] is False


def test_disjoint_inserts_stay_apart():
    assert list(build((1, 2), (3, 4))) == [(1, 2), (3, 4)]


def test_overlapping_inserts_merge():
    assert list(build((1, 3), (2, 5))) == [(1, 5)]
    assert list(build((4, 6), (1, 2), (0, 10))) == [(0, 10)]


def test_touching_inserts_merge():
    assert list(build((1, 2), (2, 3))) == [(1, 3)]


def test_empty_interval_rejected():
    with pytest.raises(EmptyInterval):
        NOISet().insert(2, 2)


def test_covers():
    s = build((1, 3), (5, 8))
    assert s.covers(5.5, 8) and not s.covers(2, 6)


def test_random_inserts_against_naive_union():
    rng = random.Random(7)
    s, raw = NOISet(), []
    for _ in range(2000):
        a = rng.uniform(0, 1000)
        b = a + rng.uniform(0.01, 5)
        s.insert(a, b)
        raw.append((a, b))
    stored = list(s)
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(stored, stored[1:]))
    for _ in range(500):
        z = rng.uniform(-5, 1010)
        assert s.contains(z) == any(a <= z <= b for a, b in raw)
        assert s.closest_larger(z) == naive_closest(stored, z)
