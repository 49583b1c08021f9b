"""A set of pairwise disjoint closed intervals kept in a balanced tree.

Intervals are keyed by their upper end, which makes "the stored interval
with the smallest upper end at or above z" a single ceiling search.
Inserting an interval absorbs every stored interval it overlaps or
touches, so the set always describes the union of everything inserted.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .errors import EmptyInterval
from .ordtree import Treap


class NOISet:
    def __init__(self) -> None:
        self._tree = Treap()  # key: upper end b, value: lower end a

    def __len__(self) -> int:
        return len(self._tree)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        for b, a in self._tree.items():
            yield a, b

    def closest_larger(self, z: float, strict: bool = False) -> Optional[tuple[float, float]]:
        """Stored ``(a, b)`` with the smallest ``b >= z`` (``b > z`` if strict)."""
        hit = self._tree.higher(z) if strict else self._tree.ceiling(z)
        if hit is None:
            return None
        b, a = hit
        return a, b

    def insert(self, a: float, b: float) -> None:
        if not a < b:
            raise EmptyInterval(f"[{a}, {b}] is empty")
        while True:
            hit = self._tree.ceiling(a)
            if hit is None or hit[1] > b:
                break
            hb, ha = hit
            self._tree.remove(hb)
            a = min(a, ha)
            b = max(b, hb)
        self._tree.insert(b, a)

    def contains(self, x: float) -> bool:
        hit = self._tree.ceiling(x)
        return hit is not None and hit[1] <= x

    def covers(self, lo: float, hi: float) -> bool:
        """Whether a single stored interval contains all of ``[lo, hi]``."""
        hit = self._tree.ceiling(hi)
        return hit is not None and hit[1] <= lo


def noi_closest_larger(s: NOISet, z: float) -> tuple[float, float, bool]:
    hit = s.closest_larger(z)
    if hit is None:
        return 0.0, 0.0, False
    return hit[0], hit[1], True


def noi_insert(s: NOISet, a: float, b: float) -> NOISet:
    s.insert(a, b)
    return s
