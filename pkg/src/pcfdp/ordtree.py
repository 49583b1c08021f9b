"""A small treap keyed by unique comparable keys.

Every node carries an optional ``weight`` and ``profit`` and the tree keeps
subtree sums of both, which lets callers find the longest key-ordered prefix
whose total weight fits a budget in logarithmic expected time.
"""

from __future__ import annotations

import random
from typing import Any, Iterator, Optional


class _Node:
    __slots__ = ("key", "val", "prio", "left", "right", "weight", "profit", "wsum", "psum", "size")

    def __init__(self, key, val, prio: float, weight: float, profit: float):
        self.key = key
        self.val = val
        self.prio = prio
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None
        self.weight = weight
        self.profit = profit
        self.wsum = weight
        self.psum = profit
        self.size = 1


def _pull(n: _Node) -> None:
    w, p, s = n.weight, n.profit, 1
    if n.left is not None:
        w += n.left.wsum
        p += n.left.psum
        s += n.left.size
    if n.right is not None:
        w += n.right.wsum
        p += n.right.psum
        s += n.right.size
    n.wsum, n.psum, n.size = w, p, s


def _split(n: Optional[_Node], key) -> tuple[Optional[_Node], Optional[_Node]]:
    """Split into (keys < key, keys >= key)."""
    if n is None:
        return None, None
    if n.key < key:
        a, b = _split(n.right, key)
        n.right = a
        _pull(n)
        return n, b
    a, b = _split(n.left, key)
    n.left = b
    _pull(n)
    return a, n


def _merge(a: Optional[_Node], b: Optional[_Node]) -> Optional[_Node]:
    if a is None:
        return b
    if b is None:
        return a
    if a.prio > b.prio:
        a.right = _merge(a.right, b)
        _pull(a)
        return a
    b.left = _merge(a, b.left)
    _pull(b)
    return b


class Treap:
    """Ordered map with subtree weight/profit aggregates.

    Priorities come from a private seeded generator so that two runs over
    the same operation sequence build identical trees.
    """

    def __init__(self, seed: int = 0x5EED):
        self._root: Optional[_Node] = None
        self._rng = random.Random(seed)

    def __len__(self) -> int:
        return 0 if self._root is None else self._root.size

    def __bool__(self) -> bool:
        return self._root is not None

    def __contains__(self, key) -> bool:
        return self._find(key) is not None

    @property
    def total_weight(self) -> float:
        return 0.0 if self._root is None else self._root.wsum

    @property
    def total_profit(self) -> float:
        return 0.0 if self._root is None else self._root.psum

    def _find(self, key) -> Optional[_Node]:
        n = self._root
        while n is not None:
            if key == n.key:
                return n
            n = n.left if key < n.key else n.right
        return None

    def get(self, key, default=None):
        n = self._find(key)
        return default if n is None else n.val

    def insert(self, key, val: Any = None, weight: float = 0.0, profit: float = 0.0) -> None:
        if self._find(key) is not None:
            raise KeyError(f"duplicate key {key!r}")
        node = _Node(key, val, self._rng.random(), weight, profit)
        a, b = _split(self._root, key)
        self._root = _merge(_merge(a, node), b)

    def remove(self, key) -> Any:
        a, b = _split(self._root, key)
        if b is None:
            self._root = a
            raise KeyError(key)
        # the leftmost node of b is the only candidate equal to key
        first = b
        while first.left is not None:
            first = first.left
        if first.key != key:
            self._root = _merge(a, b)
            raise KeyError(key)
        b = self._drop_leftmost(b)
        self._root = _merge(a, b)
        return first.val

    @staticmethod
    def _drop_leftmost(n: _Node) -> Optional[_Node]:
        if n.left is None:
            return n.right
        n.left = Treap._drop_leftmost(n.left)
        _pull(n)
        return n

    def ceiling(self, key) -> Optional[tuple[Any, Any]]:
        """Smallest (key, val) with stored key >= ``key``."""
        best = None
        n = self._root
        while n is not None:
            if n.key >= key:
                best = n
                n = n.left
            else:
                n = n.right
        return None if best is None else (best.key, best.val)

    def higher(self, key) -> Optional[tuple[Any, Any]]:
        """Smallest (key, val) with stored key > ``key``."""
        best = None
        n = self._root
        while n is not None:
            if n.key > key:
                best = n
                n = n.left
            else:
                n = n.right
        return None if best is None else (best.key, best.val)

    def items(self) -> Iterator[tuple[Any, Any]]:
        stack: list[_Node] = []
        n = self._root
        while stack or n is not None:
            while n is not None:
                stack.append(n)
                n = n.left
            n = stack.pop()
            yield n.key, n.val
            n = n.right

    def prefix_within(self, budget: float) -> tuple[int, float, float, Any]:
        """Longest key-ordered prefix whose weights sum to at most ``budget``.

        Returns ``(count, weight, profit, last_key)``; ``last_key`` is None
        for an empty prefix.
        """
        count, wacc, pacc, last = 0, 0.0, 0.0, None
        n = self._root
        while n is not None:
            lw = n.left.wsum if n.left is not None else 0.0
            if wacc + lw > budget:
                n = n.left
                continue
            if wacc + lw + n.weight > budget:
                # the whole left subtree fits, this node does not
                if n.left is not None:
                    count += n.left.size
                    wacc += lw
                    pacc += n.left.psum
                    last = self._max_key(n.left)
                break
            if n.left is not None:
                count += n.left.size
                pacc += n.left.psum
            count += 1
            wacc += lw + n.weight
            pacc += n.profit
            last = n.key
            n = n.right
        return count, wacc, pacc, last

    @staticmethod
    def _max_key(n: _Node):
        while n.right is not None:
            n = n.right
        return n.key
