"""Fully dynamic 0-1 knapsack.

:class:`KnapsackTree` keeps one leaf per item in a complete binary tree.
Each leaf stores the step function "0 below the item's weight, its price
from there on"; each inner node stores the (max,+)-convolution of its
children rounded up to a power of ``1 + delta``.  The root evaluated at the
budget approximates the optimum from above by a factor of at most
``1 + eps``.  Updates touch one leaf and recompute its root path.

:class:`FastKnapsack` groups items into price classes, keeps the lightest
``1/eps`` items of every class in a small :class:`KnapsackTree` and
answers the remaining items with fractional knapsack over density-ordered
trees.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .dpengine import DPTable
from .errors import BadEpsilon, CodomainError, StaleQuery, UnknownItem
from .ordtree import Treap
from .pcf import (
    PCF,
    RoundingConfig,
    Tag,
    ceil_exponent,
    eval_at,
    floor_exponent,
    from_pieces,
    maxplus_convolve,
    round_up_pow,
    witness_argmin,
)


@dataclass(frozen=True)
class Item:
    id: int
    price: float
    weight: float


def _check_eps(eps: float) -> None:
    if not (eps > 0 and math.isfinite(eps)):
        raise BadEpsilon(f"eps must be positive, got {eps}")


def _check_item(price: float, weight: float) -> None:
    if not price >= 1:
        raise CodomainError(f"prices must be at least 1, got {price}")
    if not weight > 0:
        raise CodomainError(f"weights must be positive, got {weight}")


class KnapsackTree:
    """Balanced item tree over ``2**k`` leaf slots.

    ``W`` bounds the total price of the live items (default: the total
    price of the initial items, at least 1).  Node functions live on
    ``[0, t_cap]`` with ``t_cap = B + max(1, heaviest initial weight)``;
    only budgets up to ``B`` are ever queried.  With ``exact=True`` the
    rounding step is skipped and every node is the exact knapsack function
    of its items.
    """

    def __init__(
        self,
        B: float,
        eps: float,
        items: Iterable[tuple[float, float]] = (),
        W: Optional[float] = None,
        exact: bool = False,
        t_cap: Optional[float] = None,
    ):
        _check_eps(eps)
        if not B >= 0:
            raise CodomainError(f"budget must be non-negative, got {B}")
        items = list(items)
        self.B = float(B)
        self.eps = float(eps)
        self.exact = exact
        self.items: dict[int, Item] = {}
        self._next_id = 1
        for p, w in items:
            _check_item(p, w)
            self.items[self._next_id] = Item(self._next_id, float(p), float(w))
            self._next_id += 1
        total = sum(it.price for it in self.items.values())
        self.W = float(W) if W is not None else max(1.0, total)
        if total > self.W:
            raise CodomainError(f"total price {total} exceeds W={self.W}")
        heaviest = max((it.weight for it in self.items.values()), default=1.0)
        self.t_cap = float(t_cap) if t_cap is not None else self.B + max(1.0, heaviest)
        self.rebuilds = 0
        self.last_update_rebuilt = False
        self._build(_slots_for(len(self.items)))

    # structure --------------------------------------------------------
    @property
    def n_slots(self) -> int:
        return self._n

    @property
    def delta(self) -> float:
        return self._cfg.delta

    @property
    def piece_bound(self) -> int:
        return self._cfg.piece_bound

    @property
    def table(self) -> DPTable:
        return self._table

    def _build(self, n: int) -> None:
        self._n = n
        depth = max(1, (n - 1).bit_length())
        self._cfg = RoundingConfig(math.log1p(self.eps) / depth, self.W)
        self._slot_of: dict[int, int] = {}
        self._item_at: list[Optional[int]] = [None] * n
        for k, item_id in enumerate(sorted(self.items)):
            self._slot_of[item_id] = k
            self._item_at[k] = item_id
        self._free = list(range(n - 1, len(self.items) - 1, -1))
        bound = None if self.exact else self._cfg.piece_bound
        t = DPTable(h=depth, alpha=1 + self._cfg.delta, p=bound)
        for k in range(n):
            t.add_row(n + k, (), self._leaf_proc(k), piece_bound=2)
        for u in range(n - 1, 0, -1):
            t.add_row(u, (2 * u, 2 * u + 1), self._merge)
        self._table = t.compute_all()

    def _leaf_proc(self, slot: int):
        def proc(_inputs):
            item_id = self._item_at[slot]
            if item_id is None:
                return (PCF.constant(0.0, 0.0, self.t_cap, Tag.INCREASING), None, None)
            return (self._leaf_function(self.items[item_id]), None, None)

        return proc

    def _leaf_function(self, it: Item) -> PCF:
        if it.weight >= self.t_cap:
            return PCF.constant(0.0, 0.0, self.t_cap, Tag.INCREASING)
        if it.weight <= 0:
            return PCF.constant(it.price, 0.0, self.t_cap, Tag.INCREASING)
        return from_pieces([(it.weight, 0.0), (self.t_cap, it.price)], 0.0, self.t_cap, Tag.INCREASING)

    def _merge(self, inputs):
        left, right = inputs[0][0], inputs[1][0]
        conv, wit = maxplus_convolve(left, right, hi=self.t_cap)
        fn = conv if self.exact else round_up_pow(conv, self._cfg)
        return (fn, conv, wit)

    # queries ----------------------------------------------------------
    @property
    def root(self) -> PCF:
        return self._table[1][0]

    def node_function(self, row: int) -> PCF:
        return self._table[row][0]

    def value(self, budget: Optional[float] = None) -> float:
        return eval_at(self.root, self.B if budget is None else budget)

    def solution(self, budget: Optional[float] = None) -> set[int]:
        """Items of a feasible solution worth at least ``value / (1 + eps)``."""
        x = self.B if budget is None else budget
        chosen: set[int] = set()
        stack = [(1, x)]
        n = self._n
        while stack:
            row, x = stack.pop()
            fn, conv, wit = self._table[row]
            if eval_at(fn, x) <= 0:
                continue
            if row >= n:
                chosen.add(self._item_at[row - n])
                continue
            lf = self._table[2 * row][0]
            rf = self._table[2 * row + 1][0]
            split = witness_argmin(conv, wit, lf, rf, x)
            stack.append((2 * row, split))
            stack.append((2 * row + 1, x - split))
        return chosen

    # updates ----------------------------------------------------------
    def insert(self, price: float, weight: float, item_id: Optional[int] = None) -> int:
        _check_item(price, weight)
        total = sum(it.price for it in self.items.values()) + price
        if total > self.W:
            raise CodomainError(f"total price {total} would exceed W={self.W}")
        if item_id is None:
            item_id = self._next_id
        elif item_id in self.items:
            raise KeyError(f"item {item_id} already present")
        self._next_id = max(self._next_id, item_id + 1)
        self.items[item_id] = Item(item_id, float(price), float(weight))
        if not self._free:
            self.rebuilds += 1
            self.last_update_rebuilt = True
            self._build(2 * self._n)
            return item_id
        self.last_update_rebuilt = False
        slot = self._free.pop()
        self._slot_of[item_id] = slot
        self._item_at[slot] = item_id
        self._table.update_row(self._n + slot)
        return item_id

    def delete(self, item_id: int) -> None:
        if item_id not in self.items:
            raise UnknownItem(item_id)
        del self.items[item_id]
        slot = self._slot_of.pop(item_id)
        self._item_at[slot] = None
        self._free.append(slot)
        if self._n > 1 and len(self.items) < self._n // 2:
            self.rebuilds += 1
            self.last_update_rebuilt = True
            self._build(self._n // 2)
            return
        self.last_update_rebuilt = False
        self._table.update_row(self._n + slot)

    @property
    def last_recomputed(self) -> int:
        return len(self._table.last_recomputed)


def _slots_for(count: int) -> int:
    n = 1
    while n < count:
        n *= 2
    return n


def kn_build(items: Iterable[tuple[float, float]], B: float, eps: float, **kw) -> KnapsackTree:
    return KnapsackTree(B, eps, items, **kw)


def kn_insert(t: KnapsackTree, p: float, w: float) -> KnapsackTree:
    t.insert(p, w)
    return t


def kn_delete(t: KnapsackTree, item_id: int) -> KnapsackTree:
    t.delete(item_id)
    return t


def kn_query_value(t: KnapsackTree) -> float:
    return t.value()


def kn_query_solution(t: KnapsackTree) -> set[int]:
    return t.solution()


# ----------------------------------------------------------------------
# fast variant


class FastKnapsack:
    """Price classes, a small exact-ish core and fractional completion.

    ``eps`` is snapped down to ``1/m`` for an integer ``m``.  Class ``l``
    holds the items priced in ``[(1+eps)^l, (1+eps)^(l+1))``; its ``m``
    lightest items (ties by id) form the core set X, every other item
    goes to Y.  For every class ``l`` a treap keyed by decreasing density
    holds the Y items of classes ``<= l`` with weight and profit sums.
    """

    def __init__(
        self,
        B: float,
        eps: float,
        items: Iterable[tuple[float, float]] = (),
        W: Optional[float] = None,
    ):
        _check_eps(eps)
        self.m = max(1, math.ceil(1.0 / eps - 1e-9))
        self.eps = 1.0 / self.m
        self.base = 1.0 + self.eps
        self.B = float(B)
        items = list(items)
        for p, w in items:
            _check_item(p, w)
        total = sum(p for p, _ in items)
        self.W = float(W) if W is not None else max(1.0, total)
        if total > self.W:
            raise CodomainError(f"total price {total} exceeds W={self.W}")
        self.L = floor_exponent(self.W, self.base)
        heaviest = max((w for _, w in items), default=1.0)
        self.items: dict[int, Item] = {}
        self._class_of: dict[int, int] = {}
        self.classes: dict[int, list[tuple[float, int]]] = {}
        self.X: set[int] = set()
        self._U = [Treap() for _ in range(self.L + 1)]
        self.core = KnapsackTree(self.B, self.eps, (), W=self.W, t_cap=self.B + max(1.0, heaviest))
        self._next_id = 1
        self._fresh = False
        self._answer: Optional[_FastAnswer] = None
        for p, w in items:
            self.insert(p, w)

    # structure --------------------------------------------------------
    @property
    def Y(self) -> set[int]:
        return set(self.items) - self.X

    def _key(self, it: Item):
        return (-(it.price / it.weight), it.id)

    def _to_core(self, item_id: int) -> None:
        it = self.items[item_id]
        for ell in range(self._class_of[item_id], self.L + 1):
            self._U[ell].remove(self._key(it))
        self.X.add(item_id)
        self.core.insert(it.price, it.weight, item_id=item_id)

    def _to_fringe(self, item_id: int) -> None:
        it = self.items[item_id]
        self.core.delete(item_id)
        self.X.discard(item_id)
        self._add_fringe(it)

    def _add_fringe(self, it: Item) -> None:
        for ell in range(self._class_of[it.id], self.L + 1):
            self._U[ell].insert(self._key(it), it.id, weight=it.weight, profit=it.price)

    def insert(self, price: float, weight: float) -> int:
        _check_item(price, weight)
        total = sum(it.price for it in self.items.values()) + price
        if total > self.W:
            raise CodomainError(f"total price {total} would exceed W={self.W}")
        item_id = self._next_id
        self._next_id += 1
        it = Item(item_id, float(price), float(weight))
        self.items[item_id] = it
        ell = floor_exponent(it.price, self.base)
        self._class_of[item_id] = ell
        members = self.classes.setdefault(ell, [])
        pos = bisect.bisect_left(members, (it.weight, item_id))
        members.insert(pos, (it.weight, item_id))
        if pos < self.m:
            if len(members) > self.m:
                self._to_fringe(members[self.m][1])
            self.X.add(item_id)
            self.core.insert(it.price, it.weight, item_id=item_id)
        else:
            self._add_fringe(it)
        self._fresh = False
        return item_id

    def delete(self, item_id: int) -> None:
        if item_id not in self.items:
            raise UnknownItem(item_id)
        it = self.items[item_id]
        ell = self._class_of[item_id]
        members = self.classes[ell]
        pos = bisect.bisect_left(members, (it.weight, item_id))
        del members[pos]
        if item_id in self.X:
            self.X.discard(item_id)
            self.core.delete(item_id)
            if len(members) >= self.m:
                self._to_core(members[self.m - 1][1])
        else:
            for e in range(ell, self.L + 1):
                self._U[e].remove(self._key(it))
        if not members:
            del self.classes[ell]
        del self.items[item_id]
        del self._class_of[item_id]
        self._fresh = False

    # queries ----------------------------------------------------------
    def value(self) -> float:
        root = self.core.root
        best = None
        for start, y in zip(root.starts.tolist(), root.values.tolist()):
            if start > self.B:
                break
            if y > 0:
                ell = min(ceil_exponent(self.eps * y, self.base), self.L)
                _, _, psum, last = self._U[ell].prefix_within(self.B - start)
            else:
                ell, psum, last = -1, 0.0, None
            total = y + psum
            if best is None or total > best.value:
                best = _FastAnswer(total, start, y, ell, last, psum)
        assert best is not None
        best.core_items = frozenset(self.core.solution(best.core_budget)) if best.core_value > 0 else frozenset()
        self._answer = best
        self._fresh = True
        return best.value

    def _require_fresh(self) -> "_FastAnswer":
        if not self._fresh or self._answer is None:
            raise StaleQuery("run a value query after the last update")
        return self._answer

    def solution(self) -> set[int]:
        ans = self._require_fresh()
        out = set(ans.core_items)
        if ans.last_key is not None:
            for key, item_id in self._U[ans.fringe_class].items():
                if key > ans.last_key:
                    break
                out.add(item_id)
        return out

    def contains(self, item_id: int) -> bool:
        ans = self._require_fresh()
        if item_id not in self.items:
            return False
        if item_id in self.X:
            return item_id in ans.core_items
        if ans.last_key is None or self._class_of[item_id] > ans.fringe_class:
            return False
        return self._key(self.items[item_id]) <= ans.last_key

    def fringe_value(self) -> float:
        return self._require_fresh().fringe_value


@dataclass
class _FastAnswer:
    value: float
    core_budget: float
    core_value: float
    fringe_class: int
    last_key: object
    fringe_value: float
    core_items: frozenset = frozenset()


def fast_update(s: FastKnapsack, op: str, *args) -> FastKnapsack:
    if op == "insert":
        s.insert(*args)
    elif op == "delete":
        s.delete(*args)
    else:
        raise ValueError(f"unknown operation {op!r}")
    return s


def fast_query_value(s: FastKnapsack) -> float:
    return s.value()


def fast_query_solution(s: FastKnapsack) -> set[int]:
    return s.solution()


def fast_query_membership(s: FastKnapsack, item_id: int) -> bool:
    return s.contains(item_id)
