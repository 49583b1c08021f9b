"""Generic engine for DP tables whose rows are piecewise constant functions.

* :class:`DPTable` keeps a dependency DAG over row ids, one procedure per
  row and a cache of row values.  ``compute_all`` fills the cache in
  topological order; ``update_rows`` recomputes only the rows reachable
  from the changed ones.
* :class:`RootedTreeTopology` is a forest with parent pointers whose
  ``link``/``cut`` operations report, bottom-up, which vertices need their
  rows recomputed (re-rooting a component first when necessary).
* :func:`binarize_tree` replaces every vertex with more than two children
  by a balanced binary gadget whose inner edges have infinite capacity.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

from .errors import (
    CycleDetected,
    HeightBoundExceeded,
    NoSuchEdge,
    NotATree,
    PieceBoundExceeded,
    UnknownRow,
    WouldCreateCycle,
)
from .pcf import PCF

RowId = Hashable
Procedure = Callable[[list], Any]


def piece_count(value: Any) -> int:
    """Largest piece count among the PCFs a row value carries."""
    if isinstance(value, PCF):
        return len(value)
    if isinstance(value, Mapping):
        return max((piece_count(v) for v in value.values()), default=0)
    if isinstance(value, tuple) and value:
        return piece_count(value[0])
    return 0


@dataclass
class _Row:
    inputs: tuple
    proc: Procedure
    piece_bound: Optional[int]


class DPTable:
    """Rows, their dependencies, procedures and cached values.

    ``proc`` receives the list of cached values of its inputs (in the
    declared order) and returns the row value.  ``recomputed`` counts
    procedure calls; ``last_recomputed`` lists the rows touched by the most
    recent ``compute_all``/``update_rows`` call.
    """

    def __init__(self, h: Optional[int] = None, alpha: Optional[float] = None, p: Optional[int] = None):
        self.h = h
        self.alpha = alpha
        self.p = p
        self._rows: dict[RowId, _Row] = {}
        self._users: dict[RowId, set] = {}
        self.cache: dict[RowId, Any] = {}
        self.recomputed = 0
        self.last_recomputed: list = []

    # structure --------------------------------------------------------
    def __contains__(self, row: RowId) -> bool:
        return row in self._rows

    def __len__(self) -> int:
        return len(self._rows)

    def __getitem__(self, row: RowId) -> Any:
        if row not in self._rows:
            raise UnknownRow(row)
        return self.cache[row]

    def rows(self) -> list:
        return list(self._rows)

    def inputs(self, row: RowId) -> tuple:
        return self._row(row).inputs

    def _row(self, row: RowId) -> _Row:
        try:
            return self._rows[row]
        except KeyError:
            raise UnknownRow(row) from None

    def add_row(
        self,
        row: RowId,
        inputs: Iterable[RowId] = (),
        proc: Optional[Procedure] = None,
        piece_bound: Optional[int] = None,
    ) -> None:
        if row in self._rows:
            raise KeyError(f"row {row!r} already exists")
        if proc is None:
            raise ValueError("a row needs a procedure")
        self._rows[row] = _Row(tuple(), proc, piece_bound if piece_bound is not None else self.p)
        self._users.setdefault(row, set())
        self.set_inputs(row, inputs)

    def remove_row(self, row: RowId) -> None:
        r = self._row(row)
        for i in r.inputs:
            self._users[i].discard(row)
        if self._users[row]:
            raise ValueError(f"row {row!r} is still used by {sorted(map(repr, self._users[row]))}")
        del self._rows[row]
        del self._users[row]
        self.cache.pop(row, None)

    def set_inputs(self, row: RowId, inputs: Iterable[RowId]) -> None:
        r = self._row(row)
        inputs = tuple(inputs)
        for i in inputs:
            if i not in self._rows:
                raise UnknownRow(i)
        for i in r.inputs:
            self._users[i].discard(row)
        r.inputs = inputs
        for i in inputs:
            self._users[i].add(row)

    def set_proc(self, row: RowId, proc: Procedure, piece_bound: Optional[int] = None) -> None:
        r = self._row(row)
        r.proc = proc
        if piece_bound is not None:
            r.piece_bound = piece_bound

    # evaluation -------------------------------------------------------
    def _order(self, rows: set) -> list:
        """Topological order of ``rows`` using only edges inside the set."""
        indeg = {i: 0 for i in rows}
        for i in rows:
            for j in self._rows[i].inputs:
                if j in indeg:
                    indeg[i] += 1
        ready = [i for i in self._rows if i in indeg and indeg[i] == 0]
        order = []
        while ready:
            i = ready.pop()
            order.append(i)
            for u in self._users[i]:
                if u in indeg:
                    indeg[u] -= 1
                    if indeg[u] == 0:
                        ready.append(u)
        if len(order) != len(rows):
            raise CycleDetected("the dependency graph has a cycle")
        return order

    def _run(self, row: RowId) -> None:
        r = self._rows[row]
        value = r.proc([self.cache[i] for i in r.inputs])
        if r.piece_bound is not None:
            pieces = piece_count(value)
            if pieces > r.piece_bound:
                raise PieceBoundExceeded(f"row {row!r}: {pieces} pieces > bound {r.piece_bound}")
        self.cache[row] = value
        self.recomputed += 1

    def compute_all(self) -> "DPTable":
        order = self._order(set(self._rows))
        for row in order:
            self._run(row)
        self.last_recomputed = order
        return self

    def reach(self, row: RowId) -> set:
        """Rows depending on ``row`` directly or indirectly (excluding it)."""
        self._row(row)
        seen: set = set()
        stack = [row]
        while stack:
            for u in self._users[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    def update_rows(self, rows: Iterable[RowId]) -> list:
        pending: set = set()
        for row in rows:
            pending.add(row)
            pending |= self.reach(row)
        order = self._order(pending)
        for row in order:
            self._run(row)
        self.last_recomputed = order
        return order

    def update_row(self, row: RowId) -> list:
        return self.update_rows([row])


def compute_all(t: DPTable) -> DPTable:
    return t.compute_all()


def update_row(t: DPTable, row: RowId) -> DPTable:
    t.update_row(row)
    return t


# ----------------------------------------------------------------------
# rooted forests


def _edge(u, v) -> frozenset:
    return frozenset((u, v))


class RootedTreeTopology:
    """A rooted forest with edge capacities.

    ``height_measure(topology, root)`` defines what "height" means for the
    optional ``height_bound``; by default it is the number of edges on the
    longest root-to-leaf path.
    """

    def __init__(
        self,
        vertices: Iterable[Hashable] = (),
        height_bound: Optional[int] = None,
        height_measure: Optional[Callable[["RootedTreeTopology", Hashable], int]] = None,
    ):
        self.parent: dict = {}
        self.children: dict = {}
        self.cap: dict = {}
        self.height_bound = height_bound
        self.height_measure = height_measure or (lambda t, r: t.height(r))
        for v in vertices:
            self.add_vertex(v)

    def add_vertex(self, v) -> None:
        if v in self.parent:
            raise KeyError(f"vertex {v!r} already exists")
        self.parent[v] = None
        self.children[v] = []

    @property
    def vertices(self) -> list:
        return list(self.parent)

    def roots(self) -> list:
        return [v for v, p in self.parent.items() if p is None]

    def root_of(self, v):
        while self.parent[v] is not None:
            v = self.parent[v]
        return v

    def path_to_root(self, v) -> list:
        out = [v]
        while self.parent[v] is not None:
            v = self.parent[v]
            out.append(v)
        return out

    def edge_cap(self, u, v) -> float:
        try:
            return self.cap[_edge(u, v)]
        except KeyError:
            raise NoSuchEdge((u, v)) from None

    def parent_cap(self, v) -> Optional[float]:
        p = self.parent[v]
        return None if p is None else self.cap[_edge(p, v)]

    def subtree(self, v) -> list:
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return out

    def height(self, root) -> int:
        best, stack = 0, [(root, 0)]
        while stack:
            x, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in self.children[x])
        return best

    def postorder(self, root) -> list:
        order, stack = [], [(root, False)]
        while stack:
            x, done = stack.pop()
            if done:
                order.append(x)
                continue
            stack.append((x, True))
            for c in reversed(self.children[x]):
                stack.append((c, False))
        return order

    # raw edge edits ---------------------------------------------------
    def _attach(self, u, v, cap: float) -> None:
        self.parent[v] = u
        self.children[u].append(v)
        self.children[u].sort(key=_sort_key)
        self.cap[_edge(u, v)] = cap

    def _detach(self, u, v) -> float:
        self.children[u].remove(v)
        self.parent[v] = None
        return self.cap.pop(_edge(u, v))

    def reroot(self, v) -> list:
        """Make ``v`` the root of its component; return the flipped path.

        Path edges are removed from the old root downwards and re-inserted
        flipped.  The returned list is the old root path ordered bottom-up
        in the new orientation (old root first, ``v`` last).
        """
        path = self.path_to_root(v)  # v, ..., old root
        if len(path) == 1:
            return [v]
        caps = []
        for child, par in reversed(list(zip(path[:-1], path[1:]))):
            caps.append((par, child, self._detach(par, child)))
        for par, child, cap in caps:
            self._attach(child, par, cap)
        return list(reversed(path))

    # public dynamic operations ---------------------------------------
    def link(self, u, v, cap: float = 1.0) -> list:
        """Make ``u`` the parent of ``v``; return rows to recompute bottom-up."""
        if u not in self.parent or v not in self.parent:
            raise KeyError(f"unknown vertex in ({u!r}, {v!r})")
        if self.root_of(u) == self.root_of(v):
            raise WouldCreateCycle(f"{u!r} and {v!r} are already connected")
        old_root = self.root_of(v)
        flipped = self.reroot(v)
        self._attach(u, v, cap)
        if self.height_bound is not None:
            h = self.height_measure(self, self.root_of(u))
            if h > self.height_bound:
                self._detach(u, v)
                self.reroot(old_root)
                raise HeightBoundExceeded(f"height {h} > {self.height_bound}")
        return _dedupe(flipped[:-1] + [v] + self.path_to_root(u))

    def cut(self, u, v) -> list:
        """Remove edge ``{u, v}``; return rows to recompute bottom-up."""
        if self.parent.get(v) == u:
            par, child = u, v
        elif self.parent.get(u) == v:
            par, child = v, u
        else:
            raise NoSuchEdge((u, v))
        self._detach(par, child)
        return [child] + self.path_to_root(par)


def _sort_key(x):
    return (type(x).__name__, x) if not isinstance(x, tuple) else ("tuple", repr(x))


def _dedupe(xs: Sequence) -> list:
    seen, out = set(), []
    for x in xs:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def tree_link(t: RootedTreeTopology, u, v, cap: float = 1.0) -> list:
    return t.link(u, v, cap)


def tree_cut(t: RootedTreeTopology, u, v) -> list:
    return t.cut(u, v)


# ----------------------------------------------------------------------
# binarization


def gadget_children(k: int, d: int) -> tuple[int, int]:
    """Heap-layout children of slot ``k`` in a gadget with ``d`` leaves."""
    return 2 * k + 1, 2 * k + 2


def gadget_leaf(i: int, d: int) -> int:
    """Slot holding the ``i``-th leaf of a left-packed gadget with ``d`` leaves."""
    return d - 1 + i


def gadget_depth(slot: int) -> int:
    return (slot + 1).bit_length() - 1


def binarized_height(t: RootedTreeTopology, root) -> int:
    """Height the component would have after :func:`binarize_tree`."""
    best, stack = 0, [(root, 0)]
    while stack:
        x, depth = stack.pop()
        best = max(best, depth)
        kids = t.children[x]
        d = len(kids)
        for i, c in enumerate(kids):
            step = 1 if d <= 2 else gadget_depth(gadget_leaf(i, d)) + 1
            stack.append((c, depth + step))
    return best


@dataclass
class BinarizedTree:
    topology: RootedTreeTopology
    root_of: dict = field(default_factory=dict)
    leaf_of: dict = field(default_factory=dict)
    origin: dict = field(default_factory=dict)


def binarize_tree(t: RootedTreeTopology) -> BinarizedTree:
    """Binary version of ``t``.

    A vertex ``u`` with ``d > 2`` children becomes a left-packed heap of
    ``2d - 1`` slots: slot 0 is ``u`` itself, the other slots are new
    vertices ``("gadget", u, k)`` joined by infinite-capacity edges, and
    the ``i``-th leaf slot gets the ``i``-th child of ``u`` as its only
    child, over an edge with the original capacity.  Vertices with at most
    two children are copied unchanged.
    """
    out = RootedTreeTopology()
    res = BinarizedTree(out)
    for u in t.vertices:
        out.add_vertex(u)
        res.root_of[u] = u
        res.origin[u] = u
    for u in t.vertices:
        kids = t.children[u]
        d = len(kids)
        if d <= 2:
            for c in kids:
                out._attach(u, c, t.cap[_edge(u, c)])
                res.leaf_of[(u, c)] = u
            continue

        def slot(k, u=u):
            return u if k == 0 else ("gadget", u, k)

        for k in range(1, 2 * d - 1):
            out.add_vertex(slot(k))
            res.origin[slot(k)] = u
        for k in range(d - 1):
            for c in gadget_children(k, d):
                out._attach(slot(k), slot(c), math.inf)
        for i, c in enumerate(kids):
            leaf = slot(gadget_leaf(i, d))
            out._attach(leaf, c, t.cap[_edge(u, c)])
            res.leaf_of[(u, c)] = leaf
    return res


# ----------------------------------------------------------------------
# sparsifier interface


@dataclass
class Sparsifier:
    """A tree that stands in for a graph's cuts, with its quality factor."""

    tree: RootedTreeTopology
    binarized: BinarizedTree
    quality: float


def identity_sparsifier(vertices: Iterable, edges: Iterable[tuple], root=None) -> Sparsifier:
    """The only shipped sparsifier: accepts forests and returns them as is.

    ``edges`` are ``(u, v, cap)`` triples.  Anything with a cycle needs a
    real cut-sparsifier plugin and raises :class:`NotATree`.
    """
    vertices = list(vertices)
    adj: dict = {v: [] for v in vertices}
    seen_edges = set()
    for u, v, cap in edges:
        if u not in adj or v not in adj:
            raise KeyError(f"edge ({u!r}, {v!r}) uses an unknown vertex")
        e = _edge(u, v)
        if u == v or e in seen_edges:
            raise NotATree(f"edge ({u!r}, {v!r}) closes a cycle")
        seen_edges.add(e)
        adj[u].append((v, cap))
        adj[v].append((u, cap))
    topo = RootedTreeTopology(vertices)
    order = ([root] if root is not None else []) + vertices
    visited: set = set()
    for r in order:
        if r in visited:
            continue
        visited.add(r)
        stack = [r]
        while stack:
            x = stack.pop()
            for y, cap in adj[x]:
                if y in visited:
                    if topo.parent[x] != y:
                        raise NotATree(f"edge ({x!r}, {y!r}) closes a cycle")
                    continue
                visited.add(y)
                topo._attach(x, y, cap)
                stack.append(y)
    return Sparsifier(topo, binarize_tree(topo), 1.0)


sparsifier_interface = identity_sparsifier
