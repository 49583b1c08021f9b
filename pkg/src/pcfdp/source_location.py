"""Simultaneous source location on trees.

Every vertex ``v`` has a demand ``d(v) >= 0`` and may or may not host a
source.  A set of sources is feasible when the demands of all non-source
vertices can be routed from sources without exceeding edge capacities;
the goal is the fewest sources.

For a vertex ``v`` whose parent edge has capacity ``c`` the row is the
decreasing function ``x -> fewest sources inside the subtree of v`` such
that the subtree needs at most ``x`` units from its parent (a negative
``x`` means it can send ``-x`` units up).  Rows live on ``[-c-1, c+1]``:
they are infinite below ``-c`` and constant above ``c``.  A root is given
a virtual parent edge of capacity 0, so ``row(root)(0)`` is the answer.

A vertex either hosts a source, which settles its own demand and can
serve each child up to its edge capacity, or it passes the sum of its
children's needs plus its own demand upwards, which is a (min,+)
convolution of the two child rows shifted by the demand.  Vertices with
more than two children run the recurrence over a balanced binary gadget
of demand-free, source-free helper slots whose parent edge carries the
total capacity of the children below them.  A single child is paired
with a neutral child (no demand, no source, capacity 0).

In approx mode each row is rounded up to powers of ``1 + delta``; the
reported count is the floor of the rounded root value, and an explicit
source set of at most that size can be extracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence

from .dpengine import DPTable, RootedTreeTopology, binarized_height, identity_sparsifier
from .errors import BadEpsilon, CodomainError, HeightBoundExceeded, Infeasible
from .pcf import (
    INF,
    PCF,
    RoundingConfig,
    Tag,
    convolve_monotone,
    eval_at,
    from_pieces,
    min2,
    reframe,
    round_up_pow,
    translate,
    witness_argmin,
)


@dataclass(eq=False)
class Slot:
    """One node of the (possibly gadget-expanded) binary recurrence.

    ``vertex`` is the original vertex for a real vertex's top slot and
    None for helper and neutral slots.  ``source_value`` is the unrounded
    value of hosting a source here (INF if not allowed); ``conv`` and
    ``witness`` describe the unrounded pass-up case before the demand
    shift.
    """

    row: PCF
    cap: float
    demand: float
    allowed: bool
    vertex: Optional[Hashable]
    source_value: float = INF
    conv: Optional[PCF] = None
    witness: object = None
    left: Optional["Slot"] = None
    right: Optional["Slot"] = None


class VertexRow(NamedTuple):
    """Row value stored in the DP table: the function first, then its slot."""

    row: PCF
    slot: Slot


def _clamp(f: PCF, c: float) -> PCF:
    """Infinite below ``-c``, ``f`` on ``[-c, c)``, ``f(c)`` from ``c`` on."""
    pieces = [(-c, INF)]
    for s, e, y in zip(f.starts.tolist(), f.ends.tolist(), f.values.tolist()):
        e = min(e, c)
        if s < c and e > pieces[-1][0]:
            pieces.append((e, y))
    pieces.append((c + 1, eval_at(f, c)))
    return from_pieces(pieces, -c - 1, c + 1, Tag.DECREASING)


class _Recurrence:
    def __init__(self, cfg: Optional[RoundingConfig]):
        self.cfg = cfg
        self.neutral = self.leaf(0.0, False, 0.0, None)

    def finish(self, f: PCF) -> PCF:
        return f if self.cfg is None else round_up_pow(f, self.cfg)

    def leaf(self, demand: float, allowed: bool, cap: float, vertex) -> Slot:
        lo, hi = -cap - 1, cap + 1
        f = PCF.constant(INF, lo, hi)
        if allowed:
            f = min2(f, from_pieces([(-cap, INF), (hi, 1.0)], lo, hi, Tag.DECREASING))
        if demand <= cap:
            f = min2(f, from_pieces([(demand, INF), (hi, 0.0)], lo, hi, Tag.DECREASING))
        return Slot(f, cap, demand, allowed, vertex, 1.0 if allowed else INF)

    def node(self, demand: float, allowed: bool, cap: float, vertex, left: Slot, right: Slot) -> Slot:
        lo, hi = -cap - 1, cap + 1
        a = INF
        if allowed:
            a = 1.0 + (eval_at(left.row, left.cap) + eval_at(right.row, right.cap))
        conv, witness = convolve_monotone(left.row, right.row)
        passed = translate(conv, demand)
        f = reframe(passed, lo, hi, INF, float(passed.values[-1]))
        if a < INF:
            f = min2(f, from_pieces([(-cap, INF), (hi, a)], lo, hi, Tag.DECREASING))
        f = self.finish(_clamp(f, cap))
        return Slot(f, cap, demand, allowed, vertex, a, conv, witness, left, right)

    def vertex(self, v, demand: float, allowed: bool, cap: float, kids: Sequence[Slot]) -> Slot:
        d = len(kids)
        if d == 0:
            return self.leaf(demand, allowed, cap, v)
        if d == 1:
            return self.node(demand, allowed, cap, v, kids[0], self.neutral)
        if d == 2:
            return self.node(demand, allowed, cap, v, kids[0], kids[1])
        slot: dict[int, Slot] = {}
        for s in range(2 * d - 2, -1, -1):
            if s >= d - 1:
                kid = kids[s - (d - 1)]
                slot[s] = self.node(0.0, False, kid.cap, None, kid, self.neutral)
            else:
                l, r = slot[2 * s + 1], slot[2 * s + 2]
                if s == 0:
                    slot[s] = self.node(demand, allowed, cap, v, l, r)
                else:
                    slot[s] = self.node(0.0, False, l.cap + r.cap, None, l, r)
        return slot[0]


def _extract(slot: Slot, x: float, out: set) -> None:
    """Add to ``out`` a source set realising at most ``slot.row(x)`` sources."""
    stack = [(slot, x)]
    while stack:
        s, x = stack.pop()
        x = min(x, s.cap)
        if not eval_at(s.row, x) < INF:
            raise AssertionError("extraction reached an infinite entry")
        if s.left is None:
            if s.allowed and not (s.demand <= s.cap and x >= s.demand):
                out.add(s.vertex)
            continue
        xr = min(x - s.demand, s.conv.hi)
        passed = eval_at(s.conv, xr) if xr >= s.conv.lo else INF
        if s.allowed and s.source_value <= passed:
            out.add(s.vertex)
            stack.append((s.left, s.left.cap))
            stack.append((s.right, s.right.cap))
        else:
            xb = witness_argmin(s.conv, s.witness, s.left.row, s.right.row, xr)
            stack.append((s.left, xb))
            stack.append((s.right, xr - xb))


@dataclass
class SSLResult:
    value: int
    sources: frozenset
    delta: float


def _check_demand(v, d: float) -> float:
    d = float(d)
    if not (math.isfinite(d) and d >= 0):
        raise CodomainError(f"demand of {v!r} must be finite and non-negative, got {d}")
    return d


class SSLDP:
    """DP table over a rooted forest with one row per vertex.

    ``mode="exact"`` keeps integer source counts; ``mode="approx"`` rounds
    every row up to powers of ``1 + delta`` with ``delta`` defaulting to
    ``ln(1+eps)/(h+1)`` for the binarized height bound ``h``.  ``delta=0``
    disables rounding.
    """

    def __init__(
        self,
        topology: RootedTreeTopology,
        demand: Mapping[Hashable, float],
        allowed: Mapping[Hashable, bool],
        eps: float = 0.1,
        mode: str = "approx",
        delta: Optional[float] = None,
        height_bound: Optional[int] = None,
    ):
        if mode not in ("exact", "approx"):
            raise ValueError(f"unknown mode {mode!r}")
        if not (0 < eps <= 1):
            raise BadEpsilon(f"eps must lie in (0, 1], got {eps}")
        for c in topology.cap.values():
            if not (c >= 0 and math.isfinite(c)):
                raise CodomainError(f"capacities must be finite and non-negative, got {c}")
        self.topology = topology
        self.demand = {v: _check_demand(v, demand.get(v, 0.0)) for v in topology.vertices}
        self.allowed = {v: bool(allowed.get(v, False)) for v in topology.vertices}
        self.eps = eps
        self.mode = mode
        if height_bound is not None:
            topology.height_bound = height_bound
            topology.height_measure = binarized_height
            if self.current_height() > height_bound:
                raise HeightBoundExceeded(f"height {self.current_height()} > {height_bound}")
        h = height_bound if height_bound is not None else self.current_height()
        self.h = h
        self.delta = 0.0
        cfg = None
        if mode == "approx":
            self.delta = math.log1p(eps) / (h + 1) if delta is None else float(delta)
            if self.delta > 0:
                cfg = RoundingConfig(self.delta, max(1.0, float(len(self.demand))))
        self.cfg = cfg
        self._rec = _Recurrence(cfg)
        self.table = DPTable(h=h, alpha=None if cfg is None else 1 + cfg.delta)
        for r in topology.roots():
            for v in topology.postorder(r):
                self.table.add_row(v, topology.children[v], self._proc(v))
        self.table.compute_all()

    def current_height(self) -> int:
        return max((binarized_height(self.topology, r) for r in self.topology.roots()), default=0)

    def _proc(self, v):
        def proc(kids):
            cap = self.topology.parent_cap(v)
            slot = self._rec.vertex(
                v, self.demand[v], self.allowed[v], 0.0 if cap is None else float(cap), [k.slot for k in kids]
            )
            return VertexRow(slot.row, slot)

        return proc

    def row(self, v) -> PCF:
        return self.table[v].row

    # dynamic operations ----------------------------------------------
    def _refresh(self, touched: list) -> list:
        for v in touched:
            self.table.set_inputs(v, self.topology.children[v])
        return self.table.update_rows(touched)

    def set_demand(self, v, d: float) -> list:
        self.demand[v] = _check_demand(v, d)
        return self.table.update_rows([v])

    def set_capacity(self, u, v, c: float) -> list:
        if not (c >= 0 and math.isfinite(c)):
            raise CodomainError(f"capacities must be finite and non-negative, got {c}")
        child = v if self.topology.parent.get(v) == u else u
        self.topology.edge_cap(u, v)
        self.topology.cap[frozenset((u, v))] = float(c)
        return self.table.update_rows([child])

    def remove(self, u, v) -> list:
        return self._refresh(self.topology.cut(u, v))

    def insert(self, u, v, c: float) -> list:
        if not (c >= 0 and math.isfinite(c)):
            raise CodomainError(f"capacities must be finite and non-negative, got {c}")
        return self._refresh(self.topology.link(u, v, float(c)))

    # answers ----------------------------------------------------------
    def query_value(self) -> int:
        total = 0
        for r in self.topology.roots():
            y = eval_at(self.table[r].row, 0.0)
            if y == INF:
                raise Infeasible(f"the component of {r!r} cannot be served")
            total += math.floor(y)
        return total

    def query(self) -> SSLResult:
        value = self.query_value()
        sources: set = set()
        for r in self.topology.roots():
            _extract(self.table[r].slot, 0.0, sources)
        return SSLResult(value, frozenset(sources), self.delta)


def solve(
    vertices: Sequence[Hashable],
    edges: Iterable[tuple],
    demand: Mapping[Hashable, float],
    allowed: Mapping[Hashable, bool],
    eps: float = 0.1,
    mode: str = "approx",
    delta: Optional[float] = None,
) -> SSLResult:
    """Static solve on a forest given as ``(u, v, cap)`` edges."""
    topo = identity_sparsifier(vertices, edges).tree
    return SSLDP(topo, demand, allowed, eps, mode, delta).query()


def solve_value(vertices, edges, demand, allowed, eps=0.1, mode="approx") -> int:
    return solve(vertices, edges, demand, allowed, eps, mode).value


class DynamicSSL:
    """The four update operations on top of :class:`SSLDP`."""

    def __init__(
        self,
        vertices: Sequence[Hashable],
        edges: Iterable[tuple],
        demand: Mapping[Hashable, float],
        allowed: Mapping[Hashable, bool],
        eps: float,
        height_bound: int,
        mode: str = "approx",
    ):
        topo = identity_sparsifier(vertices, edges).tree
        self.dp = SSLDP(topo, demand, allowed, eps, mode, height_bound=height_bound)

    @property
    def topology(self) -> RootedTreeTopology:
        return self.dp.topology

    def set_demand(self, v, d: float) -> list:
        return self.dp.set_demand(v, d)

    def set_capacity(self, u, v, c: float) -> list:
        return self.dp.set_capacity(u, v, c)

    def remove(self, u, v) -> list:
        return self.dp.remove(u, v)

    def insert(self, u, v, c: float) -> list:
        return self.dp.insert(u, v, c)

    def query(self) -> int:
        return self.dp.query_value()


__all__ = [
    "Slot",
    "VertexRow",
    "SSLResult",
    "SSLDP",
    "DynamicSSL",
    "solve",
    "solve_value",
]
