"""Brute-force reference answers for small instances.

Everything here is deliberately naive and exponential.  Nothing is
imported from the algorithmic modules: functions are read through their
``lo``/``hi``/``ends``/``values`` fields (or plain tuples) and evaluated
with a bisection of our own, trees are plain dictionaries, and every
problem is solved straight from its definition.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import BudgetExceeded, Infeasible

INF = math.inf


@dataclass(frozen=True)
class OracleBudget:
    knapsack_items: int = 20
    tree_vertices: int = 12
    necklace_beads: int = 10
    grid_points: int = 10_000


BUDGET = OracleBudget()


def _check(size: int, limit: int, what: str) -> None:
    if size > limit:
        raise BudgetExceeded(f"{what}: {size} exceeds the oracle budget of {limit}")


# ----------------------------------------------------------------------
# knapsack


def oracle_knapsack(items: Sequence[tuple[float, float]], x: float) -> float:
    """Best total price of a subset of ``(price, weight)`` items with weight <= x."""
    _check(len(items), BUDGET.knapsack_items, "knapsack items")
    best = 0.0
    for mask in range(1 << len(items)):
        price = weight = 0.0
        for i, (p, w) in enumerate(items):
            if mask >> i & 1:
                price += p
                weight += w
        if weight <= x and price > best:
            best = price
    return best


# ----------------------------------------------------------------------
# (min,+)-convolution


def _as_pieces(f) -> tuple[float, float, list[float], list[float]]:
    if isinstance(f, tuple):
        lo, hi, pieces = f
        return float(lo), float(hi), [float(e) for e, _ in pieces], [float(y) for _, y in pieces]
    return float(f.lo), float(f.hi), [float(e) for e in f.ends], [float(y) for y in f.values]


def _evaluate(piece_data, x: float) -> float:
    lo, hi, ends, vals = piece_data
    if x < lo or x > hi:
        raise ValueError(f"{x} outside [{lo}, {hi}]")
    i = bisect.bisect_right(ends, x)
    return vals[min(i, len(vals) - 1)]


def oracle_convolution(f1, f2, grid: Iterable[float]) -> list[float]:
    """``min over xb of f1(xb) + f2(x - xb)`` at each grid point.

    Both operands are read on their own domains.  The sum is piecewise
    constant in ``xb`` with jumps only at breakpoints of ``f1`` and at
    ``x`` minus breakpoints of ``f2``, so trying every such point and every
    midpoint between neighbours visits every piece of the sum.
    """
    grid = list(grid)
    _check(len(grid), BUDGET.grid_points, "grid points")
    a, b = _as_pieces(f1), _as_pieces(f2)
    bp1 = [a[0]] + a[2]
    bp2 = [b[0]] + b[2]
    out = []
    for x in grid:
        lo = max(a[0], x - b[1])
        hi = min(a[1], x - b[0])
        if lo > hi:
            out.append(INF)
            continue
        pts = {lo, hi}
        pts.update(p for p in bp1 if lo <= p <= hi)
        pts.update(x - p for p in bp2 if lo <= x - p <= hi)
        pts = sorted(pts)
        pts += [(p + q) / 2 for p, q in zip(pts, pts[1:])]
        out.append(min(_evaluate(a, p) + _evaluate(b, x - p) for p in pts))
    return out


# ----------------------------------------------------------------------
# balanced partitioning


def oracle_partition(
    vertices: Sequence[Hashable],
    edges: Sequence[tuple[Hashable, Hashable, float]],
    k: int,
    weight: Mapping[Hashable, int] | None = None,
) -> float:
    """Cheapest set of cut edges splitting the vertices into at most ``k``
    parts of weight at most ``ceil(w(V) / k)`` each."""
    vertices = list(vertices)
    _check(len(vertices), BUDGET.tree_vertices, "partition vertices")
    w = {v: (1 if weight is None else weight[v]) for v in vertices}
    bound = -(-sum(w.values()) // k)
    index = {v: i for i, v in enumerate(vertices)}
    best = INF
    label = [0] * len(vertices)
    load = [0] * k

    def rec(i: int, used: int) -> None:
        nonlocal best
        if i == len(vertices):
            cost = sum(c for u, v, c in edges if label[index[u]] != label[index[v]])
            best = min(best, cost)
            return
        # restricted growth: a new part may only be opened in label order
        for part in range(min(used + 1, k)):
            if load[part] + w[vertices[i]] > bound:
                continue
            label[i] = part
            load[part] += w[vertices[i]]
            rec(i + 1, max(used, part + 1))
            load[part] -= w[vertices[i]]

    rec(0, 0)
    return best


@dataclass(frozen=True)
class _Classes:
    t: int
    M: int
    xi: tuple  # xi[j] for j = 0 .. t-1, exact fractions


def _signature_classes(n_w: int, k: int, eps: Fraction) -> _Classes:
    unit = -(-n_w // k)
    target = 1 / eps
    m, p = 0, Fraction(1)
    while p < target:
        p *= 1 + eps
        m += 1
    t = m + 1
    M = math.ceil(k / eps) + 1
    xi = tuple((1 + eps) ** j * eps * unit for j in range(t))
    return _Classes(t, M, xi)


def _class_of(y: int, cl: _Classes) -> int | None:
    """-1 for the zero signature, ``j`` for the unit vector, None if too big."""
    if y < cl.xi[0]:
        return -1
    for j, bound in enumerate(cl.xi):
        if y <= bound:
            return j
    return None


def oracle_partition_rows(
    children: Mapping[Hashable, Sequence[Hashable]],
    cap: Mapping[tuple, float],
    weight: Mapping[Hashable, int],
    k: int,
    eps: Fraction,
    v: Hashable,
    parent_cap: float,
) -> dict[tuple[tuple, bool], list[float]]:
    """Every signature row of vertex ``v`` on the integer grid ``0 .. w(V)+1``.

    ``children`` must describe a tree in which no vertex has more than two
    children; ``cap[(parent, child)]`` is an edge capacity.  For each set
    of cut edges inside the subtree (and each choice for the edge above
    ``v``) the components are formed explicitly.  A component may be
    reported in the size class of any integer between its weight and the
    largest admissible size, except a lone vertex whose children are all
    cut away from it and which has zero or two children: that component is
    reported at exactly its own weight.
    """
    n_w = sum(weight.values())
    D = n_w + 1
    cl = _signature_classes(n_w, k, eps)
    top = math.floor(cl.xi[-1])
    sub, stack = [], [v]
    while stack:
        x = stack.pop()
        sub.append(x)
        stack.extend(children.get(x, ()))
    _check(len(sub), BUDGET.tree_vertices, "partition row vertices")
    inner = [(p, c) for p in sub for c in children.get(p, ())]
    flexible_classes = {}

    def options(comp: frozenset) -> set:
        wc = sum(weight[u] for u in comp)
        if len(comp) == 1:
            (u,) = comp
            if len(children.get(u, ())) in (0, 2):
                j = _class_of(wc, cl)
                return set() if j is None else {j}
        if wc not in flexible_classes:
            flexible_classes[wc] = {_class_of(y, cl) for y in range(wc, top + 1)}
        return flexible_classes[wc]

    zero = (0,) * cl.t
    table: dict[tuple[tuple, bool], list[float]] = {}
    for mask in range(1 << len(inner)):
        cut_edges = [e for i, e in enumerate(inner) if mask >> i & 1]
        kept = [e for i, e in enumerate(inner) if not mask >> i & 1]
        comp_of = {u: frozenset([u]) for u in sub}
        for p, c in kept:
            merged = comp_of[p] | comp_of[c]
            for u in merged:
                comp_of[u] = merged
        comps = set(comp_of.values())
        root_comp = comp_of[v]
        base = sum(cap[e] for e in cut_edges)
        for cut in (False, True):
            if cut and parent_cap == INF:
                continue
            closed = [c for c in comps if c != root_comp or cut]
            sigs = {zero}
            for comp in closed:
                opts = options(comp)
                nxt = set()
                for g in sigs:
                    for j in opts:
                        if j == -1:
                            nxt.add(g)
                        elif g[j] < cl.M - 1:
                            nxt.add(g[:j] + (g[j] + 1,) + g[j + 1 :])
                sigs = nxt
                if not sigs:
                    break
            cost = base + parent_cap if cut else base
            lowest = 0 if cut else sum(weight[u] for u in root_comp)
            for g in sigs:
                row = table.setdefault((g, cut), [INF] * (D + 1))
                for x in range(lowest, D + 1):
                    if cost < row[x]:
                        row[x] = cost
    return table


# ----------------------------------------------------------------------
# simultaneous source location


def _rooted(vertices: Sequence[Hashable], edges: Sequence[tuple]) -> tuple[dict, dict, list]:
    adj: dict = {v: [] for v in vertices}
    cap: dict = {}
    for u, v, c in edges:
        adj[u].append(v)
        adj[v].append(u)
        cap[(u, v)] = cap[(v, u)] = c
    children: dict = {v: [] for v in vertices}
    roots, seen = [], set()
    for r in vertices:
        if r in seen:
            continue
        roots.append(r)
        seen.add(r)
        stack = [r]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    children[x].append(y)
                    stack.append(y)
    return children, cap, roots


def _need(children, cap, demand, sources, v, parent_cap) -> float:
    """Least net inflow ``v`` must get from above; INF when impossible."""
    total = 0.0
    for c in children[v]:
        nc = _need(children, cap, demand, sources, c, cap[(v, c)])
        if nc > cap[(v, c)]:
            return INF
        total += nc
    if v in sources:
        return -parent_cap
    return max(demand[v] + total, -parent_cap)


def oracle_ssl_feasible(
    vertices: Sequence[Hashable],
    edges: Sequence[tuple],
    demand: Mapping[Hashable, float],
    sources: Iterable[Hashable],
) -> bool:
    """Whether ``sources`` can serve every demand within the capacities."""
    _check(len(vertices), BUDGET.tree_vertices, "source-location vertices")
    children, cap, roots = _rooted(list(vertices), edges)
    sources = set(sources)
    return all(_need(children, cap, demand, sources, r, 0.0) <= 0 for r in roots)


def oracle_ssl(
    vertices: Sequence[Hashable],
    edges: Sequence[tuple],
    demand: Mapping[Hashable, float],
    allowed: Mapping[Hashable, bool],
) -> int:
    """Fewest sources (among allowed vertices) serving all demands."""
    vertices = list(vertices)
    _check(len(vertices), BUDGET.tree_vertices, "source-location vertices")
    candidates = [v for v in vertices if allowed[v]]
    for size in range(len(candidates) + 1):
        for chosen in itertools.combinations(candidates, size):
            if oracle_ssl_feasible(vertices, edges, demand, chosen):
                return size
    raise Infeasible("no set of allowed sources serves every demand")


def oracle_ssl_least_inflow(
    children: Mapping[Hashable, Sequence[Hashable]],
    cap: Mapping[tuple, float],
    demand: Mapping[Hashable, float],
    allowed: Mapping[Hashable, bool],
    v: Hashable,
    i: int,
    parent_cap: float,
) -> float:
    """Least inflow ``v`` needs with at most ``i`` sources inside its subtree.

    The answer is INF when no such placement works, including when the
    edge above ``v`` could not carry the required inflow.
    """
    sub, stack = [], [v]
    while stack:
        x = stack.pop()
        sub.append(x)
        stack.extend(children.get(x, ()))
    _check(len(sub), BUDGET.tree_vertices, "source-location vertices")
    kids = {x: list(children.get(x, ())) for x in sub}
    candidates = [x for x in sub if allowed[x]]
    best = INF
    for size in range(min(i, len(candidates)) + 1):
        for chosen in itertools.combinations(candidates, size):
            need = _need(kids, cap, demand, set(chosen), v, parent_cap)
            if need <= parent_cap and need < best:
                best = need
    return best


# ----------------------------------------------------------------------
# necklace alignment


def _shift_spread(x: Sequence[float], y: Sequence[float], s: int) -> tuple[float, float]:
    n = len(x)
    z = [x[i] - y[(i + s) % n] for i in range(n)]
    return min(z), max(z)


def oracle_necklace(x: Sequence[float], y: Sequence[float]) -> float:
    """``min over s of (max_i z_i - min_i z_i) / 2`` with ``z_i = x_i - y_{i+s}``."""
    if len(x) != len(y):
        raise ValueError("necklaces must have equal length")
    _check(len(x), BUDGET.necklace_beads, "necklace beads")
    if not x:
        return 0.0
    best = INF
    for s in range(len(x)):
        lo, hi = _shift_spread(x, y, s)
        best = min(best, (hi - lo) / 2)
    return best


def oracle_shift_cost(x: Sequence[float], y: Sequence[float], c: float, s: int) -> float:
    """``max_i |x_i + c - y_{(i+s) mod n}|`` for a given offset and shift."""
    _check(len(x), BUDGET.necklace_beads, "necklace beads")
    n = len(x)
    return max((abs(x[i] + c - y[(i + s) % n]) for i in range(n)), default=0.0)


__all__ = [
    "OracleBudget",
    "BUDGET",
    "oracle_knapsack",
    "oracle_convolution",
    "oracle_partition",
    "oracle_partition_rows",
    "oracle_ssl",
    "oracle_ssl_feasible",
    "oracle_ssl_least_inflow",
    "oracle_necklace",
    "oracle_shift_cost",
]
