"""k-balanced partitioning of trees with 0/1 vertex weights.

A solution cuts tree edges; the resulting components must be packable
into ``k`` parts of nearly equal weight.  Components are summarised by a
*signature*: a vector counting components per size class, where class
``j`` holds weights up to ``xi_j = (1+eps)^j * eps * ceil(w(V)/k)`` and
components lighter than ``xi_0`` are not counted at all.

For every vertex ``v`` and signature ``g`` the DP keeps two rows:

* ``uncut[g]``: a decreasing function of ``x``, the cheapest cut cost
  inside the subtree of ``v`` when the component still attached to
  ``v``'s parent weighs at most ``x`` and the detached components match
  ``g``;
* ``cut[g]``: the same with the parent edge cut too (its capacity
  included), which no longer depends on ``x`` and is stored as a number.

Functions live on ``[0, w(V) + 1]`` and change only at integers.  Vertices
with more than two children are handled by running the recurrence over a
balanced binary gadget of zero-weight helper nodes joined by uncuttable
edges, simulated inside the vertex's own row procedure.

Two pipelines share the recurrence: ``exact`` works on integer grids with
numpy arrays, ``approx`` works on :class:`~pcfdp.pcf.PCF` rows and rounds
every row up to powers of ``1 + delta``.  With ``delta=0`` the approx
pipeline reproduces the exact one bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .dpengine import DPTable, RootedTreeTopology, binarized_height, identity_sparsifier
from .errors import (
    BadEpsilon,
    CodomainError,
    HeightBoundExceeded,
    Infeasible,
    PreconditionViolated,
    WeightTooLarge,
)
from .pcf import (
    INF,
    PCF,
    RoundingConfig,
    Tag,
    add_constant,
    ceil_pow,
    convolve_monotone,
    from_pieces,
    multimin,
    round_up_pow,
    shift,
)

Signature = tuple


def as_fraction(eps) -> Fraction:
    """``eps`` as an exact fraction; floats are read as the nearest simple ratio."""
    if isinstance(eps, Fraction):
        f = eps
    elif isinstance(eps, (int, str)):
        f = Fraction(eps)
    else:
        if not math.isfinite(eps):
            raise BadEpsilon(f"eps must be finite, got {eps}")
        f = Fraction(eps).limit_denominator(10**6)
    if not 0 < f <= 1:
        raise BadEpsilon(f"eps must lie in (0, 1], got {eps}")
    return f


@dataclass(frozen=True)
class SignatureSpace:
    """Size classes and signature arithmetic for one instance.

    ``classes`` lists ``(j, rep)`` for every class that contains an
    integer, ``rep`` being its largest integer; ``j = -1`` is the class of
    components too light to count.
    """

    eps: Fraction
    k: int
    n_w: int
    unit: int
    t: int
    M: int
    xi: tuple
    classes: tuple
    top: int

    @classmethod
    def build(cls, eps, k: int, n_w: int) -> "SignatureSpace":
        eps = as_fraction(eps)
        if k < 1:
            raise PreconditionViolated(f"k must be positive, got {k}")
        if n_w < 1:
            raise PreconditionViolated("the total vertex weight must be positive")
        unit = -(-n_w // k)
        m, p = 0, Fraction(1)
        while p < 1 / eps:
            p *= 1 + eps
            m += 1
        t = m + 1
        M = math.ceil(k / eps) + 1
        xi = tuple((1 + eps) ** j * eps * unit for j in range(t))
        top = math.floor(xi[-1])
        reps: dict[int, int] = {}
        for y in range(top + 1):
            reps[_class_index(y, xi)] = y
        classes = tuple(sorted(reps.items()))
        return cls(eps, k, n_w, unit, t, M, xi, classes, top)

    @property
    def zero(self) -> Signature:
        return (0,) * self.t

    def unit_vector(self, j: int) -> Signature:
        if j < 0:
            return self.zero
        return tuple(1 if i == j else 0 for i in range(self.t))

    def add(self, g: Signature, h: Signature) -> Optional[Signature]:
        """Component-wise sum, or None if a coordinate would pass ``M - 1``."""
        s = tuple(a + b for a, b in zip(g, h))
        return None if max(s) > self.M - 1 else s


def _class_index(y, xi: tuple) -> int:
    if y < xi[0]:
        return -1
    for j, bound in enumerate(xi):
        if y <= bound:
            return j
    raise WeightTooLarge(f"a component of weight {y} exceeds the largest size class {xi[-1]}")


def sig_of_component(x: int, sp: SignatureSpace) -> Signature:
    """Signature of a single component of weight ``x``."""
    return sp.unit_vector(_class_index(x, sp.xi))


# ----------------------------------------------------------------------
# feasibility of signatures


@dataclass(frozen=True)
class Schedule:
    """Machines as lists of size-class indices, with their loads."""

    machines: tuple
    loads: tuple
    bound: Fraction


def makespan_bound(sp: SignatureSpace, eps_bar) -> Fraction:
    return (1 + as_fraction_pos(eps_bar)) * (1 + sp.eps) * sp.unit


def as_fraction_pos(x) -> Fraction:
    f = Fraction(x).limit_denominator(10**6) if isinstance(x, float) else Fraction(x)
    if not f > 0:
        raise BadEpsilon(f"eps_bar must be positive, got {x}")
    return f


def pack_jobs(sizes: Sequence, k: int, bound) -> Optional[list]:
    """Machine index per job such that no load exceeds ``bound``, or None.

    Exact branch and bound: jobs go largest first, machines with equal load
    are tried only once, and visited (job index, sorted loads) states are
    remembered.
    """
    order = sorted(range(len(sizes)), key=lambda i: sizes[i], reverse=True)
    if sum(sizes, Fraction(0)) > k * bound or any(s > bound for s in sizes):
        return None
    loads = [Fraction(0)] * k
    where = [0] * len(sizes)
    dead: set = set()

    def place(pos: int) -> bool:
        if pos == len(order):
            return True
        state = (pos, tuple(sorted(loads)))
        if state in dead:
            return False
        size = sizes[order[pos]]
        tried = set()
        for m in range(k):
            if loads[m] in tried or loads[m] + size > bound:
                continue
            tried.add(loads[m])
            loads[m] += size
            where[order[pos]] = m
            if place(pos + 1):
                return True
            loads[m] -= size
        dead.add(state)
        return False

    return where if place(0) else None


def schedule_signature(g: Signature, sp: SignatureSpace, eps_bar) -> Optional[Schedule]:
    """Pack ``g_j`` jobs of size ``xi_j`` onto ``k`` machines within the bound."""
    bound = makespan_bound(sp, eps_bar)
    jobs = [j for j in range(sp.t) for _ in range(g[j])]
    if len(jobs) > sp.k * (1 + 1 / sp.eps):
        return None
    where = pack_jobs([sp.xi[j] for j in jobs], sp.k, bound)
    if where is None:
        return None
    machines = tuple(tuple(j for j, m in zip(jobs, where) if m == mach) for mach in range(sp.k))
    loads = tuple(sum((sp.xi[j] for j in mach), Fraction(0)) for mach in machines)
    return Schedule(machines, loads, bound)


def feasible_signatures(sp: SignatureSpace, eps_bar) -> set:
    """Every signature whose jobs fit on ``k`` machines within the bound."""
    bound = makespan_bound(sp, eps_bar)
    budget = sp.k * bound
    out: set = set()

    def rec(j: int, prefix: list, used: Fraction) -> None:
        if j == sp.t:
            g = tuple(prefix)
            if schedule_signature(g, sp, eps_bar) is not None:
                out.add(g)
            return
        c = 0
        while c <= sp.M - 1 and used + c * sp.xi[j] <= budget:
            prefix.append(c)
            rec(j + 1, prefix, used + c * sp.xi[j])
            prefix.pop()
            c += 1

    rec(0, [], Fraction(0))
    return out


# ----------------------------------------------------------------------
# row recurrences


class Rows(NamedTuple):
    """All rows of one vertex: ``uncut[g]`` functions and ``cut[g]`` numbers.

    Signatures missing from a dict have an infinite row.
    """

    uncut: dict
    cut: dict


def _keep_min(d: dict, key, value: float) -> None:
    if value < d.get(key, INF):
        d[key] = value


class _Recurrence:
    """One vertex step of the DP, for either row representation."""

    def __init__(self, sp: SignatureSpace, exact: bool, cfg: Optional[RoundingConfig]):
        self.sp = sp
        self.D = sp.n_w + 1
        self.exact = exact
        self.cfg = cfg
        self.filler = self.leaf(0, 0.0)

    # representation-specific primitives -----------------------------
    def step(self, w: int, value: float):
        """``inf`` below ``w`` and ``value`` from ``w`` on."""
        if self.exact:
            a = np.full(self.D + 1, INF)
            a[w:] = value
            return a
        if w == 0 or value == INF:
            return PCF.constant(value, 0.0, self.D)
        return from_pieces([(w, INF), (self.D, value)], 0.0, self.D, Tag.DECREASING)

    def convolve(self, f, g):
        if self.exact:
            sums = np.fliplr(f[:, None] + g[None, :])
            return np.array([sums.diagonal(self.D - y).min() for y in range(self.D + 1)])
        return convolve_monotone(f, g, hi=self.D)[0]

    def shifted(self, f, w: int, plus: float = 0.0):
        """``x -> f(x - w) + plus``, infinite below ``w``."""
        if self.exact:
            a = np.full(self.D + 1, INF)
            a[w:] = f[: self.D + 1 - w] + plus
            return a
        return add_constant(shift(f, w, INF), plus)

    def at(self, f, ys: np.ndarray) -> np.ndarray:
        if self.exact:
            return f[ys]
        return f.at(ys)

    def lowest(self, f) -> float:
        return float(f[-1]) if self.exact else float(f.values[-1])

    def minimum(self, fs: list):
        if self.exact:
            return np.minimum.reduce(fs) if len(fs) > 1 else fs[0]
        return multimin(fs)

    def round_row(self, f):
        if self.cfg is None:
            return f
        return round_up_pow(f, self.cfg)

    def round_value(self, y: float) -> float:
        if self.cfg is None:
            return y
        return ceil_pow(y, 1.0 + self.cfg.delta)

    # the recurrence --------------------------------------------------
    def leaf(self, w: int, parent_cap: float) -> Rows:
        sp = self.sp
        cut = {}
        if parent_cap < INF:
            cut[sig_of_component(w, sp)] = parent_cap
        return Rows({sp.zero: self.step(w, 0.0)}, cut)

    def node(self, w: int, parent_cap: float, left: Rows, right: Rows) -> Rows:
        """Rows of a vertex of weight ``w`` with exactly two children.

        Child rows already include the cost of cutting their own parent
        edge.  Cut candidates are summed as ``cap + (left + right)`` in both
        pipelines so that they agree to the last bit.
        """
        sp, D = self.sp, self.D
        can_cut = parent_cap < INF
        uncut: dict = {}
        cut: dict = {}
        own = None
        try:
            own = sig_of_component(w, sp)
        except WeightTooLarge:
            pass
        sizes = [(j, rep) for j, rep in sp.classes if rep >= w]
        ys = np.array([min(rep - w, D) for _, rep in sizes], dtype=int)
        units = [sp.unit_vector(j) for j, _ in sizes]

        def close(g: Signature, inner: np.ndarray, extra: float = 0.0) -> None:
            # the component through v is cut off at every admissible size
            for u, val in zip(units, inner.tolist()):
                g2 = sp.add(g, u)
                if g2 is not None:
                    _keep_min(cut, g2, parent_cap + (extra + val))

        # A: both children cut away
        for gl, cl in left.cut.items():
            for gr, cr in right.cut.items():
                g = sp.add(gl, gr)
                if g is None:
                    continue
                s = cl + cr
                uncut.setdefault(g, []).append(self.step(w, s))
                if can_cut and own is not None:
                    g2 = sp.add(g, own)
                    if g2 is not None:
                        _keep_min(cut, g2, parent_cap + s)
        # B: both children stay attached
        for gl, fl in left.uncut.items():
            for gr, fr in right.uncut.items():
                g = sp.add(gl, gr)
                if g is None:
                    continue
                conv = self.convolve(fl, fr)
                uncut.setdefault(g, []).append(self.shifted(conv, w))
                if can_cut and sizes:
                    close(g, self.at(conv, ys))
        # C: left cut, right attached
        for gl, cl in left.cut.items():
            for gr, fr in right.uncut.items():
                g = sp.add(gl, gr)
                if g is None:
                    continue
                uncut.setdefault(g, []).append(self.shifted(fr, w, cl))
                if can_cut and sizes:
                    close(g, self.at(fr, ys), cl)
        # D: right cut, left attached
        for gl, fl in left.uncut.items():
            for gr, cr in right.cut.items():
                g = sp.add(gl, gr)
                if g is None:
                    continue
                uncut.setdefault(g, []).append(self.shifted(fl, w, cr))
                if can_cut and sizes:
                    close(g, self.at(fl, ys), cr)

        out_uncut = {}
        for g, fs in uncut.items():
            f = self.round_row(self.minimum(fs))
            if self.lowest(f) < INF:
                out_uncut[g] = f
        out_cut = {g: self.round_value(c) for g, c in cut.items() if c < INF}
        return Rows(out_uncut, out_cut)

    def vertex(self, w: int, parent_cap: float, kids: Sequence[Rows]) -> Rows:
        d = len(kids)
        if d == 0:
            return self.leaf(w, parent_cap)
        if d == 1:
            return self.node(w, parent_cap, kids[0], self.filler)
        if d == 2:
            return self.node(w, parent_cap, kids[0], kids[1])
        # heap-shaped gadget: slots 0 .. d-2 are inner, d-1+i carries child i
        slot: dict[int, Rows] = {}
        for s in range(2 * d - 2, -1, -1):
            if s >= d - 1:
                slot[s] = self.node(0, INF, kids[s - (d - 1)], self.filler)
            elif s == 0:
                slot[s] = self.node(w, parent_cap, slot[1], slot[2])
            else:
                slot[s] = self.node(0, INF, slot[2 * s + 1], slot[2 * s + 2])
        return slot[0]


# ----------------------------------------------------------------------
# solver


@dataclass
class PartitionResult:
    value: float
    signature: Optional[Signature]
    schedule: Optional[Schedule]
    delta: float
    quality: float = 1.0
    extra: dict = field(default_factory=dict)


class PartitionDP:
    """DP table over a rooted forest, one row set per vertex.

    ``mode`` is ``"exact"`` (integer-grid arrays) or ``"approx"`` (rounded
    PCF rows).  In approx mode ``delta`` defaults to ``ln(1+eps)/(h+1)``
    with ``h`` the binarized height bound (``height_bound`` if given,
    otherwise the current binarized height); ``delta=0`` disables rounding.
    """

    def __init__(
        self,
        topology: RootedTreeTopology,
        weight: Mapping[Hashable, int],
        k: int,
        eps,
        eps_bar,
        mode: str = "approx",
        delta: Optional[float] = None,
        height_bound: Optional[int] = None,
    ):
        if mode not in ("exact", "approx"):
            raise ValueError(f"unknown mode {mode!r}")
        for v in topology.vertices:
            if weight.get(v, 1) not in (0, 1):
                raise CodomainError(f"vertex weights must be 0 or 1, got {weight[v]} at {v!r}")
        self.topology = topology
        self.weight = {v: int(weight.get(v, 1)) for v in topology.vertices}
        self.k = k
        self.eps = as_fraction(eps)
        self.eps_bar = eps_bar
        self.mode = mode
        self.space = SignatureSpace.build(self.eps, k, sum(self.weight.values()))
        caps = [c for c in topology.cap.values()]
        for c in caps:
            if not (c == 0 or c >= 1):
                raise CodomainError(f"capacities must be 0 or at least 1, got {c}")
        total = sum(c for c in caps if c < INF)
        if height_bound is not None:
            topology.height_bound = height_bound
            topology.height_measure = binarized_height
        h = height_bound if height_bound is not None else self.current_height()
        if height_bound is not None and self.current_height() > height_bound:
            raise HeightBoundExceeded(f"height {self.current_height()} > {height_bound}")
        self.h = h
        cfg = None
        if mode == "approx":
            self.delta = math.log1p(float(self.eps)) / (h + 1) if delta is None else float(delta)
            if self.delta > 0:
                cfg = RoundingConfig(self.delta, max(1.0, (1 + float(self.eps)) * total))
        else:
            self.delta = 0.0
        self.cfg = cfg
        self._rec = _Recurrence(self.space, mode == "exact", cfg)
        bound = None if cfg is None else cfg.piece_bound + 1
        self.table = DPTable(h=h, alpha=None if cfg is None else 1 + cfg.delta, p=bound)
        for r in topology.roots():
            for v in topology.postorder(r):
                self.table.add_row(v, topology.children[v], self._proc(v))
        self.table.compute_all()

    def current_height(self) -> int:
        return max((binarized_height(self.topology, r) for r in self.topology.roots()), default=0)

    def _proc(self, v):
        def proc(kids):
            cap = self.topology.parent_cap(v)
            return self._rec.vertex(self.weight[v], 0.0 if cap is None else cap, kids)

        return proc

    def rows(self, v) -> Rows:
        return self.table[v]

    # dynamic operations ----------------------------------------------
    def _refresh(self, touched: list) -> list:
        for v in touched:
            self.table.set_inputs(v, self.topology.children[v])
        return self.table.update_rows(touched)

    def link(self, u, v, cap: float = 1.0) -> list:
        if not (cap == 0 or cap >= 1):
            raise CodomainError(f"capacities must be 0 or at least 1, got {cap}")
        return self._refresh(self.topology.link(u, v, cap))

    def cut(self, u, v) -> list:
        return self._refresh(self.topology.cut(u, v))

    # answers ----------------------------------------------------------
    def root_signatures(self) -> dict:
        """Cheapest cost per signature over the whole forest."""
        sp = self.space
        acc = {sp.zero: 0.0}
        for r in self.topology.roots():
            nxt: dict = {}
            for g, a in acc.items():
                for h, b in self.table[r].cut.items():
                    s = sp.add(g, h)
                    if s is not None:
                        _keep_min(nxt, s, a + b)
            acc = nxt
        return acc

    def query(self) -> PartitionResult:
        best, best_g, best_s = INF, None, None
        for g, val in sorted(self.root_signatures().items(), key=lambda kv: (kv[1], kv[0])):
            if val >= best:
                break
            sched = _cached_schedule(g, self.space, self.eps_bar)
            if sched is not None:
                best, best_g, best_s = val, g, sched
        if best == INF:
            raise Infeasible("no feasible signature has a finite cost")
        return PartitionResult(best, best_g, best_s, self.delta)


@lru_cache(maxsize=1 << 14)
def _cached_schedule(g, sp, eps_bar):
    return schedule_signature(g, sp, eps_bar)


def build_topology(
    vertices: Iterable[Hashable], edges: Iterable[tuple], root=None
) -> RootedTreeTopology:
    return identity_sparsifier(vertices, edges, root).tree


def solve(
    vertices: Sequence[Hashable],
    edges: Sequence[tuple],
    k: int,
    eps,
    eps_bar,
    mode: str = "approx",
    weight: Optional[Mapping[Hashable, int]] = None,
    delta: Optional[float] = None,
) -> PartitionResult:
    """Static solve on a forest given as ``(u, v, cap)`` edges."""
    sparsifier = identity_sparsifier(vertices, edges)
    w = {v: 1 for v in vertices} if weight is None else dict(weight)
    dp = PartitionDP(sparsifier.tree, w, k, eps, eps_bar, mode=mode, delta=delta)
    res = dp.query()
    res.quality = sparsifier.quality
    return res


def solve_value(vertices, edges, k, eps, eps_bar, mode="approx", weight=None) -> float:
    return solve(vertices, edges, k, eps, eps_bar, mode, weight).value


class DynamicPartition:
    """Link/cut maintenance of the approximate DP under a height bound."""

    def __init__(
        self,
        vertices: Sequence[Hashable],
        edges: Sequence[tuple],
        k: int,
        eps,
        eps_bar,
        height_bound: int,
        mode: str = "approx",
        weight: Optional[Mapping[Hashable, int]] = None,
    ):
        topo = build_topology(vertices, edges)
        w = {v: 1 for v in vertices} if weight is None else dict(weight)
        self.dp = PartitionDP(topo, w, k, eps, eps_bar, mode=mode, height_bound=height_bound)

    @property
    def topology(self) -> RootedTreeTopology:
        return self.dp.topology

    def link(self, u, v, cap: float = 1.0) -> list:
        return self.dp.link(u, v, cap)

    def cut(self, u, v) -> list:
        return self.dp.cut(u, v)

    def query(self) -> float:
        return self.dp.query().value


def dyn_link(state: DynamicPartition, u, v, cap: float = 1.0) -> DynamicPartition:
    state.link(u, v, cap)
    return state


def dyn_cut(state: DynamicPartition, u, v) -> DynamicPartition:
    state.cut(u, v)
    return state


def dyn_query(state: DynamicPartition) -> float:
    return state.query()


__all__ = [
    "SignatureSpace",
    "Signature",
    "Rows",
    "Schedule",
    "PartitionResult",
    "PartitionDP",
    "DynamicPartition",
    "as_fraction",
    "sig_of_component",
    "makespan_bound",
    "pack_jobs",
    "schedule_signature",
    "feasible_signatures",
    "build_topology",
    "solve",
    "solve_value",
    "dyn_link",
    "dyn_cut",
    "dyn_query",
]
