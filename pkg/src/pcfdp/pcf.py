"""Piecewise constant functions over a closed real interval.

A :class:`PCF` on ``[lo, hi]`` is stored as its list of pieces
``(x_1, y_1), ..., (x_p, y_p)`` with ``lo < x_1 < ... < x_p = hi``.  The
function takes value ``y_i`` on ``[x_{i-1}, x_i)`` (with ``x_0 = lo``) and
``y_p`` at ``hi`` itself.  Adjacent pieces never share a value.

Values are IEEE doubles; ``math.inf`` and ``-math.inf`` stand for the two
infinities and ``0.0`` for zero (negative zero never survives construction).
Rounded values are produced from integer exponents through
:func:`power`, so equal rounded values are always bit-identical.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CodomainError,
    DomainMismatch,
    EmptyList,
    EmptyPieceList,
    InfMinusInf,
    NegativeShift,
    NonMonotone,
    OutOfDomain,
    PreconditionViolated,
    TagMismatch,
    UnsortedBreakpoints,
)
from .noi import NOISet

INF = math.inf


class Tag(enum.Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"
    GENERAL = "general"

    def flipped(self) -> "Tag":
        if self is Tag.DECREASING:
            return Tag.INCREASING
        if self is Tag.INCREASING:
            return Tag.DECREASING
        return self


def _monotone_as(values: np.ndarray, tag: Tag) -> bool:
    if tag is Tag.GENERAL or len(values) < 2:
        return True
    if tag is Tag.DECREASING:
        return bool(np.all(values[1:] <= values[:-1]))
    return bool(np.all(values[1:] >= values[:-1]))


def _infer_tag(values: np.ndarray) -> Tag:
    if _monotone_as(values, Tag.DECREASING):
        return Tag.DECREASING
    if _monotone_as(values, Tag.INCREASING):
        return Tag.INCREASING
    return Tag.GENERAL


class PCF:
    """Immutable piecewise constant function; see the module docstring."""

    __slots__ = ("lo", "hi", "ends", "values", "tag")

    def __init__(self, lo: float, hi: float, ends: np.ndarray, values: np.ndarray, tag: Tag):
        # Trusted constructor: callers hand over pruned arrays.
        self.lo = float(lo)
        self.hi = float(hi)
        self.ends = ends
        self.values = values
        self.tag = tag
        ends.setflags(write=False)
        values.setflags(write=False)

    # construction -----------------------------------------------------
    @classmethod
    def _pruned(cls, lo: float, hi: float, ends, values, tag: Tag) -> "PCF":
        ends = np.asarray(ends, dtype=float)
        values = np.asarray(values, dtype=float) + 0.0  # folds -0.0 into 0.0
        if len(values) > 1:
            keep = np.ones(len(values), dtype=bool)
            keep[:-1] = values[:-1] != values[1:]
            ends = ends[keep]
            values = values[keep]
        ends = ends.copy()
        ends[-1] = hi
        return cls(lo, hi, ends, values.copy(), tag)

    @classmethod
    def constant(cls, value: float, lo: float, hi: float, tag: Tag = Tag.DECREASING) -> "PCF":
        if not lo < hi:
            raise UnsortedBreakpoints(f"empty domain [{lo}, {hi}]")
        return cls._pruned(lo, hi, [hi], [value], tag)

    # inspection -------------------------------------------------------
    def __len__(self) -> int:
        return len(self.values)

    @property
    def starts(self) -> np.ndarray:
        return np.concatenate(([self.lo], self.ends[:-1]))

    @property
    def pieces(self) -> list[tuple[float, float]]:
        return list(zip(self.ends.tolist(), self.values.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PCF):
            return NotImplemented
        return (
            self.lo == other.lo
            and self.hi == other.hi
            and np.array_equal(self.ends, other.ends)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"({x:g}, {y:g})" for x, y in self.pieces)
        return f"PCF[{self.lo:g}, {self.hi:g}]<{self.tag.value}>({body})"

    def __call__(self, x: float) -> float:
        return eval_at(self, x)

    def at(self, xs) -> np.ndarray:
        """Vectorised evaluation; every point must lie in the domain."""
        xs = np.asarray(xs, dtype=float)
        if xs.size and (xs.min() < self.lo or xs.max() > self.hi):
            raise OutOfDomain(f"points outside [{self.lo}, {self.hi}]")
        idx = np.searchsorted(self.ends, xs, side="right")
        np.minimum(idx, len(self.values) - 1, out=idx)
        return self.values[idx]

    def is_monotone(self, tag: Tag) -> bool:
        return _monotone_as(self.values, tag)


def from_pieces(
    pieces: Iterable[tuple[float, float]],
    lo: float,
    hi: float,
    tag: Tag = Tag.GENERAL,
    allow_neg_inf: bool = False,
) -> PCF:
    """Validate a piece list and return the pruned function."""
    pieces = list(pieces)
    if not pieces:
        raise EmptyPieceList("a PCF needs at least one piece")
    xs = np.array([float(x) for x, _ in pieces])
    ys = np.array([float(y) for _, y in pieces])
    if not lo < xs[0] or np.any(np.diff(xs) <= 0):
        raise UnsortedBreakpoints("breakpoints must increase strictly from lo")
    if xs[-1] != hi:
        raise UnsortedBreakpoints(f"last breakpoint {xs[-1]} differs from hi={hi}")
    if np.any(np.isnan(ys)):
        raise CodomainError("NaN is not a function value")
    if not allow_neg_inf and np.any(ys == -INF):
        raise CodomainError("-inf needs the extended codomain (allow_neg_inf=True)")
    if not _monotone_as(ys, tag):
        raise NonMonotone(f"values violate the {tag.value} tag")
    return PCF._pruned(lo, hi, xs, ys, tag)


def eval_at(f: PCF, x: float) -> float:
    if x < f.lo or x > f.hi or x != x:
        raise OutOfDomain(f"{x} outside [{f.lo}, {f.hi}]")
    i = int(np.searchsorted(f.ends, x, side="right"))
    if i >= len(f.values):
        i = len(f.values) - 1
    return float(f.values[i])


# ----------------------------------------------------------------------
# pointwise operations


def _same_domain(g: PCF, h: PCF) -> None:
    if g.lo != h.lo or g.hi != h.hi:
        raise DomainMismatch(f"[{g.lo}, {g.hi}] vs [{h.lo}, {h.hi}]")


def _common_monotone_tag(fs: Sequence[PCF]) -> Tag:
    """The shared monotone direction; single-piece functions fit either."""
    tags = {f.tag for f in fs if len(f) > 1}
    if not tags:
        tags = {f.tag for f in fs} - {Tag.GENERAL} or {Tag.DECREASING}
    if len(tags) != 1 or Tag.GENERAL in tags:
        raise TagMismatch("operands must all be decreasing or all be increasing")
    return tags.pop()


def _on_merged_breakpoints(g: PCF, h: PCF) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ends = np.union1d(g.ends, h.ends)
    starts = np.concatenate(([g.lo], ends[:-1]))
    return ends, g.at(starts), h.at(starts)


def min2(g: PCF, h: PCF) -> PCF:
    """Pointwise minimum of two functions monotone in the same direction."""
    _same_domain(g, h)
    tag = _common_monotone_tag([g, h])
    ends, gv, hv = _on_merged_breakpoints(g, h)
    out = PCF._pruned(g.lo, g.hi, ends, np.minimum(gv, hv), tag)
    assert len(out) <= len(g) + len(h)
    return out


def multimin(fs: Sequence[PCF]) -> PCF:
    """Pointwise minimum of many same-direction monotone functions.

    All pieces are swept in order of their left end; the current value of
    every input is tracked and a lazy heap yields the running minimum.
    """
    fs = list(fs)
    if not fs:
        raise EmptyList("multimin of nothing")
    if len(fs) == 1:
        return fs[0]
    for f in fs[1:]:
        _same_domain(fs[0], f)
    tag = _common_monotone_tag(fs)
    lo, hi = fs[0].lo, fs[0].hi
    starts = np.concatenate([f.starts for f in fs])
    vals = np.concatenate([f.values for f in fs])
    owner = np.concatenate([np.full(len(f), k) for k, f in enumerate(fs)])
    order = np.lexsort((owner, starts))
    starts, vals, owner = starts[order], vals[order], owner[order]

    if tag is Tag.DECREASING:
        # every input only decreases, so the minimum is a running minimum
        run = np.minimum.accumulate(vals)
    else:
        run = np.empty(len(vals))
        current = np.full(len(fs), INF)
        heap: list[tuple[float, int]] = []
        for t in range(len(vals)):
            k = int(owner[t])
            current[k] = vals[t]
            heapq.heappush(heap, (float(vals[t]), k))
            while heap[0][0] != current[heap[0][1]]:
                heapq.heappop(heap)
            run[t] = heap[0][0]
    # the value after the last event at each distinct start wins
    last = np.ones(len(starts), dtype=bool)
    last[:-1] = starts[:-1] != starts[1:]
    piece_starts, piece_vals = starts[last], run[last]
    ends = np.concatenate((piece_starts[1:], [hi]))
    return PCF._pruned(lo, hi, ends, piece_vals, tag)


def add(g: PCF, h: PCF) -> PCF:
    _same_domain(g, h)
    ends, gv, hv = _on_merged_breakpoints(g, h)
    if np.any(((gv == INF) & (hv == -INF)) | ((gv == -INF) & (hv == INF))):
        raise InfMinusInf("+inf and -inf meet in add")
    vals = gv + hv
    tag = g.tag if g.tag is h.tag else _infer_tag(vals)
    out = PCF._pruned(g.lo, g.hi, ends, vals, tag)
    assert len(out) <= len(g) + len(h)
    return out


def add_constant(g: PCF, c: float) -> PCF:
    if c == 0:
        return g
    if np.isinf(c) and np.any(g.values == -c):
        raise InfMinusInf("+inf and -inf meet in add_constant")
    return PCF._pruned(g.lo, g.hi, g.ends, g.values + c, g.tag)


def shift(g: PCF, c: float, fill: float | None = None) -> PCF:
    """``x -> g(x - c)`` on the same domain, ``fill`` left of ``lo + c``.

    ``fill`` defaults to ``g(lo)``.  Pieces pushed past ``hi`` are dropped.
    """
    if c < 0:
        raise NegativeShift(f"shift by {c}")
    if c == 0:
        return g
    if fill is None:
        fill = float(g.values[0])
    cut = g.lo + c
    if cut >= g.hi:
        return PCF.constant(fill, g.lo, g.hi, g.tag)
    starts = g.starts + c
    keep = starts < g.hi
    ends = np.concatenate(([cut], (g.ends + c)[keep]))
    vals = np.concatenate(([fill], g.values[keep]))
    ends[-1] = g.hi
    tag = g.tag if _monotone_as(vals, g.tag) else Tag.GENERAL
    out = PCF._pruned(g.lo, g.hi, ends, vals, tag)
    assert fill != g.values[0] or len(out) <= len(g)
    return out


def restrict(g: PCF, lo: float, hi: float) -> PCF:
    """Restriction to ``[lo, hi]``; at a new right end the left limit is kept."""
    if lo < g.lo or hi > g.hi or not lo < hi:
        raise OutOfDomain(f"[{lo}, {hi}] not inside [{g.lo}, {g.hi}]")
    starts = g.starts
    keep = (g.ends > lo) & (starts < hi)
    ends = g.ends[keep].copy()
    ends[-1] = hi
    return PCF._pruned(lo, hi, ends, g.values[keep], g.tag)


def translate(g: PCF, c: float) -> PCF:
    """``x -> g(x - c)`` with the domain moved along to ``[lo + c, hi + c]``."""
    if c == 0:
        return g
    return PCF(g.lo + c, g.hi + c, (g.ends + c).copy(), g.values.copy(), g.tag)


def reframe(g: PCF, lo: float, hi: float, left_fill: float, right_fill: float) -> PCF:
    """``g`` read on a new domain ``[lo, hi]``.

    Points left of ``g.lo`` take ``left_fill`` and points right of
    ``g.hi`` take ``right_fill``; inside the old domain ``g`` is unchanged.
    """
    if not lo < hi:
        raise UnsortedBreakpoints(f"empty domain [{lo}, {hi}]")
    ends: list[float] = []
    vals: list[float] = []
    if lo < g.lo:
        ends.append(min(g.lo, hi))
        vals.append(left_fill)
    if g.lo < hi and g.hi > lo:
        for e, y, s in zip(g.ends.tolist(), g.values.tolist(), g.starts.tolist()):
            if e <= lo or s >= hi:
                continue
            ends.append(min(e, hi))
            vals.append(y)
    if hi > g.hi:
        # g's closed right end becomes an ordinary boundary: right_fill
        # takes over just after it
        ends.append(hi)
        vals.append(right_fill)
    elif ends:
        ends[-1] = hi
    vals_arr = np.asarray(vals, dtype=float)
    tag = g.tag if _monotone_as(vals_arr, g.tag) else _infer_tag(vals_arr)
    return PCF._pruned(lo, hi, ends, vals_arr, tag)


def negate(g: PCF) -> PCF:
    return PCF._pruned(g.lo, g.hi, g.ends, -g.values, g.tag.flipped())


# ----------------------------------------------------------------------
# rounding


@dataclass(frozen=True)
class RoundingConfig:
    delta: float
    W: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.W >= 1:
            raise ValueError("W must be at least 1")

    @property
    def piece_bound(self) -> int:
        return 2 + math.ceil(math.log(self.W) / math.log1p(self.delta))


@lru_cache(maxsize=1 << 16)
def power(base: float, i: int) -> float:
    """``base**i`` by repeated squaring; the canonical rounded value."""
    if i < 0:
        return 1.0 / power(base, -i)
    result, b = 1.0, base
    while i:
        if i & 1:
            result *= b
        b *= b
        i >>= 1
    return result


def ceil_exponent(y: float, base: float) -> int:
    """Smallest ``i >= 0`` with ``power(base, i) >= y`` (for finite ``y > 0``)."""
    if y <= 1.0:
        return 0
    i = max(0, int(math.log(y) / math.log(base)) - 1)
    while power(base, i) < y:
        i += 1
    while i > 0 and power(base, i - 1) >= y:
        i -= 1
    return i


def floor_exponent(y: float, base: float) -> int:
    """Largest ``i >= 0`` with ``power(base, i) <= y`` (for finite ``y >= 1``)."""
    i = max(0, int(math.log(y) / math.log(base)) - 1)
    while power(base, i + 1) <= y:
        i += 1
    while i > 0 and power(base, i) > y:
        i -= 1
    return i


def ceil_pow(y: float, base: float) -> float:
    if y == 0.0 or y == INF:
        return y
    if not y >= 1.0:
        raise CodomainError(f"{y} lies outside {{0}} u [1, inf]")
    return power(base, ceil_exponent(y, base))


def round_up_pow(g: PCF, cfg: RoundingConfig) -> PCF:
    """Round every value up to the next power of ``1 + delta``."""
    if g.tag is Tag.GENERAL and len(g) > 1:
        raise NonMonotone("round_up_pow needs a monotone function")
    base = 1.0 + cfg.delta
    uniq, inverse = np.unique(g.values, return_inverse=True)
    rounded = np.array([ceil_pow(float(v), base) for v in uniq])
    out = PCF._pruned(g.lo, g.hi, g.ends, rounded[inverse], g.tag)
    finite = g.values[np.isfinite(g.values)]
    if finite.size == 0 or finite.max() <= cfg.W:
        # 0, +inf and every exponent 0 .. ceil(log W) may all occur at once
        assert len(out) <= cfg.piece_bound + 1
    return out


def floor_mult(y: float, delta: float) -> float:
    """Largest multiple ``i * delta`` not exceeding ``y``; infinities stay."""
    if y == INF or y == -INF:
        return y
    i = math.floor(y / delta)
    while (i + 1) * delta <= y:
        i += 1
    while i * delta > y:
        i -= 1
    return i * delta + 0.0


def round_down_mult(g: PCF, delta: float) -> PCF:
    if not delta > 0:
        raise ValueError("delta must be positive")
    uniq, inverse = np.unique(g.values, return_inverse=True)
    rounded = np.array([floor_mult(float(v), delta) for v in uniq])
    return PCF._pruned(g.lo, g.hi, g.ends, rounded[inverse], g.tag)


# ----------------------------------------------------------------------
# convolutions


@dataclass(frozen=True)
class ConvWitness:
    """Which operand pieces produced each segment of a convolution.

    Segments are kept before pruning, so each carries exactly one pair
    ``(i, j)`` of piece indices (into ``f1`` and ``f2``).  Coordinates are
    relative to ``offset = f1.lo + f2.lo``.
    """

    offset: float
    seg_ends: np.ndarray
    first: np.ndarray
    second: np.ndarray

    def pair_at(self, x: float) -> tuple[int, int]:
        k = int(np.searchsorted(self.seg_ends, x - self.offset, side="right"))
        k = min(k, len(self.seg_ends) - 1)
        return int(self.first[k]), int(self.second[k])


def _is_dec(f: PCF) -> bool:
    return f.tag is Tag.DECREASING or len(f) == 1


def _pair_sums(y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
    bad = (np.isposinf(y1)[:, None] & np.isneginf(y2)[None, :]) | (
        np.isneginf(y1)[:, None] & np.isposinf(y2)[None, :]
    )
    if bad.any():
        raise InfMinusInf("+inf and -inf meet in a convolution")
    return y1[:, None] + y2[None, :]


def convolve_monotone(f1: PCF, f2: PCF, hi: float | None = None) -> tuple[PCF, ConvWitness]:
    """(min,+)-convolution by sorting piece pairs on their value sum.

    Pairs are visited by increasing ``y1_i + y2_j`` (ties in ``(i, j)``
    order).  A pair whose earliest reachable point ``s1_i + s2_j`` lies left
    of everything assigned so far claims the stretch up to that frontier.

    The result lives on ``[f1.lo + f2.lo, hi]``.  By default ``hi`` is
    ``f1.hi + f2.hi`` when both operands decrease, otherwise the shorter
    operand's length is used so no operand is read past its domain.  A
    decreasing operand is extended by its last value where needed, which
    is harmless exactly when the partner is decreasing too.  If ``hi`` cuts
    the natural domain short, the value at ``hi`` is the left limit.
    """
    dec1, dec2 = _is_dec(f1), _is_dec(f2)
    if not (dec1 or dec2):
        raise PreconditionViolated("one operand must be decreasing")
    lo = f1.lo + f2.lo
    len1, len2 = f1.hi - f1.lo, f2.hi - f2.lo
    if hi is None:
        length = len1 + len2 if dec1 and dec2 else min(len1, len2)
    else:
        length = hi - lo
        if not 0 < length <= len1 + len2:
            raise OutOfDomain(f"result end {hi} outside ({lo}, {f1.hi + f2.hi}]")
    if (length > len1 and not dec2) or (length > len2 and not dec1):
        raise PreconditionViolated("extending an operand needs a decreasing partner")

    s1 = f1.starts - f1.lo
    s2 = f2.starts - f2.lo
    n1 = int(np.searchsorted(s1, length, side="left"))
    n2 = int(np.searchsorted(s2, length, side="left"))
    s1, s2 = s1[:n1], s2[:n2]
    sums = _pair_sums(f1.values[:n1], f2.values[:n2]).ravel()
    reach = (s1[:, None] + s2[None, :]).ravel()
    ii = np.repeat(np.arange(n1), n2)
    jj = np.tile(np.arange(n2), n1)
    order = np.lexsort((jj, ii, sums))
    reach_sorted = reach[order]
    frontier = np.minimum.accumulate(np.concatenate(([length], reach_sorted)))[:-1]
    claims = reach_sorted < frontier
    picked = order[claims]
    seg_ends = frontier[claims][::-1].copy()
    seg_vals = sums[picked][::-1]
    first = ii[picked][::-1].copy()
    second = jj[picked][::-1].copy()
    seg_ends[-1] = length
    tag = Tag.DECREASING if dec1 and dec2 else _infer_tag(seg_vals)
    out = PCF._pruned(lo, lo + length, seg_ends + lo, seg_vals, tag)
    assert len(out) <= len(f1) * len(f2)
    witness = ConvWitness(lo, seg_ends, first, second)
    return out, witness


def _piece_bounds(f: PCF, i: int) -> tuple[float, float, bool]:
    """Relative start, end and whether the end is closed for piece ``i``."""
    start = (f.lo if i == 0 else f.ends[i - 1]) - f.lo
    end = f.ends[i] - f.lo
    return float(start), float(end), i == len(f) - 1


def witness_argmin(f: PCF, w: ConvWitness, f1: PCF, f2: PCF, x: float) -> float:
    """A split point ``xb`` with ``f(x) == f1(xb) + f2(x - xb)``.

    Starts from the producing pair's left corner and, when the remainder
    overshoots the second piece, slides right by the overshoot and then by
    half of the remaining slack.  The identity is re-checked by evaluation;
    a scan over breakpoint-derived candidates backs up the rare float edge
    case.
    """
    target = eval_at(f, x)
    xt = x - w.offset
    i, j = w.pair_at(x)
    s1, e1, closed1 = _piece_bounds(f1, i)
    s2, e2, closed2 = _piece_bounds(f2, j)
    rest = xt - s1
    if rest < e2 or (closed2 and rest <= e2):
        xb = s1
    elif closed2:
        xb = s1 + (rest - e2)
    else:
        over = rest - e2
        xb = s1 + over + 0.5 * min(e1 - (s1 + over), e2 - s2)
    cand = f1.lo + xb
    if _split_ok(f1, f2, x, cand, target):
        return cand
    for cand in _split_candidates(f1, f2, x):
        if _split_ok(f1, f2, x, cand, target):
            return cand
    raise AssertionError(f"no split reproduces f({x}) = {target}")


def _split_ok(f1: PCF, f2: PCF, x: float, xb: float, target: float) -> bool:
    rest = x - xb
    if not (f1.lo <= xb <= f1.hi and f2.lo <= rest <= f2.hi):
        return False
    return eval_at(f1, xb) + eval_at(f2, rest) == target


def _split_candidates(f1: PCF, f2: PCF, x: float) -> list[float]:
    pts = set(np.concatenate((f1.starts, f1.ends, x - f2.starts, x - f2.ends)).tolist())
    pts.update((f1.lo, f1.hi, x - f2.lo, x - f2.hi))
    lo = max(f1.lo, x - f2.hi)
    hi = min(f1.hi, x - f2.lo)
    pts = sorted(p for p in pts if lo <= p <= hi)
    mids = [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    return pts + mids


def convolve_general(f1: PCF, f2: PCF, lattice: bool = False) -> PCF:
    """(min,+)-convolution without monotonicity assumptions.

    Every pair of pieces spans a stretch of reachable points; stretches
    are visited by increasing value and each claims whatever part of it is
    still unassigned, found through a :class:`NOISet` of assigned ranges.

    With ``lattice=True`` both operands are read as sequences, entry ``k``
    being the value on ``[k, k + 1)`` with integer breakpoints.  The result
    is then the sequence convolution ``c_k = min_i a_i + b_{k-i}``, which is
    what vector pipelines need; the continuous product would blend
    neighbouring indices.
    """
    lo = f1.lo + f2.lo
    length = (f1.hi - f1.lo) + (f2.hi - f2.lo)
    trim = 0.0
    if lattice:
        for f in (f1, f2):
            if f.lo != int(f.lo) or np.any(f.ends != np.floor(f.ends)):
                raise PreconditionViolated("lattice mode needs integer breakpoints")
        trim = 1.0
        length -= 1.0
    s1 = f1.starts - f1.lo
    e1 = f1.ends - f1.lo
    s2 = f2.starts - f2.lo
    e2 = f2.ends - f2.lo
    sums = _pair_sums(f1.values, f2.values).ravel()
    begin = (s1[:, None] + s2[None, :]).ravel()
    finish = (e1[:, None] + e2[None, :]).ravel() - trim
    ii = np.repeat(np.arange(len(f1)), len(f2))
    jj = np.tile(np.arange(len(f2)), len(f1))
    order = np.lexsort((jj, ii, sums))

    covered = NOISet()
    seg_start: list[float] = []
    seg_end: list[float] = []
    seg_val: list[float] = []
    for k in order.tolist():
        a, b, val = float(begin[k]), float(finish[k]), float(sums[k])
        if not a < b:
            continue
        z = a
        while z < b:
            hit = covered.closest_larger(z, strict=True)
            if hit is None or hit[0] >= b:
                seg_start.append(z)
                seg_end.append(b)
                seg_val.append(val)
                break
            ca, cb = hit
            if ca > z:
                seg_start.append(z)
                seg_end.append(ca)
                seg_val.append(val)
            z = cb
        covered.insert(a, b)
        if covered.covers(0.0, length):
            break
    order2 = np.argsort(seg_start, kind="stable")
    starts = np.asarray(seg_start)[order2]
    ends = np.asarray(seg_end)[order2]
    vals = np.asarray(seg_val)[order2]
    assert starts[0] == 0.0 and np.all(starts[1:] == ends[:-1]) and ends[-1] >= length
    keep = starts < length
    ends, vals = ends[keep], vals[keep]
    ends[-1] = length
    out = PCF._pruned(lo, lo + length, ends + lo, vals, _infer_tag(vals))
    assert len(out) <= (len(f1) + 1) * (len(f2) + 1)
    return out


def maxplus_convolve(f1: PCF, f2: PCF, hi: float | None = None) -> tuple[PCF, ConvWitness]:
    """(max,+)-convolution of increasing functions via negation.

    No additive offset is applied before the (min,+) sweep: the sweep only
    compares sums, so negative values are fine and the results stay exact.
    """
    for f in (f1, f2):
        if f.tag is not Tag.INCREASING and len(f) > 1:
            raise PreconditionViolated("(max,+) needs increasing operands")
    g, w = convolve_monotone(negate(f1), negate(f2), hi)
    return negate(g), w


def minminus_convolve(f: PCF, g: PCF, lattice: bool = False) -> PCF:
    """``x -> min over xb of f(xb) - g(x - xb)``, i.e. ``f (+) (-g)``."""
    return convolve_general(f, negate(g), lattice=lattice)


def maxminus_convolve(f: PCF, g: PCF, lattice: bool = False) -> PCF:
    """``x -> max over xb of f(xb) - g(x - xb)``, i.e. ``-((-f) (+) g)``."""
    return negate(convolve_general(negate(f), g, lattice=lattice))


__all__ = [
    "INF",
    "Tag",
    "PCF",
    "RoundingConfig",
    "ConvWitness",
    "from_pieces",
    "eval_at",
    "min2",
    "multimin",
    "add",
    "add_constant",
    "shift",
    "restrict",
    "translate",
    "reframe",
    "negate",
    "power",
    "ceil_exponent",
    "floor_exponent",
    "ceil_pow",
    "round_up_pow",
    "floor_mult",
    "round_down_mult",
    "convolve_monotone",
    "witness_argmin",
    "convolve_general",
    "maxplus_convolve",
    "minminus_convolve",
    "maxminus_convolve",
]
