"""l-infinity alignment of two necklaces with additive error ``eps``.

Beads are sorted reals in ``[0, 1)``.  For a shift ``s`` let
``z(s)_i = x_i - y_{(i+s) mod n}``; the best offset for that shift makes
the cost ``(max z(s) - min z(s)) / 2``, attained at
``c = -(max z(s) + min z(s)) / 2``, and the answer is the cheapest shift.

Every bead is rounded down to a multiple of ``delta = eps / 2``, so each
vector is stored as runs of equal rounded values: at most ``2/eps`` runs,
independent of the number of beads.  The spreads for all shifts come
from two sequence convolutions:

* ``a = (min,-)(x padded with +inf, y reversed and doubled)``,
* ``b = (max,-)(x padded with -inf, y reversed and doubled)``,

with ``min z(s) = a[2n-s-1]`` and ``max z(s) = b[2n-s-1]``.  Rounding moves
every difference by less than ``delta``, so the rounded half-spread is
within ``delta`` of the true one; the reported value adds ``delta`` and
therefore lies in ``[OPT, OPT + eps]``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BadEpsilon, CodomainError, IndexOutOfRange, LengthMismatch, UnsortedBeads, WouldUnsort
from .pcf import INF, PCF, Tag, floor_mult, from_pieces, maxminus_convolve, minminus_convolve


@dataclass(frozen=True)
class AlignmentResult:
    value: float
    offset: Optional[float]
    shift: Optional[int]


def _check_eps(eps: float) -> float:
    if not (eps > 0 and math.isfinite(eps)):
        raise BadEpsilon(f"eps must be positive, got {eps}")
    return float(eps)


def _check_bead(b: float) -> float:
    b = float(b)
    if not 0.0 <= b < 1.0:
        raise CodomainError(f"beads lie in [0, 1), got {b}")
    return b


class Runs:
    """A sorted vector kept as ``(value, count)`` runs of rounded beads."""

    def __init__(self):
        self.values: list[float] = []
        self.counts: list[int] = []

    @classmethod
    def from_rounded(cls, beads: Sequence[float]) -> "Runs":
        r = cls()
        for b in beads:
            if r.values and r.values[-1] == b:
                r.counts[-1] += 1
            else:
                r.values.append(b)
                r.counts.append(1)
        return r

    def __len__(self) -> int:
        return sum(self.counts)

    @property
    def pieces(self) -> int:
        return len(self.values)

    def expand(self) -> list[float]:
        return [v for v, c in zip(self.values, self.counts) for _ in range(c)]

    def span(self, value: float) -> tuple[int, int]:
        """Positions ``[first, last)`` that beads rounded to ``value`` occupy or would occupy."""
        k = bisect.bisect_left(self.values, value)
        first = sum(self.counts[:k])
        if k < len(self.values) and self.values[k] == value:
            return first, first + self.counts[k]
        return first, first

    def insert(self, value: float) -> None:
        k = bisect.bisect_left(self.values, value)
        if k < len(self.values) and self.values[k] == value:
            self.counts[k] += 1
        else:
            self.values.insert(k, value)
            self.counts.insert(k, 1)

    def delete_at(self, i: int) -> None:
        pos = 0
        for k, c in enumerate(self.counts):
            if i < pos + c:
                if c == 1:
                    del self.values[k]
                    del self.counts[k]
                else:
                    self.counts[k] -= 1
                return
            pos += c
        raise IndexOutOfRange(i)

    def as_sequence(self, lo: float = 0.0) -> list[tuple[float, float]]:
        """Pieces ``(end, value)`` of the sequence starting at ``lo``."""
        out, pos = [], lo
        for v, c in zip(self.values, self.counts):
            pos += c
            out.append((pos, v))
        return out

    def copy(self) -> "Runs":
        r = Runs()
        r.values = list(self.values)
        r.counts = list(self.counts)
        return r


def _padded(x: Runs, fill: float) -> PCF:
    n = len(x)
    pieces = x.as_sequence() + [(2 * n, fill)]
    return from_pieces(pieces, 0.0, 2 * n, Tag.GENERAL, allow_neg_inf=True)


def _reversed_doubled(y: Runs) -> PCF:
    n = len(y)
    pieces, pos = [], 0
    for _ in range(2):
        for v, c in zip(reversed(y.values), reversed(y.counts)):
            pos += c
            pieces.append((pos, v))
    return from_pieces(pieces, 0.0, 2 * n, Tag.GENERAL)


def _align_runs(x: Runs, y: Runs, delta: float) -> AlignmentResult:
    n = len(x)
    if n == 0:
        return AlignmentResult(0.0, None, None)
    yy = _reversed_doubled(y)
    a = minminus_convolve(_padded(x, INF), yy, lattice=True)
    b = maxminus_convolve(_padded(x, -INF), yy, lattice=True)
    idx = np.array([2 * n - s - 1 for s in range(n)], dtype=float)
    lo, hi = a.at(idx), b.at(idx)
    v = 0.5 * (hi - lo)
    s = int(np.argmin(v))
    return AlignmentResult(float(v[s]) + delta, -0.5 * float(lo[s] + hi[s]), s)


def _rounded(beads: Sequence[float], delta: float) -> list[float]:
    out = [floor_mult(_check_bead(b), delta) for b in beads]
    if any(p > q for p, q in zip(beads, beads[1:])):
        raise UnsortedBeads("beads must be sorted")
    return out


def neck_static(x: Sequence[float], y: Sequence[float], eps: float) -> AlignmentResult:
    """Alignment value within ``[OPT, OPT + eps]`` with a witness offset and shift."""
    eps = _check_eps(eps)
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} beads against {len(y)}")
    delta = eps / 2
    return _align_runs(Runs.from_rounded(_rounded(x, delta)), Runs.from_rounded(_rounded(y, delta)), delta)


class DynamicNecklace:
    """Insertions and deletions of bead pairs, storing only rounded runs."""

    def __init__(self, eps: float):
        self.eps = _check_eps(eps)
        self.delta = self.eps / 2
        self.x = Runs()
        self.y = Runs()

    def __len__(self) -> int:
        return len(self.x)

    @property
    def piece_bound(self) -> int:
        return math.ceil(2 / self.eps) + 2

    def piece_counts(self) -> tuple[int, int]:
        return self.x.pieces, self.y.pieces

    def insert(self, i: int, alpha: float, beta: float) -> None:
        """Put ``alpha`` at position ``i`` of x and ``beta`` at position ``i`` of y.

        Only rounded values are stored, so order is checked against them.
        """
        n = len(self)
        if not 0 <= i <= n:
            raise IndexOutOfRange(f"position {i} outside 0..{n}")
        ra = floor_mult(_check_bead(alpha), self.delta)
        rb = floor_mult(_check_bead(beta), self.delta)
        for runs, r, name in ((self.x, ra, "x"), (self.y, rb, "y")):
            first, last = runs.span(r)
            if not first <= i <= last:
                raise WouldUnsort(f"{name} would not stay sorted with {r} at position {i}")
        self.x.insert(ra)
        self.y.insert(rb)

    def delete(self, i: int) -> None:
        n = len(self)
        if not 0 <= i < n:
            raise IndexOutOfRange(f"position {i} outside 0..{n - 1}")
        self.x.delete_at(i)
        self.y.delete_at(i)

    def query(self) -> AlignmentResult:
        return _align_runs(self.x, self.y, self.delta)


def neck_insert(state: DynamicNecklace, i: int, alpha: float, beta: float) -> DynamicNecklace:
    state.insert(i, alpha, beta)
    return state


def neck_delete(state: DynamicNecklace, i: int) -> DynamicNecklace:
    state.delete(i)
    return state


def neck_query(state: DynamicNecklace) -> AlignmentResult:
    return state.query()


__all__ = [
    "AlignmentResult",
    "Runs",
    "DynamicNecklace",
    "neck_static",
    "neck_insert",
    "neck_delete",
    "neck_query",
]
