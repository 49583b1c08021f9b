"""Exception hierarchy shared by every solver in the package."""

from __future__ import annotations


class PcfdpError(Exception):
    """Base class for all errors raised by this package."""


# Piecewise constant functions
class EmptyPieceList(PcfdpError, ValueError):
    pass


class UnsortedBreakpoints(PcfdpError, ValueError):
    pass


class NonMonotone(PcfdpError, ValueError):
    pass


class OutOfDomain(PcfdpError, ValueError):
    pass


class DomainMismatch(PcfdpError, ValueError):
    pass


class TagMismatch(PcfdpError, ValueError):
    pass


class NegativeShift(PcfdpError, ValueError):
    pass


class InfMinusInf(PcfdpError, ArithmeticError):
    """A sum of +inf and -inf was requested."""


class CodomainError(PcfdpError, ValueError):
    """A value lies outside the codomain an operation accepts."""


class PreconditionViolated(PcfdpError, ValueError):
    pass


class EmptyList(PcfdpError, ValueError):
    pass


class EmptyInterval(PcfdpError, ValueError):
    pass


# DP engine and tree topology
class CycleDetected(PcfdpError):
    pass


class PieceBoundExceeded(PcfdpError):
    """A row procedure returned more pieces than it declared."""


class UnknownRow(PcfdpError, KeyError):
    pass


class WouldCreateCycle(PcfdpError, ValueError):
    pass


class NoSuchEdge(PcfdpError, KeyError):
    pass


class NotATree(PcfdpError, ValueError):
    pass


class HeightBoundExceeded(PcfdpError):
    pass


# Applications
class BadEpsilon(PcfdpError, ValueError):
    pass


class UnknownItem(PcfdpError, KeyError):
    pass


class StaleQuery(PcfdpError):
    """Solution or membership asked for before a fresh value query."""


class Infeasible(PcfdpError):
    pass


class WeightTooLarge(PcfdpError, ValueError):
    pass


class UnsortedBeads(PcfdpError, ValueError):
    pass


class LengthMismatch(PcfdpError, ValueError):
    pass


class WouldUnsort(PcfdpError, ValueError):
    pass


class IndexOutOfRange(PcfdpError, IndexError):
    pass


class BudgetExceeded(PcfdpError):
    """An oracle was handed an instance above its size budget."""
