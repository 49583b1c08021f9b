"""Approximate dynamic programming over monotone piecewise constant functions."""

from .errors import Infeasible, PcfdpError
from .knapsack import FastKnapsack, KnapsackTree
from .necklace import DynamicNecklace, neck_static
from .partition import DynamicPartition, PartitionDP
from .pcf import INF, PCF, Tag, from_pieces
from .source_location import SSLDP, DynamicSSL

__all__ = [
    "INF",
    "PCF",
    "Tag",
    "from_pieces",
    "PcfdpError",
    "Infeasible",
    "KnapsackTree",
    "FastKnapsack",
    "PartitionDP",
    "DynamicPartition",
    "SSLDP",
    "DynamicSSL",
    "DynamicNecklace",
    "neck_static",
]
