"""Shared-memory parallel n-level hypergraph partitioner for the connectivity objective."""

from .core import (
    HypergraphError,
    PartitionState,
    StaticHypergraph,
    connectivity_objective,
    gain,
    imbalance,
    load_hmetis,
    validate_partition,
    write_hmetis,
)
from .dynamic import DynamicHypergraph

__all__ = [
    "HypergraphError",
    "PartitionState",
    "StaticHypergraph",
    "DynamicHypergraph",
    "connectivity_objective",
    "gain",
    "imbalance",
    "load_hmetis",
    "validate_partition",
    "write_hmetis",
]
