"""Leader election and topology recognition in anonymous colored networks."""

from __future__ import annotations

from .netmodel import Coloring, NetworkError, PortNetwork, QuotientGraph, parse_network, serialize_network
from .oracle import oracle_solve, quotient, stable_partition
from .protocol import LeaderPath, Topology, Unsolvable, run_protocol

__all__ = [
    "Coloring",
    "LeaderPath",
    "NetworkError",
    "PortNetwork",
    "QuotientGraph",
    "Topology",
    "Unsolvable",
    "oracle_solve",
    "parse_network",
    "quotient",
    "run_protocol",
    "serialize_network",
    "stable_partition",
]
