"""Ubiquity of oriented rays: classifier, packing machinery and
counterexample constructions at finite scale."""

from .digraph import Digraph, DigraphBuilder, Embedding, RayLabel
from .rays import (AllIn, AllOut, Growing, Orientation, Periodic, RaySpec, Verdict, classify,
                   format_spec, parse_spec, reverse)

__all__ = [
    "AllIn", "AllOut", "Digraph", "DigraphBuilder", "Embedding", "Growing", "Orientation",
    "Periodic", "RayLabel", "RaySpec", "Verdict", "classify", "format_spec", "parse_spec",
    "reverse",
]
