"""Spectral-independence toolkit for two-spin Gibbs distributions on small graphs."""

from .certify import certify_report
from .gibbs import BoundaryCondition, GibbsParams
from .graph_core import Graph, generate_graph, load_graph, parse_graph_spec
from .influence import influence_bruteforce, influence_via_saw, spectral_independence_eta

__all__ = [
    "BoundaryCondition",
    "GibbsParams",
    "Graph",
    "certify_report",
    "generate_graph",
    "influence_bruteforce",
    "influence_via_saw",
    "load_graph",
    "parse_graph_spec",
    "spectral_independence_eta",
]
