"""Fixed small-graph corpus used by tests and experiment scripts.

* every connected graph on 1..6 vertices (143 graphs, from the networkx atlas);
* every 15th connected 7-vertex atlas graph (57 graphs);
* six named 8-vertex graphs.
"""

from __future__ import annotations

from functools import lru_cache

import networkx as nx

from .graph_core import Graph, generate_graph, parse_graph_spec

N7_STRIDE = 15


def _from_nx(G: nx.Graph) -> Graph:
    return Graph.from_edges(G.number_of_nodes(), [(int(u), int(v)) for u, v in G.edges()])


@lru_cache(maxsize=1)
def _atlas() -> tuple[tuple[str, Graph], ...]:
    out = []
    n7 = 0
    for i, G in enumerate(nx.graph_atlas_g()):
        n = G.number_of_nodes()
        if n == 0 or not nx.is_connected(G):
            continue
        if n == 7:
            n7 += 1
            if (n7 - 1) % N7_STRIDE:
                continue
        out.append((f"atlas{i}", _from_nx(G)))
    return tuple(out)


@lru_cache(maxsize=1)
def _named8() -> tuple[tuple[str, Graph], ...]:
    cube = _from_nx(nx.convert_node_labels_to_integers(nx.hypercube_graph(3), ordering="sorted"))
    return (
        ("cycle8", parse_graph_spec("cycle:8")),
        ("path8", parse_graph_spec("path:8")),
        ("grid2x4", parse_graph_spec("grid:2x4")),
        ("cube", cube),
        ("star7", parse_graph_spec("star:7")),
        ("tree8", generate_graph("random_tree", {"n": 8}, seed=7)),
    )


def corpus(max_n: int = 8, min_n: int = 1) -> list[tuple[str, Graph]]:
    """Named corpus graphs with min_n <= n <= max_n, in a fixed order."""
    items = list(_atlas()) + list(_named8())
    return [(name, g) for name, g in items if min_n <= g.n <= max_n]
