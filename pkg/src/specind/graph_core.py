"""Graphs, generators, ingestion and structural matrices."""

from __future__ import annotations

import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DisconnectedGraph, DuplicateEdge, InvalidParams, ParseError, SelfLoop

MAX_RETRIES = 1000


def _components(n: int, adj: Sequence[Sequence[int]]) -> int:
    seen = [False] * n
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return count


@dataclass(frozen=True)
class Graph:
    """Simple connected undirected graph on vertices 0..n-1."""

    n: int
    adj: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParams("graph needs at least one vertex")
        if len(self.adj) != self.n:
            raise InvalidParams("adjacency length differs from n")
        edges = []
        for v, nb in enumerate(self.adj):
            if list(nb) != sorted(set(nb)):
                raise DuplicateEdge(f"neighbor list of {v} not strictly increasing")
            for w in nb:
                if w == v:
                    raise SelfLoop(f"self-loop at {v}")
                if not 0 <= w < self.n or v not in self.adj[w]:
                    raise InvalidParams(f"asymmetric adjacency at {v}-{w}")
                if v < w:
                    edges.append((v, w))
        if _components(self.n, self.adj) != 1:
            raise DisconnectedGraph("graph is not connected")
        object.__setattr__(self, "edges", tuple(edges))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise SelfLoop(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"edge ({u},{v}) out of range for n={n}")
            if v in nbrs[u]:
                raise DuplicateEdge(f"duplicate edge ({u},{v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.adj)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    def oriented_edges(self) -> list[tuple[int, int]]:
        """Both orientations of every edge, lexicographic in (tail, head)."""
        return [(v, w) for v in range(self.n) for w in self.adj[v]]

    def is_tree(self) -> bool:
        return self.m == self.n - 1

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


# ---------------------------------------------------------------- ingestion


def _parse_edge_list(text: str) -> tuple[int | None, list[tuple[int, int]]]:
    declared = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n":
            if declared is not None or edges or len(parts) != 2:
                raise ParseError(f"line {lineno}: misplaced header")
            try:
                declared = int(parts[1])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: bad vertex count") from exc
            continue
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'u v'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer vertex id") from exc
    return declared, edges


def _parse_json(text: str) -> tuple[int | None, list[tuple[int, int]]]:
    try:
        obj = json.loads(text)
        declared = obj.get("n")
        edges = [(int(u), int(v)) for u, v in obj["edges"]]
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"bad json graph: {exc}") from exc
    if declared is not None and not isinstance(declared, int):
        raise ParseError("'n' must be an integer")
    return declared, edges


def load_graph(source: bytes | str | io.IOBase, fmt: str = "edge-list") -> Graph:
    """Parse an edge list or JSON document into a validated Graph.

    Vertex ids are relabelled to 0..n-1 in ascending order of the input ids,
    so the relative vertex order (which fixes SAW-tree boundary rules) is kept.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("input is not utf-8") from exc
    if fmt in ("edge-list", "edgelist", "txt"):
        declared, edges = _parse_edge_list(source)
    elif fmt == "json":
        declared, edges = _parse_json(source)
    else:
        raise ParseError(f"unknown format {fmt!r}")

    for u, v in edges:
        if u == v:
            raise SelfLoop(f"self-loop at {u}")
    seen = set()
    for u, v in edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)

    if declared is not None:
        if declared < 1:
            raise ParseError("vertex count must be positive")
        for u, v in edges:
            if not (0 <= u < declared and 0 <= v < declared):
                raise ParseError(f"edge ({u},{v}) exceeds declared n={declared}")
        ids = list(range(declared))
    else:
        ids = sorted({x for e in edges for x in e})
        if not ids:
            raise ParseError("empty graph without a vertex-count header")
    relabel = {x: i for i, x in enumerate(ids)}
    return Graph.from_edges(len(ids), [(relabel[u], relabel[v]) for u, v in edges])


# ---------------------------------------------------------------- generators


def _random_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    prufer = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in prufer:
        degree[x] += 1
    edges = []
    for x in prufer:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return edges


def generate_graph(kind: str, params: dict, seed: int | None = None) -> Graph:
    """Build a graph from a named family; random kinds are seed-deterministic."""
    try:
        if kind == "path":
            n = int(params["n"])
            return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
        if kind == "cycle":
            n = int(params["n"])
            if n < 3:
                raise InvalidParams("cycle needs n >= 3")
            return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
        if kind == "complete":
            n = int(params["n"])
            return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
        if kind == "star":
            k = int(params["n"])
            return Graph.from_edges(k + 1, [(0, i) for i in range(1, k + 1)])
        if kind == "grid":
            r, c = int(params["rows"]), int(params["cols"])
            idx = lambda i, j: i * c + j  # noqa: E731
            edges = [(idx(i, j), idx(i, j + 1)) for i in range(r) for j in range(c - 1)]
            edges += [(idx(i, j), idx(i + 1, j)) for i in range(r - 1) for j in range(c)]
            return Graph.from_edges(r * c, edges)
        if kind == "random_tree":
            n = int(params["n"])
            return Graph.from_edges(n, _random_tree(n, np.random.default_rng(seed)))
        if kind == "erdos_renyi":
            n, p = int(params["n"]), float(params["p"])
            if not 0.0 <= p <= 1.0:
                raise InvalidParams("p must lie in [0, 1]")
            rng = np.random.default_rng(seed)
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
            for _ in range(MAX_RETRIES):
                keep = rng.random(len(pairs)) < p
                try:
                    return Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k])
                except DisconnectedGraph:
                    continue
            raise InvalidParams(f"no connected G({n},{p}) sample in {MAX_RETRIES} tries")
    except (KeyError, ValueError) as exc:
        raise InvalidParams(f"bad parameters for {kind}: {params}") from exc
    except DisconnectedGraph as exc:
        raise InvalidParams(str(exc)) from exc
    raise InvalidParams(f"unknown graph kind {kind!r}")


def parse_graph_spec(spec: str, seed: int | None = None) -> Graph:
    """Compact generator strings: 'cycle:5', 'grid:2x3', 'erdos_renyi:8,0.4'."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "grid":
            r, c = arg.lower().split("x")
            return generate_graph(kind, {"rows": r, "cols": c}, seed)
        if kind == "erdos_renyi":
            n, p = arg.split(",")
            return generate_graph(kind, {"n": n, "p": p}, seed)
        return generate_graph(kind, {"n": arg}, seed)
    except ValueError as exc:
        raise InvalidParams(f"bad graph spec {spec!r}") from exc


# ---------------------------------------------------------------- matrices


@dataclass(frozen=True)
class StructMatrices:
    A: np.ndarray
    D: np.ndarray
    H: np.ndarray
    K: np.ndarray
    C: np.ndarray
    oriented: tuple[tuple[int, int], ...]


def struct_matrices(g: Graph) -> StructMatrices:
    n = g.n
    A = np.zeros((n, n))
    for u, v in g.edges:
        A[u, v] = A[v, u] = 1.0
    D = np.diag(A.sum(axis=1))
    oriented = g.oriented_edges()
    index = {e: i for i, e in enumerate(oriented)}
    m2 = len(oriented)
    H = np.zeros((m2, m2))
    K = np.zeros((n, m2))
    C = np.zeros((m2, n))
    for i, (x, z) in enumerate(oriented):
        K[x, i] = 1.0
        C[i, z] = 1.0
        for y in g.adj[z]:
            if y != x:
                H[i, index[(z, y)]] = 1.0
    for arr in (A, D, H, K, C):
        arr.setflags(write=False)
    return StructMatrices(A, D, H, K, C, tuple(oriented))


def validate(g: Graph | tuple[int, Sequence[tuple[int, int]]]) -> dict:
    """Diagnostics for a Graph or a raw (n, edges) pair; never raises."""
    if isinstance(g, Graph):
        n, edges = g.n, list(g.edges)
    else:
        n, edges = g[0], list(g[1])
    self_loops = [(u, v) for u, v in edges if u == v]
    keys = [(min(u, v), max(u, v)) for u, v in edges if u != v]
    duplicates = len(keys) - len(set(keys))
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u, v in set(keys):
        if 0 <= u < n and 0 <= v < n:
            nbrs[u].add(v)
            nbrs[v].add(u)
    degrees = [len(s) for s in nbrs]
    return {
        "n": n,
        "m": len(set(keys)),
        "max_degree": max(degrees) if degrees else 0,
        "simple": not self_loops and duplicates == 0,
        "self_loops": len(self_loops),
        "duplicate_edges": duplicates,
        "connected": n >= 1 and _components(n, [sorted(s) for s in nbrs]) == 1,
    }
