"""Walk-trees (SAW, NB-k, MAX-k), SAW boundary weights, walk-matrices and walk-vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetExceeded, DimensionMismatch, InvalidParams
from .gibbs import BoundaryCondition, GibbsParams, child_term, h_fn
from .graph_core import Graph

KINDS = ("saw", "nb_k", "max_k")


@dataclass(frozen=True)
class WalkTree:
    """Walk-tree in DFS preorder; node i stores its terminal vertex and parent.

    For SAW trees, ``closing`` marks leaves that return to an earlier vertex and
    ``entry`` holds, for those leaves, the vertex that followed the repeated one
    on the walk (the first step of the closed cycle).
    """

    root: int
    kind: str
    k: int
    vertex: np.ndarray
    parent: np.ndarray
    depth: np.ndarray
    closing: np.ndarray
    entry: np.ndarray
    _levels: list = field(default_factory=list, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.vertex)

    def levels(self) -> list[np.ndarray]:
        """Node indices grouped by depth (index 0 is the root level)."""
        if not self._levels:
            order = np.argsort(self.depth, kind="stable")
            bounds = np.searchsorted(self.depth[order], np.arange(self.depth.max() + 2))
            self._levels.extend(order[bounds[i]:bounds[i + 1]] for i in range(len(bounds) - 1))
        return self._levels

    def children(self, node: int) -> list[int]:
        return np.nonzero(self.parent == node)[0].tolist()

    def walk(self, node: int) -> list[int]:
        out = []
        while node >= 0:
            out.append(int(self.vertex[node]))
            node = int(self.parent[node])
        return out[::-1]

    def first_branch(self) -> np.ndarray:
        """Index of the depth-1 ancestor of every node (-1 for the root)."""
        branch = np.full(len(self), -1, dtype=np.int64)
        for lvl in self.levels()[1:]:
            par = self.parent[lvl]
            branch[lvl] = np.where(self.depth[lvl] == 1, lvl, branch[par])
        return branch

    def dump(self, weights: np.ndarray | None = None, pins: dict | None = None) -> str:
        """Indented text, one node per line: depth endpoint [pinned s] weight."""
        lines = []
        for i in range(len(self)):
            d = int(self.depth[i])
            tag = f" [pinned {pins[i]:+d}]" if pins and i in pins else ""
            w = "" if weights is None or i == 0 else f" {weights[i]:.17g}"
            lines.append(f"{'  ' * d}{d} {int(self.vertex[i])}{tag}{w}")
        return "\n".join(lines)


def build_walk_tree(
    g: Graph,
    kind: str,
    root: int,
    k: int = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
    avoid: Iterable[int] = (),
) -> WalkTree:
    """Walk-tree rooted at ``root``; children in ascending vertex order.

    ``avoid`` drops every walk that visits one of the given vertices after the
    root (used for the SAW walks that stay clear of a pinned set).
    """
    if kind not in KINDS:
        raise InvalidParams(f"unknown walk kind {kind!r}")
    if not 0 <= root < g.n:
        raise InvalidParams(f"root {root} not a vertex")
    if k < 0:
        raise InvalidParams("depth cap must be non-negative")
    avoid = frozenset(avoid)
    vertex, parent, depth, closing, entry = [root], [-1], [0], [False], [-1]
    cap = budgets.nodes

    def add(v: int, par: int, d: int, close: bool, ent: int) -> int:
        if len(vertex) >= cap:
            raise BudgetExceeded(f"walk-tree exceeds node budget {cap}")
        vertex.append(v)
        parent.append(par)
        depth.append(d)
        closing.append(close)
        entry.append(ent)
        return len(vertex) - 1

    if kind == "saw":
        pos = {root: 0}
        path = [root]

        def grow(node: int) -> None:
            tail = path[-1]
            prev = path[-2] if len(path) > 1 else -1
            for y in g.adj[tail]:
                if y in avoid:
                    continue
                if y not in pos:
                    child = add(y, node, len(path), False, -1)
                    pos[y] = len(path)
                    path.append(y)
                    grow(child)
                    path.pop()
                    del pos[y]
                elif y != prev:
                    add(y, node, len(path), True, path[pos[y] + 1])

        grow(0)
    else:
        backtrack_ok = kind == "max_k"

        def grow_k(node: int, v: int, prev: int, d: int) -> None:
            if d == k:
                return
            for y in g.adj[v]:
                if (not backtrack_ok and y == prev) or y in avoid:
                    continue
                grow_k(add(y, node, d + 1, False, -1), y, v, d + 1)

        grow_k(0, root, -1, 0)

    return WalkTree(
        root,
        kind,
        k,
        np.array(vertex, dtype=np.int64),
        np.array(parent, dtype=np.int64),
        np.array(depth, dtype=np.int64),
        np.array(closing, dtype=bool),
        np.array(entry, dtype=np.int64),
    )


def copies(t: WalkTree, u: int) -> list[int]:
    """Nodes whose walk ends at u, in DFS order."""
    return np.nonzero(t.vertex == u)[0].tolist()


# ---------------------------------------------------------------- SAW boundary


@dataclass(frozen=True)
class SawBoundary:
    nodes: np.ndarray  # pinned tree nodes
    spins: np.ndarray  # +1 / -1 per pinned node


CLOSING_RULES = ("ordered", "predecessor")


def closing_spins(t: WalkTree, rule: str = "ordered") -> np.ndarray:
    """Spin for each cycle-closing leaf (0 on other nodes).

    ``ordered``: the repeated vertex x is fixed to +1 when the walk re-enters x
    through a neighbour smaller than the neighbour it left x by, else -1.
    ``predecessor``: -1 when the repeated vertex exceeds the vertex just
    before it on the walk, else +1.
    """
    spins = np.zeros(len(t), dtype=np.int64)
    idx = np.nonzero(t.closing)[0]
    if len(idx) == 0:
        return spins
    prev = t.vertex[t.parent[idx]]
    if rule == "ordered":
        spins[idx] = np.where(prev < t.entry[idx], 1, -1)
    elif rule == "predecessor":
        spins[idx] = np.where(t.vertex[idx] > prev, -1, 1)
    else:
        raise InvalidParams(f"unknown closing rule {rule!r}")
    return spins


@dataclass
class TreePass:
    """Per-node results of the upward/downward passes over a pinned tree."""

    log_ratio: np.ndarray
    weight: np.ndarray  # weight of the edge to the parent (0 at the root)
    pinned: np.ndarray  # +1 / -1 / 0
    alive: np.ndarray  # no strict ancestor is pinned
    path_product: np.ndarray


def pinned_pass(
    parent: np.ndarray,
    vertex: np.ndarray,
    levels: Sequence[np.ndarray],
    p: GibbsParams,
    pin: np.ndarray,
) -> TreePass:
    """Ratios, weights h(log R) and root-path products for a forest with fixed nodes.

    Descendants of a fixed node are ignored; edges touching a fixed node get weight 0.
    """
    size = len(vertex)
    alive = np.ones(size, dtype=bool)
    for lvl in levels[1:]:
        par = parent[lvl]
        alive[lvl] = alive[par] & (pin[par] == 0)
    acc = np.full(size, p.log_lam)
    x = np.empty(size)
    for lvl in reversed(levels[1:]):
        xs = np.where(pin[lvl] == 1, math.inf, np.where(pin[lvl] == -1, -math.inf, acc[lvl]))
        x[lvl] = xs
        live = lvl[alive[lvl]]
        np.add.at(acc, parent[live], child_term(p, x[live]))
    top = levels[0]
    x[top] = np.where(pin[top] == 1, math.inf, np.where(pin[top] == -1, -math.inf, acc[top]))
    weight = np.zeros(size)
    prod = np.zeros(size)
    prod[top] = 1.0
    for lvl in levels[1:]:
        par = parent[lvl]
        ok = alive[lvl] & (pin[lvl] == 0) & (pin[par] == 0)
        w = np.where(ok, h_fn(p, np.where(ok, x[lvl], 0.0)), 0.0)
        weight[lvl] = w
        prod[lvl] = prod[par] * w
    return TreePass(x, weight, pin, alive, prod)


def _tree_pins(t: WalkTree, b: BoundaryCondition, rule: str) -> np.ndarray:
    pin = closing_spins(t, rule)
    for v, s in b.items:
        pin[t.vertex == v] = s
    pin[0] = 0 if t.root not in b.pinned else pin[0]
    return pin


def saw_boundary_and_weights(
    g: Graph,
    p: GibbsParams,
    b: BoundaryCondition,
    root: int,
    budgets: Budgets = DEFAULT_BUDGETS,
    rule: str = "ordered",
    tree: WalkTree | None = None,
) -> tuple[SawBoundary, np.ndarray, WalkTree, TreePass]:
    """Pinned nodes with spins and the per-edge weights of the SAW tree of ``root``."""
    t = tree if tree is not None else build_walk_tree(g, "saw", root, budgets=budgets)
    pin = _tree_pins(t, b, rule)
    res = pinned_pass(t.parent, t.vertex, t.levels(), p, pin)
    nodes = np.nonzero(pin != 0)[0]
    return SawBoundary(nodes, pin[nodes]), res.weight, t, res


# ---------------------------------------------------------------- walk matrices


def walk_matrix(
    g: Graph,
    trees: Sequence[WalkTree],
    weights: Sequence[np.ndarray],
    index: Sequence[int] | None = None,
) -> np.ndarray:
    """W(r, u) = sum over root-to-copy-of-u paths of the product of edge weights.

    Rows and columns follow ``index`` (default: all vertices 0..n-1).
    """
    index = list(range(g.n)) if index is None else list(index)
    pos = {v: i for i, v in enumerate(index)}
    W = np.zeros((len(index), len(index)))
    for t, w in zip(trees, weights):
        if t.root not in pos:
            continue
        prod = np.zeros(len(t))
        prod[0] = 1.0
        for lvl in t.levels()[1:]:
            prod[lvl] = prod[t.parent[lvl]] * w[lvl]
        row = pos[t.root]
        for node in range(len(t)):
            col = pos.get(int(t.vertex[node]))
            if col is not None and prod[node] != 0.0:
                W[row, col] += prod[node]
    return W


def constant_weights(t: WalkTree, zeta: float) -> np.ndarray:
    w = np.full(len(t), float(zeta))
    w[0] = 0.0
    return w


def walk_vector(
    g: Graph,
    kind: str,
    k: int,
    Ddiag: Sequence[float],
    s: float,
    delta: float,
    c: float,
    budgets: Budgets = DEFAULT_BUDGETS,
    avoid: Iterable[int] = (),
    trees: Sequence[WalkTree] | None = None,
) -> np.ndarray:
    """q(r) = 1 + c/D(r) * sum_i sum_l (delta^l sum_w |A_{i,l}(w)| D(w)^s)^{1/s}.

    A_{i,l}(w) are the copies of w at depth l of the subtree hanging from the
    i-th child of the root.  ``s = inf`` uses the limiting max form.  Returns a
    length-n vector with NaN at vertices listed in ``avoid``.
    """
    D = np.asarray(Ddiag, dtype=float)
    if D.shape != (g.n,) or np.any(D <= 0):
        raise DimensionMismatch("D must be a positive vector of length n")
    if s < 1:
        raise InvalidParams("need s >= 1")
    avoid = frozenset(avoid)
    q = np.full(g.n, np.nan)
    for r in range(g.n):
        if r in avoid:
            continue
        t = trees[r] if trees is not None else build_walk_tree(g, kind, r, k, budgets, avoid)
        if len(t) == 1:
            q[r] = 1.0
            continue
        branch = t.first_branch()[1:]
        ell = t.depth[1:] - 1
        dw = D[t.vertex[1:]]
        keys = branch * (int(ell.max()) + 1) + ell
        uniq, inv = np.unique(keys, return_inverse=True)
        ells = uniq % (int(ell.max()) + 1)
        if math.isinf(s):
            groups = np.zeros(len(uniq))
            np.maximum.at(groups, inv, dw)
            total = groups.sum()
        else:
            groups = np.zeros(len(uniq))
            np.add.at(groups, inv, dw**s)
            total = np.sum((delta**ells * groups) ** (1.0 / s))
        q[r] = 1.0 + c / D[r] * total
    return q


def dtp_norm(M: np.ndarray, Ddiag: Sequence[float], t: float, p: float) -> float:
    """p-norm of (D^t)^{-1} M D^t for a positive diagonal D (p in {1, 2, inf})."""
    M = np.asarray(M, dtype=float)
    D = np.asarray(Ddiag, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or D.shape != (M.shape[0],):
        raise DimensionMismatch("M must be square with a matching diagonal")
    if np.any(D <= 0):
        raise InvalidParams("D must be positive")
    Dt = D**t
    X = M * (Dt[None, :] / Dt[:, None])
    if p == 1:
        return float(np.abs(X).sum(axis=0).max()) if X.size else 0.0
    if p == 2:
        return float(np.linalg.norm(X, 2)) if X.size else 0.0
    if p == math.inf:
        return float(np.abs(X).sum(axis=1).max()) if X.size else 0.0
    raise InvalidParams("p must be 1, 2 or inf")
