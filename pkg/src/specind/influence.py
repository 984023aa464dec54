"""Pairwise influence matrices (exact and SAW-tree routes) and spectral independence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetExceeded, EmptySupport, InvalidParams
from .gibbs import BoundaryCondition, GibbsParams, enumerate_states, iter_pinnings, sample_pinnings
from .graph_core import Graph
from .walks import WalkTree, build_walk_tree, closing_spins, pinned_pass

IMAG_TOL = 1e-8


@dataclass
class InfluenceMatrix:
    """Influence matrix indexed by the unpinned vertices ``index``."""

    matrix: np.ndarray
    index: tuple[int, ...]
    provenance: str
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    var: np.ndarray | None = None  # conditional variances (exact route only)

    def entry(self, w: int, u: int) -> float:
        return float(self.matrix[self.index.index(w), self.index.index(u)])


def influence_bruteforce(
    g: Graph,
    p: GibbsParams,
    b: BoundaryCondition | None = None,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> InfluenceMatrix:
    """I(w,u) = mu_u(+ | w=+) - mu_u(+ | w=-) under the pinning, by enumeration.

    Uses I = diag(var)^{-1} Cov.  When one conditioning of w has empty support
    the matching marginal term is taken as 0 and row w is flagged.
    """
    b = b or BoundaryCondition()
    e = enumerate_states(g, p, b, budgets)
    free = [v for v in range(g.n) if v not in b.pinned]
    X = e.plus[:, free].astype(float)
    pr = e.probs
    mean = pr @ X
    second = X.T @ (pr[:, None] * X)
    var = mean * (1.0 - mean)
    k = len(free)
    M = np.empty((k, k))
    flagged = np.zeros(k, dtype=bool)
    for i in range(k):
        if var[i] > 1e-300:
            M[i] = (second[i] - mean[i] * mean) / var[i]
        else:
            flagged[i] = True
            if mean[i] <= 0.5:  # w cannot be +1: mu(.|w=+) term is 0
                M[i] = -mean
                M[i, i] = 0.0
            else:  # w cannot be -1
                M[i] = mean
                M[i, i] = 1.0
    return InfluenceMatrix(M, tuple(free), "bruteforce", flagged, var)


@dataclass
class SawForest:
    """All SAW trees of a graph concatenated into one forest (built once per graph)."""

    n: int
    vertex: np.ndarray
    parent: np.ndarray
    root_of: np.ndarray
    levels: list[np.ndarray]
    closing_spin: np.ndarray
    tree_offsets: np.ndarray

    @classmethod
    def build(
        cls, g: Graph, budgets: Budgets = DEFAULT_BUDGETS, rule: str = "ordered"
    ) -> "SawForest":
        trees = [build_walk_tree(g, "saw", r, budgets=budgets) for r in range(g.n)]
        total = sum(len(t) for t in trees)
        if total > budgets.nodes:
            raise BudgetExceeded(f"SAW forest has {total} nodes, budget {budgets.nodes}")
        offsets = np.cumsum([0] + [len(t) for t in trees])
        vertex = np.concatenate([t.vertex for t in trees])
        parent = np.concatenate(
            [np.where(t.parent >= 0, t.parent + off, -1) for t, off in zip(trees, offsets)]
        )
        depth = np.concatenate([t.depth for t in trees])
        root_of = np.concatenate([np.full(len(t), t.root) for t in trees])
        spins = np.concatenate([closing_spins(t, rule) for t in trees])
        order = np.argsort(depth, kind="stable")
        bounds = np.searchsorted(depth[order], np.arange(depth.max() + 2))
        levels = [order[bounds[i]:bounds[i + 1]] for i in range(len(bounds) - 1)]
        return cls(g.n, vertex, parent, root_of, levels, spins, offsets)


def influence_via_saw(
    g: Graph,
    p: GibbsParams,
    b: BoundaryCondition | None = None,
    budgets: Budgets = DEFAULT_BUDGETS,
    forest: SawForest | None = None,
    rule: str = "ordered",
) -> InfluenceMatrix:
    """Influence matrix as the weighted walk-matrix of the SAW trees avoiding the pins."""
    b = b or BoundaryCondition()
    f = forest if forest is not None else SawForest.build(g, budgets, rule)
    pin = f.closing_spin.copy()
    for v, s in b.items:
        pin[f.vertex == v] = s
    # roots that are themselves pinned are dropped below; keep their trees inert
    res = pinned_pass(f.parent, f.vertex, f.levels, p, pin)
    free = [v for v in range(g.n) if v not in b.pinned]
    pos = np.full(g.n, -1)
    pos[free] = np.arange(len(free))
    keep = res.alive & (pin == 0) & (pos[f.root_of] >= 0) & (pos[f.vertex] >= 0)
    keep &= res.path_product != 0.0
    M = np.zeros((len(free), len(free)))
    np.add.at(M, (pos[f.root_of[keep]], pos[f.vertex[keep]]), res.path_product[keep])
    return InfluenceMatrix(M, tuple(free), "saw", np.zeros(len(free), dtype=bool))


# ---------------------------------------------------------------- spectra


def theta_max(M: np.ndarray) -> tuple[float, bool]:
    """Largest real eigenvalue and whether the spectrum was real to tolerance."""
    if M.size == 0:
        return 0.0, True
    ev = np.linalg.eigvals(M)
    real = bool(np.max(np.abs(ev.imag)) <= IMAG_TOL)
    return float(np.max(ev.real)), real


def influence_spectrum(im: InfluenceMatrix) -> tuple[float, float, bool]:
    """(theta_max, spectral radius, real-spectrum flag) of an influence matrix.

    Unflagged influence matrices equal diag(var)^{-1} Cov, so they are similar
    to a symmetric matrix; in that case the symmetric eigensolver is used.
    """
    M = im.matrix
    if M.size == 0:
        return 0.0, 0.0, True
    if im.var is not None:
        # flagged columns are zero, so their eigenvalues are the zero diagonal
        ok = ~im.flagged
        if not ok.any():
            return 0.0, 0.0, True
        r = np.sqrt(im.var[ok])
        X = r[:, None] * M[np.ix_(ok, ok)] / r[None, :]
        if np.allclose(X, X.T, rtol=1e-9, atol=1e-12):
            ev = np.linalg.eigvalsh(0.5 * (X + X.T))
            extra = 0.0 if im.flagged.any() else -np.inf
            return float(max(ev[-1], extra)), float(np.max(np.abs(ev))), True
    sym = _symmetrize(M)
    if sym is not None:
        ev = np.linalg.eigvalsh(sym)
        return float(ev[-1]), float(np.max(np.abs(ev))), True
    ev = np.linalg.eigvals(M)
    real = bool(np.max(np.abs(ev.imag)) <= IMAG_TOL)
    return float(np.max(ev.real)), float(np.max(np.abs(ev))), real


def _symmetrize(M: np.ndarray) -> np.ndarray | None:
    """S^{1/2} M S^{-1/2} for a positive diagonal S with S M symmetric, if one exists."""
    k = M.shape[0]
    if k == 1:
        return M.copy()
    # S M symmetric means s_i M_ij = s_j M_ji; propagate ratios over nonzero pairs
    s = np.full(k, np.nan)
    for start in range(k):
        if not np.isnan(s[start]):
            continue
        s[start] = 1.0
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(k):
                if i == j or (M[i, j] == 0 and M[j, i] == 0):
                    continue
                if M[i, j] == 0 or M[j, i] == 0 or M[i, j] * M[j, i] < 0:
                    return None
                val = s[i] * M[i, j] / M[j, i]
                if np.isnan(s[j]):
                    s[j] = val
                    stack.append(j)
    S = s[:, None] * M
    if not np.allclose(S, S.T, rtol=1e-9, atol=1e-12):
        return None
    r = np.sqrt(s)
    X = r[:, None] * M / r[None, :]
    return 0.5 * (X + X.T)


@dataclass
class SpectralIndependenceResult:
    eta: float
    max_theta: float
    max_rho: float
    coverage: str
    pinnings: int
    skipped: int
    nonreal: int
    worst_pinning: BoundaryCondition | None = None

    def to_json(self) -> dict:
        return {
            "eta": self.eta,
            "max_theta": self.max_theta,
            "max_rho": self.max_rho,
            "coverage": self.coverage,
            "pinnings": self.pinnings,
            "skipped_empty_support": self.skipped,
            "nonreal_spectra": self.nonreal,
            "worst_pinning": None if self.worst_pinning is None else [list(x) for x in self.worst_pinning.items],
        }


def pinning_sweep(
    n: int, coverage: str = "exhaustive", samples: int = 200, seed: int = 0, max_size: int | None = None
) -> Iterator[BoundaryCondition]:
    max_size = n - 2 if max_size is None else max_size
    max_size = max(max_size, 0)
    if coverage == "exhaustive":
        return iter_pinnings(n, max_size)
    if coverage == "sampled":
        return sample_pinnings(n, samples, seed, max_size)
    raise InvalidParams(f"unknown coverage {coverage!r}")


def spectral_independence_eta(
    g: Graph,
    p: GibbsParams,
    coverage: str = "exhaustive",
    samples: int = 200,
    seed: int = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
    max_size: int | None = None,
) -> SpectralIndependenceResult:
    """eta = max theta_max(I) - 1 over pinnings with |Lambda| <= n-2 (by default)."""
    if coverage == "exhaustive" and g.n > 10:
        raise BudgetExceeded("exhaustive pinning sweep limited to n <= 10")
    best_theta, best_rho = -np.inf, 0.0
    worst = None
    count = skipped = nonreal = 0
    for b in pinning_sweep(g.n, coverage, samples, seed, max_size):
        try:
            im = influence_bruteforce(g, p, b, budgets)
        except EmptySupport:
            skipped += 1
            continue
        count += 1
        th, rho, real = influence_spectrum(im)
        nonreal += not real
        if th > best_theta:
            best_theta, worst = th, b
        best_rho = max(best_rho, rho)
    return SpectralIndependenceResult(
        best_theta - 1.0, best_theta, best_rho, coverage, count, skipped, nonreal, worst
    )


def tree_step_influences(g: Graph, p: GibbsParams) -> dict[tuple[int, int], float]:
    """For a tree graph: one-step influence x -> y equals h(log R_y) with x removed."""
    from .gibbs import h_fn, log_ratio

    if not g.is_tree():
        raise InvalidParams("graph is not a tree")
    out = {}
    for x, y in g.oriented_edges():
        keep = [v for v in range(g.n) if v != x]
        idx = {v: i for i, v in enumerate(keep)}
        sub = (len(keep), [(idx[u], idx[v]) for u, v in g.edges if x not in (u, v)])
        out[(x, y)] = float(h_fn(p, log_ratio(sub, p, None, idx[y])))
    return out
